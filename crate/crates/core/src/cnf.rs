//! CNF formulas: literals, clauses, assignments, DIMACS I/O and the resolution rule.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::ops::Not;

use thiserror::Error;

/// A boolean variable, numbered from 1 as in DIMACS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// # Panics
    /// If `index` is zero.
    pub fn new(index: u32) -> Self {
        assert!(index >= 1, "variable indices start at 1");
        Var(index)
    }

    pub fn index(self) -> u32 {
        self.0
    }

    /// Zero-based position, for indexing dense per-variable arrays.
    #[inline]
    pub fn slot(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_slot(slot: usize) -> Self {
        Var(slot as u32 + 1)
    }

    pub fn positive(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn negative(self) -> Lit {
        Lit::new(self, false)
    }
}

/// A literal, packed as `var << 1 | negated`.
///
/// Ordering follows the packed code, so sorting a clause sorts by variable
/// index first and puts the positive literal before the negative one.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Self {
        Lit(var.0 << 1 | u32::from(!positive))
    }

    /// Builds a literal from a non-zero DIMACS integer.
    pub fn from_dimacs(value: i64) -> Self {
        assert!(value != 0, "0 is the DIMACS clause terminator, not a literal");
        Lit::new(Var::new(value.unsigned_abs() as u32), value > 0)
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().0);
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    #[inline]
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Dense code, usable as an index into per-literal tables of size `2 * (n + 1)`.
    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn from_code(code: usize) -> Self {
        Lit(code as u32)
    }
}

impl Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals in canonical form: sorted, no repeated literal.
///
/// A clause may still contain a complementary pair; such clauses are
/// tautologies and are reported by [`Clause::is_tautology`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    /// Canonicalizes `lits`: sorts and removes duplicate literals.
    pub fn new(mut lits: Vec<Lit>) -> Self {
        lits.sort_unstable();
        lits.dedup();
        Clause { lits }
    }

    pub fn empty() -> Self {
        Clause { lits: Vec::new() }
    }

    pub fn from_dimacs(values: &[i64]) -> Self {
        Clause::new(values.iter().map(|&v| Lit::from_dimacs(v)).collect())
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.binary_search(&lit).is_ok()
    }

    pub fn is_tautology(&self) -> bool {
        self.lits.windows(2).any(|w| w[0].var() == w[1].var())
    }

    pub fn max_var(&self) -> Option<Var> {
        self.lits.last().map(|l| l.var())
    }

    pub fn to_dimacs(&self) -> Vec<i64> {
        self.lits.iter().map(|l| l.to_dimacs()).collect()
    }

    /// True iff at least one literal is satisfied. The empty clause is never satisfied.
    pub fn eval(&self, alpha: &Assignment) -> bool {
        self.lits.iter().any(|&l| alpha.lit_value(l))
    }

    /// Number of literals satisfied under `alpha`.
    pub fn count_satisfied(&self, alpha: &Assignment) -> usize {
        self.lits.iter().filter(|&&l| alpha.lit_value(l)).count()
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.lits.iter()).finish()
    }
}

impl FromIterator<Lit> for Clause {
    fn from_iter<I: IntoIterator<Item = Lit>>(iter: I) -> Self {
        Clause::new(iter.into_iter().collect())
    }
}

/// Outcome of a resolution step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Resolvent {
    Clause(Clause),
    Tautology,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("variable {pivot} does not clash between the two clauses")]
pub struct NotClashing {
    pub pivot: u32,
}

/// Resolves `a` and `b` on `pivot`: from `B ∨ x` and `C ∨ ¬x` derive `B ∨ C`.
///
/// The pivot may occur positively in either clause.
pub fn resolve(a: &Clause, b: &Clause, pivot: Var) -> Result<Resolvent, NotClashing> {
    let (pos, neg) = (pivot.positive(), pivot.negative());
    let clashing = (a.contains(pos) && b.contains(neg)) || (a.contains(neg) && b.contains(pos));
    if !clashing {
        return Err(NotClashing { pivot: pivot.index() });
    }
    Ok(resolve_unchecked(a, b, pivot))
}

/// Resolution without the clash check. Both inputs must be canonical.
pub(crate) fn resolve_unchecked(a: &Clause, b: &Clause, pivot: Var) -> Resolvent {
    // merge of two sorted lists
    let (x, y) = (a.lits(), b.lits());
    let mut out = Vec::with_capacity(x.len() + y.len() - 2);
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let next = if j == y.len() || (i < x.len() && x[i] <= y[j]) {
            i += 1;
            x[i - 1]
        } else {
            j += 1;
            y[j - 1]
        };
        if next.var() == pivot {
            continue;
        }
        match out.last() {
            Some(&last) if last == next => {}
            Some(&last) if last == !next => return Resolvent::Tautology,
            _ => out.push(next),
        }
    }
    Resolvent::Clause(Clause { lits: out })
}

/// A complete truth assignment over variables `1..=n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    pub fn all(num_vars: usize, value: bool) -> Self {
        Assignment { values: vec![value; num_vars] }
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn value(&self, var: Var) -> bool {
        self.values[var.slot()]
    }

    #[inline]
    pub fn lit_value(&self, lit: Lit) -> bool {
        self.values[lit.var().slot()] == lit.is_positive()
    }

    pub fn set(&mut self, var: Var, value: bool) {
        self.values[var.slot()] = value;
    }

    #[inline]
    pub fn flip(&mut self, var: Var) {
        let v = &mut self.values[var.slot()];
        *v = !*v;
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    /// The literal over `var` that is true under this assignment.
    pub fn true_lit(&self, var: Var) -> Lit {
        Lit::new(var, self.value(var))
    }

    /// Writes the SAT-competition model line(s): `v 1 -2 3 ... 0`.
    pub fn write_model<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut line = String::from("v");
        for slot in 0..self.values.len() {
            let lit = self.true_lit(Var::from_slot(slot));
            line.push(' ');
            line.push_str(&lit.to_dimacs().to_string());
            if line.len() > 76 {
                writeln!(out, "{line}")?;
                line = String::from("v");
            }
        }
        writeln!(out, "{line} 0")
    }

    /// Reads `v ...` lines. Variables never mentioned default to false; the
    /// result has `num_vars` entries.
    pub fn parse_model(text: &str, num_vars: usize) -> Result<Assignment, DimacsError> {
        let mut values = vec![false; num_vars];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            let Some(rest) = line.strip_prefix('v') else { continue };
            for tok in rest.split_whitespace() {
                let value: i64 = tok.parse().map_err(|_| DimacsError::BadToken {
                    line: lineno + 1,
                    token: tok.to_string(),
                })?;
                if value == 0 {
                    continue;
                }
                let var = value.unsigned_abs() as usize;
                if var > num_vars {
                    return Err(DimacsError::VariableOutOfRange {
                        line: lineno + 1,
                        literal: value,
                        num_vars,
                    });
                }
                values[var - 1] = value > 0;
            }
        }
        Ok(Assignment { values })
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: String = self.values.iter().map(|&b| if b { '1' } else { '0' }).collect();
        write!(f, "Assignment({bits})")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: malformed header {text:?}")]
    MalformedHeader { line: usize, text: String },
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("line {line}: unexpected token {token:?}")]
    BadToken { line: usize, token: String },
    #[error("line {line}: literal {literal} exceeds declared variable count {num_vars}")]
    VariableOutOfRange { line: usize, literal: i64, num_vars: usize },
    #[error("last clause is not terminated by 0")]
    MissingTerminator,
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<io::Error> for DimacsError {
    fn from(e: io::Error) -> Self {
        DimacsError::Io(e.to_string())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("clause mentions variable {var} but the formula has {num_vars} variables")]
    VariableOutOfRange { var: u32, num_vars: usize },
    #[error("formula has no clauses")]
    Empty,
}

/// Non-fatal findings while parsing DIMACS.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DimacsWarning {
    ClauseCountMismatch { declared: usize, actual: usize },
}

/// An immutable clause database with a literal occurrence index.
#[derive(Clone, Debug)]
pub struct Formula {
    num_vars: usize,
    clauses: Vec<Clause>,
    tautology: Vec<bool>,
    occurrences: Vec<Vec<u32>>,
    max_width: usize,
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars == other.num_vars && self.clauses == other.clauses
    }
}

impl Eq for Formula {}

impl Formula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self, FormulaError> {
        for c in &clauses {
            if let Some(v) = c.max_var() {
                if v.slot() >= num_vars {
                    return Err(FormulaError::VariableOutOfRange { var: v.index(), num_vars });
                }
            }
        }
        let mut occurrences = vec![Vec::new(); 2 * (num_vars + 1)];
        for (id, c) in clauses.iter().enumerate() {
            for &l in c.lits() {
                occurrences[l.code()].push(id as u32);
            }
        }
        let tautology = clauses.iter().map(Clause::is_tautology).collect();
        let max_width = clauses.iter().map(Clause::len).max().unwrap_or(0);
        Ok(Formula { num_vars, clauses, tautology, occurrences, max_width })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, id: usize) -> &Clause {
        &self.clauses[id]
    }

    pub fn is_tautology(&self, id: usize) -> bool {
        self.tautology[id]
    }

    /// Ids of the clauses containing `lit`, ascending.
    pub fn occurrences(&self, lit: Lit) -> &[u32] {
        &self.occurrences[lit.code()]
    }

    /// Largest clause width; errors on a formula without clauses.
    pub fn max_clause_width(&self) -> Result<usize, FormulaError> {
        if self.clauses.is_empty() {
            Err(FormulaError::Empty)
        } else {
            Ok(self.max_width)
        }
    }

    pub fn is_satisfied_by(&self, alpha: &Assignment) -> bool {
        self.clauses.iter().all(|c| c.eval(alpha))
    }

    pub fn count_falsified(&self, alpha: &Assignment) -> usize {
        self.clauses.iter().filter(|c| !c.eval(alpha)).count()
    }

    /// Clause set view for order-insensitive comparison.
    pub fn clause_set(&self) -> std::collections::BTreeSet<Clause> {
        self.clauses.iter().cloned().collect()
    }

    /// `F ∪ S`: appends clauses not already present (in `F` or earlier in `S`).
    pub fn augment<I>(&self, extra: I) -> Result<Formula, FormulaError>
    where
        I: IntoIterator<Item = Clause>,
    {
        let mut seen: std::collections::HashSet<Clause> = self.clauses.iter().cloned().collect();
        let mut clauses = self.clauses.clone();
        for c in extra {
            if let Some(v) = c.max_var() {
                if v.slot() >= self.num_vars {
                    return Err(FormulaError::VariableOutOfRange {
                        var: v.index(),
                        num_vars: self.num_vars,
                    });
                }
            }
            if seen.insert(c.clone()) {
                clauses.push(c);
            }
        }
        Formula::new(self.num_vars, clauses)
    }

    pub fn write_dimacs<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        write_clause_lines(&mut out, &self.clauses)
    }

    pub fn to_dimacs_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_dimacs(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("DIMACS output is ASCII")
    }
}

/// Writes one 0-terminated clause per line.
pub fn write_clause_lines<W: Write>(mut out: W, clauses: &[Clause]) -> io::Result<()> {
    let mut line = String::new();
    for c in clauses {
        line.clear();
        for l in c.lits() {
            line.push_str(&l.to_dimacs().to_string());
            line.push(' ');
        }
        line.push('0');
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Parses DIMACS CNF, logging any warnings.
pub fn parse_dimacs<R: BufRead>(input: R) -> Result<Formula, DimacsError> {
    let (formula, warnings) = parse_dimacs_with_warnings(input)?;
    for w in warnings {
        match w {
            DimacsWarning::ClauseCountMismatch { declared, actual } => {
                log::warn!("header declares {declared} clauses, found {actual}; using {actual}")
            }
        }
    }
    Ok(formula)
}

pub fn parse_dimacs_str(text: &str) -> Result<Formula, DimacsError> {
    parse_dimacs(text.as_bytes())
}

pub fn parse_dimacs_with_warnings<R: BufRead>(
    input: R,
) -> Result<(Formula, Vec<DimacsWarning>), DimacsError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut open = false;

    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            // SATLIB trailer
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(DimacsError::MalformedHeader { line: lineno, text: line.clone() });
            }
            header = Some(parse_header(trimmed).ok_or_else(|| DimacsError::MalformedHeader {
                line: lineno,
                text: line.clone(),
            })?);
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(DimacsError::MissingHeader);
        };
        for tok in trimmed.split_whitespace() {
            let value: i64 = tok.parse().map_err(|_| DimacsError::BadToken {
                line: lineno,
                token: tok.to_string(),
            })?;
            if value == 0 {
                clauses.push(Clause::new(std::mem::take(&mut current)));
                open = false;
                continue;
            }
            if value.unsigned_abs() as usize > num_vars {
                return Err(DimacsError::VariableOutOfRange { line: lineno, literal: value, num_vars });
            }
            current.push(Lit::from_dimacs(value));
            open = true;
        }
    }

    let (num_vars, declared) = header.ok_or(DimacsError::MissingHeader)?;
    if open {
        return Err(DimacsError::MissingTerminator);
    }
    let mut warnings = Vec::new();
    if declared != clauses.len() {
        warnings.push(DimacsWarning::ClauseCountMismatch { declared, actual: clauses.len() });
    }
    let formula = Formula::new(num_vars, clauses).expect("literals were range-checked");
    Ok((formula, warnings))
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut parts = line.split_whitespace();
    if parts.next()? != "p" || parts.next()? != "cnf" {
        return None;
    }
    let n = parts.next()?.parse().ok()?;
    let m = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some((n, m))
}

/// Reads a bare clause list: 0-terminated clauses, `c` comments, optional header.
pub fn parse_clause_list(text: &str) -> Result<Vec<Clause>, DimacsError> {
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('c') || t.starts_with('p') {
            continue;
        }
        for tok in t.split_whitespace() {
            let value: i64 = tok.parse().map_err(|_| DimacsError::BadToken {
                line: idx + 1,
                token: tok.to_string(),
            })?;
            if value == 0 {
                clauses.push(Clause::new(std::mem::take(&mut current)));
            } else {
                current.push(Lit::from_dimacs(value));
            }
        }
    }
    if !current.is_empty() {
        return Err(DimacsError::MissingTerminator);
    }
    Ok(clauses)
}
