//! probSAT without restarts, with incrementally maintained break values.
//!
//! [`SlsProblem`] is the immutable, shareable part (flattened clauses and a
//! CSR occurrence index); [`SlsState`] is the per-run mutable part. Break
//! values use the usual "number of true literals + xor of true variables"
//! representation, so the critical variable of a clause with exactly one
//! true literal is read off in O(1).

use std::fmt;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Assignment, Formula, Lit, Var};
use crate::rng::{seeded, SeededRng};

const NOT_FALSIFIED: u32 = u32::MAX;
const DEADLINE_CHECK_MASK: u64 = (1 << 14) - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoringKind {
    /// `f(b) = (eps + b)^-cb`
    Poly,
    /// `f(b) = cb^-b`
    Exp,
}

#[derive(Debug, Error, PartialEq)]
pub enum ScoringError {
    #[error("exp scoring needs cb > 1, got {0}")]
    ExpBase(f64),
    #[error("poly scoring needs cb > 0, got {0}")]
    PolyExponent(f64),
    #[error("poly scoring needs eps > 0, got {0}")]
    Epsilon(f64),
}

/// The break-only scoring function `f` used to weight a clause's literals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoringFunction {
    pub kind: ScoringKind,
    #[serde(default)]
    pub epsilon: f64,
    pub cb: f64,
}

impl ScoringFunction {
    pub fn poly(epsilon: f64, cb: f64) -> Result<Self, ScoringError> {
        ScoringFunction { kind: ScoringKind::Poly, epsilon, cb }.validated()
    }

    pub fn exp(cb: f64) -> Result<Self, ScoringError> {
        ScoringFunction { kind: ScoringKind::Exp, epsilon: 0.0, cb }.validated()
    }

    pub fn validated(self) -> Result<Self, ScoringError> {
        match self.kind {
            ScoringKind::Exp if self.cb.is_nan() || self.cb <= 1.0 => Err(ScoringError::ExpBase(self.cb)),
            ScoringKind::Poly if self.epsilon.is_nan() || self.epsilon <= 0.0 => Err(ScoringError::Epsilon(self.epsilon)),
            ScoringKind::Poly if self.cb.is_nan() || self.cb <= 0.0 => Err(ScoringError::PolyExponent(self.cb)),
            _ => Ok(self),
        }
    }

    /// Default parameters by maximal clause width.
    pub fn default_for_width(max_width: usize) -> Self {
        match max_width {
            3 => ScoringFunction { kind: ScoringKind::Poly, epsilon: 0.9, cb: 2.06 },
            5 => ScoringFunction { kind: ScoringKind::Exp, epsilon: 0.0, cb: 3.7 },
            7 => ScoringFunction { kind: ScoringKind::Exp, epsilon: 0.0, cb: 5.4 },
            _ => ScoringFunction { kind: ScoringKind::Exp, epsilon: 0.0, cb: 3.0 },
        }
    }

    pub fn eval(&self, breaks: u32) -> f64 {
        match self.kind {
            ScoringKind::Poly => (self.epsilon + f64::from(breaks)).powf(-self.cb),
            ScoringKind::Exp => self.cb.powf(-f64::from(breaks)),
        }
    }

    /// `f(0..=max_break)`.
    pub fn table(&self, max_break: usize) -> Vec<f64> {
        (0..=max_break as u32).map(|b| self.eval(b)).collect()
    }
}

impl fmt::Display for ScoringFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ScoringKind::Poly => write!(f, "poly(eps={}, cb={})", self.epsilon, self.cb),
            ScoringKind::Exp => write!(f, "exp(cb={})", self.cb),
        }
    }
}

/// Flattened, immutable view of a formula for the local search.
///
/// Tautological clauses are left out of the occurrence index: they are
/// satisfied by every assignment and never contribute to break values.
#[derive(Debug)]
pub struct SlsProblem<'f> {
    formula: &'f Formula,
    clause_start: Vec<u32>,
    lits: Vec<Lit>,
    occ_start: Vec<u32>,
    occ: Vec<u32>,
    has_empty_clause: bool,
    max_break: usize,
}

impl<'f> SlsProblem<'f> {
    pub fn new(formula: &'f Formula) -> Self {
        let mut clause_start = Vec::with_capacity(formula.num_clauses() + 1);
        let mut lits = Vec::new();
        clause_start.push(0);
        for c in formula.clauses() {
            lits.extend_from_slice(c.lits());
            clause_start.push(lits.len() as u32);
        }

        let num_codes = 2 * (formula.num_vars() + 1);
        let mut counts = vec![0u32; num_codes + 1];
        for (id, c) in formula.clauses().iter().enumerate() {
            if formula.is_tautology(id) {
                continue;
            }
            for l in c.lits() {
                counts[l.code() + 1] += 1;
            }
        }
        let max_break = counts.iter().copied().max().unwrap_or(0) as usize;
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let occ_start = counts.clone();
        let mut fill = counts;
        let mut occ = vec![0u32; *occ_start.last().unwrap() as usize];
        for (id, c) in formula.clauses().iter().enumerate() {
            if formula.is_tautology(id) {
                continue;
            }
            for l in c.lits() {
                occ[fill[l.code()] as usize] = id as u32;
                fill[l.code()] += 1;
            }
        }

        SlsProblem {
            formula,
            clause_start,
            lits,
            occ_start,
            occ,
            has_empty_clause: formula.clauses().iter().any(|c| c.is_empty()),
            max_break,
        }
    }

    pub fn formula(&self) -> &'f Formula {
        self.formula
    }

    #[inline]
    fn clause_lits(&self, c: usize) -> &[Lit] {
        &self.lits[self.clause_start[c] as usize..self.clause_start[c + 1] as usize]
    }

    #[inline]
    fn occurrences(&self, lit: Lit) -> &[u32] {
        &self.occ[self.occ_start[lit.code()] as usize..self.occ_start[lit.code() + 1] as usize]
    }

    /// Upper bound on any break value: the largest literal occurrence count.
    pub fn max_break(&self) -> usize {
        self.max_break
    }

    /// Runs Algorithm 1 from a fresh random assignment drawn from `rng`.
    pub fn run(&self, limits: RunLimits, scoring: &ScoringFunction, rng: &mut SeededRng) -> RunResult {
        let start = Instant::now();
        let mut state = SlsState::with_rng_ref(self, rng);
        let table = scoring.table(self.max_break);
        let status = if self.has_empty_clause || self.formula.num_vars() == 0 {
            if self.formula.num_clauses() == 0 {
                RunStatus::Solved
            } else {
                RunStatus::FlipsExhausted
            }
        } else {
            state.search(limits, &table, rng)
        };
        let model = (status == RunStatus::Solved).then(|| state.assignment.clone());
        if let Some(m) = &model {
            assert!(self.formula.is_satisfied_by(m), "probSAT returned a non-model");
        }
        RunResult {
            status,
            flips: state.flips,
            model,
            seed: limits.seed_label,
            wall_seconds: start.elapsed().as_secs_f64(),
        }
    }
}

/// Stopping conditions for one run.
#[derive(Clone, Copy, Debug)]
pub struct RunLimits {
    pub max_flips: u64,
    pub deadline: Option<Instant>,
    /// Copied into [`RunResult::seed`].
    pub seed_label: u64,
}

impl RunLimits {
    pub fn flips(max_flips: u64) -> Self {
        RunLimits { max_flips, deadline: None, seed_label: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Solved,
    FlipsExhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub status: RunStatus,
    pub flips: u64,
    pub model: Option<Assignment>,
    pub seed: u64,
    pub wall_seconds: f64,
}

impl RunResult {
    pub fn solved(&self) -> bool {
        self.status == RunStatus::Solved
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("clause {0} is not falsified under the current assignment")]
pub struct NotFalsified(pub usize);

/// Mutable search state of a single run.
#[derive(Clone, Debug)]
pub struct SlsState<'p, 'f> {
    problem: &'p SlsProblem<'f>,
    assignment: Assignment,
    break_count: Vec<u32>,
    num_true: Vec<u32>,
    true_xor: Vec<u32>,
    falsified: Vec<u32>,
    position: Vec<u32>,
    flips: u64,
    weights: Vec<f64>,
}

impl PartialEq for SlsState<'_, '_> {
    fn eq(&self, other: &Self) -> bool {
        self.assignment == other.assignment
            && self.break_count == other.break_count
            && self.num_true == other.num_true
            && self.true_xor == other.true_xor
            && self.sorted_falsified() == other.sorted_falsified()
    }
}

/// Break values and falsified set recomputed from scratch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recount {
    pub break_count: Vec<u32>,
    pub falsified: Vec<u32>,
}

impl<'p, 'f> SlsState<'p, 'f> {
    /// Draws a uniform random assignment from `seed`.
    pub fn new(problem: &'p SlsProblem<'f>, seed: u64) -> Self {
        Self::with_rng_ref(problem, &mut seeded(seed))
    }

    fn with_rng_ref(problem: &'p SlsProblem<'f>, rng: &mut SeededRng) -> Self {
        let n = problem.formula.num_vars();
        let values = (0..n).map(|_| rng.random::<bool>()).collect();
        Self::from_assignment(problem, Assignment::new(values))
    }

    pub fn from_assignment(problem: &'p SlsProblem<'f>, assignment: Assignment) -> Self {
        let formula = problem.formula;
        assert_eq!(assignment.num_vars(), formula.num_vars());
        let m = formula.num_clauses();
        let mut state = SlsState {
            problem,
            assignment,
            break_count: vec![0; formula.num_vars()],
            num_true: vec![0; m],
            true_xor: vec![0; m],
            falsified: Vec::new(),
            position: vec![NOT_FALSIFIED; m],
            flips: 0,
            weights: Vec::with_capacity(formula.max_clause_width().unwrap_or(0)),
        };
        for c in 0..m {
            if formula.is_tautology(c) {
                state.num_true[c] = 1;
                continue;
            }
            let mut count = 0;
            let mut xor = 0;
            for &l in problem.clause_lits(c) {
                if state.assignment.lit_value(l) {
                    count += 1;
                    xor ^= l.var().index();
                }
            }
            state.num_true[c] = count;
            state.true_xor[c] = xor;
            match count {
                0 => state.push_falsified(c as u32),
                1 => state.break_count[Var::new(xor).slot()] += 1,
                _ => {}
            }
        }
        state
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    pub fn flips(&self) -> u64 {
        self.flips
    }

    #[inline]
    pub fn break_count(&self, var: Var) -> u32 {
        self.break_count[var.slot()]
    }

    pub fn falsified(&self) -> &[u32] {
        &self.falsified
    }

    pub fn is_falsified(&self, clause: usize) -> bool {
        self.position[clause] != NOT_FALSIFIED
    }

    pub fn satisfied_literals(&self, clause: usize) -> u32 {
        self.num_true[clause]
    }

    pub fn sorted_falsified(&self) -> Vec<u32> {
        let mut f = self.falsified.clone();
        f.sort_unstable();
        f
    }

    #[inline]
    fn push_falsified(&mut self, c: u32) {
        self.position[c as usize] = self.falsified.len() as u32;
        self.falsified.push(c);
    }

    #[inline]
    fn remove_falsified(&mut self, c: u32) {
        let pos = self.position[c as usize] as usize;
        let last = self.falsified.pop().expect("registry holds c");
        if last != c {
            self.falsified[pos] = last;
            self.position[last as usize] = pos as u32;
        }
        self.position[c as usize] = NOT_FALSIFIED;
    }

    /// Toggles `var` and updates all counts through the occurrence index.
    pub fn flip(&mut self, var: Var) {
        self.assignment.flip(var);
        self.flips += 1;
        let v = var.index();
        let now_true = self.assignment.true_lit(var);
        let problem = self.problem;

        for &c in problem.occurrences(now_true) {
            let ci = c as usize;
            match self.num_true[ci] {
                0 => {
                    self.remove_falsified(c);
                    self.break_count[var.slot()] += 1;
                }
                1 => self.break_count[Var::new(self.true_xor[ci]).slot()] -= 1,
                _ => {}
            }
            self.num_true[ci] += 1;
            self.true_xor[ci] ^= v;
        }
        for &c in problem.occurrences(!now_true) {
            let ci = c as usize;
            self.num_true[ci] -= 1;
            self.true_xor[ci] ^= v;
            match self.num_true[ci] {
                0 => {
                    self.push_falsified(c);
                    self.break_count[var.slot()] -= 1;
                }
                1 => self.break_count[Var::new(self.true_xor[ci]).slot()] += 1,
                _ => {}
            }
        }
    }

    /// Selection probabilities over the literals of a falsified clause,
    /// in clause order.
    pub fn flip_distribution(
        &self,
        clause: usize,
        scoring: &ScoringFunction,
    ) -> Result<Vec<f64>, NotFalsified> {
        if !self.is_falsified(clause) {
            return Err(NotFalsified(clause));
        }
        let table = scoring.table(self.problem.max_break);
        let weights: Vec<f64> = self
            .problem
            .clause_lits(clause)
            .iter()
            .map(|l| table[self.break_count(l.var()) as usize])
            .collect();
        let total: f64 = weights.iter().sum();
        Ok(weights.into_iter().map(|w| w / total).collect())
    }

    /// Algorithm 1 main loop. `table` is `f(0..=max_break)`.
    fn search(&mut self, limits: RunLimits, table: &[f64], rng: &mut SeededRng) -> RunStatus {
        let mut step = 0u64;
        while !self.falsified.is_empty() {
            if step == limits.max_flips {
                return RunStatus::FlipsExhausted;
            }
            if step & DEADLINE_CHECK_MASK == DEADLINE_CHECK_MASK {
                if let Some(deadline) = limits.deadline {
                    if Instant::now() >= deadline {
                        return RunStatus::FlipsExhausted;
                    }
                }
            }
            step += 1;
            let c = self.falsified[rng.random_range(0..self.falsified.len())] as usize;
            let var = self.sample_literal(c, table, rng);
            self.flip(var);
        }
        RunStatus::Solved
    }

    #[inline]
    fn sample_literal(&mut self, clause: usize, table: &[f64], rng: &mut SeededRng) -> Var {
        let lits = self.problem.clause_lits(clause);
        self.weights.clear();
        let mut total = 0.0;
        for l in lits {
            let w = table[self.break_count[l.var().slot()] as usize];
            total += w;
            self.weights.push(total);
        }
        let r = rng.random::<f64>() * total;
        let j = self.weights.iter().position(|&cum| r < cum).unwrap_or(lits.len() - 1);
        lits[j].var()
    }

    /// Break values and falsified registry computed directly from the definition.
    pub fn recount(&self) -> Recount {
        let formula = self.problem.formula;
        let mut break_count = vec![0u32; formula.num_vars()];
        let mut falsified = Vec::new();
        for (id, c) in formula.clauses().iter().enumerate() {
            if formula.is_tautology(id) {
                continue;
            }
            let true_lits: Vec<Lit> =
                c.lits().iter().copied().filter(|&l| self.assignment.lit_value(l)).collect();
            match true_lits.as_slice() {
                [] => falsified.push(id as u32),
                [only] => break_count[only.var().slot()] += 1,
                _ => {}
            }
        }
        Recount { break_count, falsified }
    }

    pub fn is_consistent(&self) -> bool {
        let r = self.recount();
        r.break_count == self.break_count && r.falsified == self.sorted_falsified()
    }
}

/// One probSAT run with a fresh generator seeded from `seed`.
pub fn probsat_run(
    formula: &Formula,
    max_flips: u64,
    seed: u64,
    scoring: &ScoringFunction,
) -> RunResult {
    let problem = SlsProblem::new(formula);
    let mut rng = seeded(seed);
    problem.run(RunLimits { max_flips, deadline: None, seed_label: seed }, scoring, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Clause;

    fn formula(n: usize, clauses: &[&[i64]]) -> Formula {
        Formula::new(n, clauses.iter().map(|c| Clause::from_dimacs(c)).collect()).unwrap()
    }

    #[test]
    fn unit_formula_registry_matches_assignment() {
        let f = formula(1, &[&[1]]);
        let p = SlsProblem::new(&f);
        for seed in 0..8 {
            let s = SlsState::new(&p, seed);
            let expected: Vec<u32> = if s.assignment().value(Var::new(1)) { vec![] } else { vec![0] };
            assert_eq!(s.falsified(), expected.as_slice());
        }
    }

    #[test]
    fn initial_assignment_is_seed_determined() {
        let f = formula(40, &[&[1, 2, 3]]);
        let p = SlsProblem::new(&f);
        assert_eq!(SlsState::new(&p, 7).assignment(), SlsState::new(&p, 7).assignment());
        assert_ne!(SlsState::new(&p, 7).assignment(), SlsState::new(&p, 8).assignment());
    }

    #[test]
    fn break_values_by_definition() {
        let f = formula(2, &[&[1, 2]]);
        let p = SlsProblem::new(&f);
        let s = SlsState::from_assignment(&p, Assignment::new(vec![true, false]));
        assert_eq!(s.break_count(Var::new(1)), 1);
        assert_eq!(s.break_count(Var::new(2)), 0);
        let s = SlsState::from_assignment(&p, Assignment::new(vec![true, true]));
        assert_eq!(s.break_count(Var::new(1)), 0);
    }

    #[test]
    fn distribution_examples() {
        // (x1 ∨ x2) is falsified and (¬x2 ∨ x3) is held only by ¬x2: breaks (0, 1)
        let f = formula(3, &[&[1, 2], &[-2, 3]]);
        let p = SlsProblem::new(&f);
        let s = SlsState::from_assignment(&p, Assignment::new(vec![false, false, false]));
        assert_eq!((s.break_count(Var::new(1)), s.break_count(Var::new(2))), (0, 1));
        let poly = ScoringFunction::poly(1.0, 1.0).unwrap();
        let d = s.flip_distribution(0, &poly).unwrap();
        assert!((d[0] - 2.0 / 3.0).abs() < 1e-12 && (d[1] - 1.0 / 3.0).abs() < 1e-12);
        let exp = ScoringFunction::exp(2.0).unwrap();
        let d = s.flip_distribution(0, &exp).unwrap();
        assert!((d[0] - 2.0 / 3.0).abs() < 1e-12 && (d[1] - 1.0 / 3.0).abs() < 1e-12);

        let g = formula(3, &[&[1, 2, 3]]);
        let q = SlsProblem::new(&g);
        let s = SlsState::from_assignment(&q, Assignment::all(3, false));
        let d = s.flip_distribution(0, &exp).unwrap();
        assert!(d.iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-12));

        assert_eq!(s.flip_distribution(0, &exp).map(|_| ()), Ok(()));
        let s = SlsState::from_assignment(&q, Assignment::all(3, true));
        assert_eq!(s.flip_distribution(0, &exp), Err(NotFalsified(0)));
    }

    #[test]
    fn flip_is_an_involution() {
        let f = formula(4, &[&[1, -2, 3], &[-1, 2, 4], &[2, -3, -4], &[1, 3, 4]]);
        let p = SlsProblem::new(&f);
        let s0 = SlsState::new(&p, 3);
        let mut s = s0.clone();
        s.flip(Var::new(2));
        s.flip(Var::new(2));
        assert_eq!(s, s0);
    }

    #[test]
    fn flipping_unit_clause_empties_registry() {
        let f = formula(1, &[&[1]]);
        let p = SlsProblem::new(&f);
        let mut s = SlsState::from_assignment(&p, Assignment::all(1, false));
        assert_eq!(s.falsified(), &[0]);
        s.flip(Var::new(1));
        assert!(s.falsified().is_empty());
        assert!(s.is_consistent());
    }

    #[test]
    fn tautologies_never_falsified() {
        let f = formula(2, &[&[1, -1], &[1, 2]]);
        let p = SlsProblem::new(&f);
        let mut s = SlsState::from_assignment(&p, Assignment::all(2, false));
        assert_eq!(s.falsified(), &[1]);
        s.flip(Var::new(1));
        s.flip(Var::new(2));
        assert!(s.is_consistent());
    }

    #[test]
    fn runs_on_tiny_formulas() {
        let poly = ScoringFunction::default_for_width(3);
        let r = probsat_run(&formula(1, &[&[1]]), 10, 5, &poly);
        assert!(r.solved() && r.flips <= 1);
        let r = probsat_run(&formula(1, &[&[1], &[-1]]), 100, 5, &poly);
        assert_eq!(r.status, RunStatus::FlipsExhausted);
        assert_eq!(r.flips, 100);
        let r = probsat_run(&formula(2, &[&[]]), 100, 5, &poly);
        assert_eq!(r.status, RunStatus::FlipsExhausted);
    }

    #[test]
    fn zero_flip_budget_only_checks_initial_assignment() {
        let f = formula(2, &[&[1, 2], &[-1, -2]]);
        for seed in 0..10 {
            let r = probsat_run(&f, 0, seed, &ScoringFunction::exp(3.0).unwrap());
            assert_eq!(r.flips, 0);
        }
    }

    #[test]
    fn scoring_validation() {
        assert_eq!(ScoringFunction::exp(1.0), Err(ScoringError::ExpBase(1.0)));
        assert_eq!(ScoringFunction::poly(0.0, 2.0), Err(ScoringError::Epsilon(0.0)));
        assert_eq!(ScoringFunction::poly(0.9, 0.0), Err(ScoringError::PolyExponent(0.0)));
        assert!(ScoringFunction::poly(0.9, 2.06).is_ok());
    }
}
