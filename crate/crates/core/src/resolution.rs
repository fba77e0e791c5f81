//! Depth-limited resolution: level-1 and level-2 resolvent pools, ternary
//! resolution to saturation, and capped sampling from a pool.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use thiserror::Error;

use crate::cnf::{resolve_unchecked, Clause, Formula, Lit, Resolvent};
use crate::rng::seeded;

/// Default number of clause pairs inspected when building a level-2 pool.
pub const DEFAULT_PAIR_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolventPool {
    pub level: u8,
    /// Sorted, deduplicated.
    pub clauses: Vec<Clause>,
    pub max_width: usize,
    /// Set when enumeration stopped at the pair budget.
    pub truncated: bool,
}

impl ResolventPool {
    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }
}

/// Literal-indexed clause list used while enumerating resolution partners.
struct Index<'a> {
    clauses: Vec<&'a Clause>,
    by_lit: HashMap<Lit, Vec<u32>>,
}

impl<'a> Index<'a> {
    fn new() -> Self {
        Index { clauses: Vec::new(), by_lit: HashMap::new() }
    }

    fn push(&mut self, c: &'a Clause) -> u32 {
        let id = self.clauses.len() as u32;
        for &l in c.lits() {
            self.by_lit.entry(l).or_default().push(id);
        }
        self.clauses.push(c);
        id
    }

    fn with(&self, lit: Lit) -> &[u32] {
        self.by_lit.get(&lit).map_or(&[], Vec::as_slice)
    }
}

fn non_tautological(formula: &Formula) -> impl Iterator<Item = &Clause> {
    formula.clauses().iter().enumerate().filter(|(id, _)| !formula.is_tautology(*id)).map(|(_, c)| c)
}

/// Every non-tautological resolvent of two original clauses (any width).
fn all_level1(formula: &Formula, width_bound: usize) -> BTreeSet<Clause> {
    let mut index = Index::new();
    for c in non_tautological(formula) {
        index.push(c);
    }
    let mut out = BTreeSet::new();
    for (i, c) in index.clauses.iter().enumerate() {
        for &l in c.lits().iter().filter(|l| l.is_positive()) {
            for &j in index.with(!l) {
                if j as usize == i {
                    continue;
                }
                if let Resolvent::Clause(r) = resolve_unchecked(c, index.clauses[j as usize], l.var()) {
                    if r.len() <= width_bound {
                        out.insert(r);
                    }
                }
            }
        }
    }
    out
}

/// Resolvents of pairs of original clauses, width at most `max_width`,
/// excluding clauses already in `formula`.
pub fn level1_resolvents(formula: &Formula, max_width: usize) -> ResolventPool {
    let originals: HashSet<&Clause> = formula.clauses().iter().collect();
    let clauses = all_level1(formula, max_width)
        .into_iter()
        .filter(|c| !originals.contains(c))
        .collect();
    ResolventPool { level: 1, clauses, max_width, truncated: false }
}

/// Level-2 pool with the default pair budget.
pub fn level2_resolvents(formula: &Formula, max_width: usize) -> ResolventPool {
    level2_resolvents_with_budget(formula, max_width, DEFAULT_PAIR_BUDGET)
}

/// Resolvents with at least one level-1 parent; the other parent is an
/// original clause or another level-1 resolvent. Excludes clauses of the
/// formula and of the level-1 pool.
///
/// A resolvent keeps every non-pivot literal of both parents, so only
/// level-1 parents of width up to `max_width + 1` can contribute.
pub fn level2_resolvents_with_budget(
    formula: &Formula,
    max_width: usize,
    pair_budget: u64,
) -> ResolventPool {
    let originals: HashSet<&Clause> = formula.clauses().iter().collect();
    let level1: Vec<Clause> = all_level1(formula, max_width + 1)
        .into_iter()
        .filter(|c| !originals.contains(c))
        .collect();
    let level1_set: HashSet<&Clause> = level1.iter().collect();

    let mut index = Index::new();
    for c in non_tautological(formula) {
        index.push(c);
    }
    let first_level1 = index.clauses.len() as u32;
    for c in &level1 {
        index.push(c);
    }

    let mut out = BTreeSet::new();
    let mut inspected = 0u64;
    let mut truncated = false;
    'outer: for d in first_level1..index.clauses.len() as u32 {
        let parent = index.clauses[d as usize];
        for &l in parent.lits() {
            for &e in index.with(!l) {
                // level-1 × level-1 pairs are visited from the smaller id only
                if e >= first_level1 && e < d {
                    continue;
                }
                if inspected == pair_budget {
                    truncated = true;
                    break 'outer;
                }
                inspected += 1;
                if let Resolvent::Clause(r) = resolve_unchecked(parent, index.clauses[e as usize], l.var()) {
                    if r.len() <= max_width && !originals.contains(&r) && !level1_set.contains(&r) {
                        out.insert(r);
                    }
                }
            }
        }
    }
    ResolventPool { level: 2, clauses: out.into_iter().collect(), max_width, truncated }
}

/// Closure of the formula's clauses of width at most 3 under resolution
/// restricted to resolvents of width at most 3. Returns only the derived
/// clauses, sorted.
pub fn ternary_saturate(formula: &Formula) -> Vec<Clause> {
    let mut known: HashSet<Clause> = HashSet::new();
    let mut store: Vec<Clause> = Vec::new();
    let mut by_lit: HashMap<Lit, Vec<u32>> = HashMap::new();
    let mut derived = Vec::new();

    let mut add = |c: Clause, store: &mut Vec<Clause>, by_lit: &mut HashMap<Lit, Vec<u32>>| -> bool {
        if !known.insert(c.clone()) {
            return false;
        }
        let id = store.len() as u32;
        for &l in c.lits() {
            by_lit.entry(l).or_default().push(id);
        }
        store.push(c);
        true
    };

    for c in non_tautological(formula).filter(|c| c.len() <= 3) {
        add(c.clone(), &mut store, &mut by_lit);
    }
    let mut next = 0;
    while next < store.len() {
        let c = store[next].clone();
        next += 1;
        for &l in c.lits() {
            let partners = by_lit.get(&!l).cloned().unwrap_or_default();
            for p in partners {
                if let Resolvent::Clause(r) = resolve_unchecked(&c, &store[p as usize], l.var()) {
                    if r.len() <= 3 && add(r.clone(), &mut store, &mut by_lit) {
                        derived.push(r);
                    }
                }
            }
        }
    }
    derived.sort();
    derived
}

/// Uniform random subset of `min(cap, |pool|)` clauses, in pool order.
pub fn sample_pool(pool: &ResolventPool, cap: usize, seed: u64) -> Vec<Clause> {
    sample_clauses(&pool.clauses, cap, seed)
}

pub fn sample_clauses(clauses: &[Clause], cap: usize, seed: u64) -> Vec<Clause> {
    let amount = cap.min(clauses.len());
    let mut picked = sample(&mut seeded(seed), clauses.len(), amount).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| clauses[i].clone()).collect()
}

/// A cap on added clauses: absolute, `m/d`, or a percentage of `m`.
/// Fractional results are floored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CapSpec {
    Absolute(usize),
    PerClauses(usize),
    Percent(f64),
}

impl CapSpec {
    pub fn resolve(self, m: usize) -> usize {
        match self {
            CapSpec::Absolute(c) => c,
            CapSpec::PerClauses(d) => m / d,
            CapSpec::Percent(p) => (p * m as f64 / 100.0).floor() as usize,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid cap {0:?}: expected a count, `m/<divisor>` or `<percent>%`")]
pub struct CapParseError(pub String);

impl FromStr for CapSpec {
    type Err = CapParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || CapParseError(s.to_string());
        let s = s.trim();
        if let Some(d) = s.strip_prefix("m/") {
            let d: usize = d.parse().map_err(|_| err())?;
            if d == 0 {
                return Err(err());
            }
            Ok(CapSpec::PerClauses(d))
        } else if let Some(p) = s.strip_suffix('%') {
            let p: f64 = p.parse().map_err(|_| err())?;
            if p.is_nan() || p < 0.0 {
                return Err(err());
            }
            Ok(CapSpec::Percent(p))
        } else {
            s.parse().map(CapSpec::Absolute).map_err(|_| err())
        }
    }
}

impl fmt::Display for CapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CapSpec::Absolute(c) => write!(f, "{c}"),
            CapSpec::PerClauses(d) => write!(f, "m/{d}"),
            CapSpec::Percent(p) => write!(f, "{p}%"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn formula(n: usize, clauses: &[&[i64]]) -> Formula {
        Formula::new(n, clauses.iter().map(|c| Clause::from_dimacs(c)).collect()).unwrap()
    }

    fn cl(v: &[i64]) -> Clause {
        Clause::from_dimacs(v)
    }

    // x = 1, y = 2, z = 3, w = 4
    #[test]
    fn level1_single_pair() {
        let pool = level1_resolvents(&formula(3, &[&[1, 2], &[-1, 3]]), 4);
        assert_eq!(pool.clauses, vec![cl(&[2, 3])]);
        assert!(level1_resolvents(&formula(3, &[&[1, 2], &[1, 3]]), 4).is_empty());
    }

    #[test]
    fn level1_filters() {
        // tautological resolvent, width filter and already-present clause
        let f = formula(5, &[&[1, 2], &[-1, -2], &[1, 3, 4], &[-1, 5, 2], &[3, 4, 5, 2]]);
        let pool = level1_resolvents(&f, 4);
        assert_eq!(
            pool.clauses,
            vec![cl(&[-1, 3, 4, 5]), cl(&[-1, 5]), cl(&[2, 5]), cl(&[-2, 3, 4])]
        );
        let narrow = level1_resolvents(&f, 2);
        assert_eq!(narrow.clauses, vec![cl(&[-1, 5]), cl(&[2, 5])]);
    }

    #[test]
    fn level2_chain() {
        let f = formula(4, &[&[1, 2], &[-1, 3], &[-3, 4]]);
        let l1 = level1_resolvents(&f, 4);
        assert_eq!(l1.clauses, vec![cl(&[-1, 4]), cl(&[2, 3])]);
        let l2 = level2_resolvents(&f, 4);
        assert!(l2.clauses.contains(&cl(&[2, 4])));
        assert!(l2.clauses.iter().all(|c| !l1.clauses.contains(c)));
    }

    #[test]
    fn level2_empty_without_level1() {
        assert!(level2_resolvents(&formula(3, &[&[1, 2], &[1, 3]]), 4).is_empty());
    }

    #[test]
    fn level2_budget_truncates() {
        let f = crate::gen::gen_uniform(&crate::gen::GenSpec::uniform(30, 3, 4.2, 5)).unwrap();
        let full = level2_resolvents(&f, 4);
        let cut = level2_resolvents_with_budget(&f, 4, 10);
        assert!(!full.truncated && cut.truncated);
        assert!(cut.clauses.iter().all(|c| full.clauses.contains(c)));
    }

    #[test]
    fn ternary_examples() {
        let f = formula(3, &[&[1, 2, 3], &[-1, 2, 3]]);
        assert_eq!(ternary_saturate(&f), vec![cl(&[2, 3])]);
        assert!(ternary_saturate(&formula(2, &[&[1, 2]])).is_empty());
    }

    #[test]
    fn ternary_is_a_fixpoint() {
        let f = crate::gen::gen_uniform(&crate::gen::GenSpec::uniform(12, 3, 4.0, 8)).unwrap();
        let derived = ternary_saturate(&f);
        let g = f.augment(derived).unwrap();
        assert!(ternary_saturate(&g).is_empty());
    }

    #[test]
    fn sampling() {
        let pool = ResolventPool {
            level: 1,
            clauses: (1..=100).map(|v| cl(&[v])).collect(),
            max_width: 4,
            truncated: false,
        };
        let small = ResolventPool { clauses: pool.clauses[..3].to_vec(), ..pool.clone() };
        assert_eq!(sample_pool(&small, 10, 1), small.clauses);
        let a = sample_pool(&pool, 10, 42);
        assert_eq!(a.len(), 10);
        assert_eq!(a, sample_pool(&pool, 10, 42));
        assert!(sample_pool(&pool, 0, 42).is_empty());
    }

    #[test]
    fn cap_parsing() {
        assert_eq!("m/10".parse::<CapSpec>().unwrap().resolve(427), 42);
        assert_eq!("5%".parse::<CapSpec>().unwrap().resolve(1000), 50);
        assert_eq!("1%".parse::<CapSpec>().unwrap().resolve(199), 1);
        assert_eq!("17".parse::<CapSpec>().unwrap().resolve(5), 17);
        assert!("m/0".parse::<CapSpec>().is_err());
        assert!("lots".parse::<CapSpec>().is_err());
    }
}
