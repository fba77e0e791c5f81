//! Brute-force helpers for formulas with at most 20 variables.
#![allow(dead_code)]

use gapsat::{Assignment, Clause, Formula};

/// Positive and negative literal masks of a clause.
fn masks(c: &Clause) -> (u32, u32) {
    let mut pos = 0u32;
    let mut neg = 0u32;
    for l in c.lits() {
        let bit = 1u32 << l.var().slot();
        if l.is_positive() {
            pos |= bit;
        } else {
            neg |= bit;
        }
    }
    (pos, neg)
}

fn satisfies(masks: &[(u32, u32)], x: u32) -> bool {
    masks.iter().all(|&(p, n)| x & p != 0 || !x & n != 0)
}

/// All models as bitmasks (bit i = variable i + 1), ascending.
pub fn solutions(f: &Formula) -> Vec<u32> {
    assert!(f.num_vars() <= 20, "enumeration is for tiny formulas");
    let ms: Vec<_> = f.clauses().iter().map(masks).collect();
    (0..1u32 << f.num_vars()).filter(|&x| satisfies(&ms, x)).collect()
}

pub fn is_satisfiable(f: &Formula) -> bool {
    let ms: Vec<_> = f.clauses().iter().map(masks).collect();
    (0..1u32 << f.num_vars()).any(|x| satisfies(&ms, x))
}

/// Whether every model of `f` satisfies `c`, i.e. `F ∧ ¬C` is unsatisfiable.
pub fn implies(f: &Formula, c: &Clause) -> bool {
    let (p, n) = masks(c);
    solutions(f).iter().all(|&x| x & p != 0 || !x & n != 0)
}

pub fn implies_all(models: &[u32], clauses: &[Clause]) -> bool {
    let ms: Vec<_> = clauses.iter().map(masks).collect();
    models.iter().all(|&x| satisfies(&ms, x))
}

pub fn to_assignment(x: u32, n: usize) -> Assignment {
    Assignment::new((0..n).map(|i| x >> i & 1 == 1).collect())
}
pub mod reference;
