//! Fixed instances shared by the criterion benchmarks.

use gapsat::gen::{default_ratio, gen_planted, gen_uniform, GenSpec};
use gapsat::Formula;

/// Planted 3-SAT near the threshold; probSAT solves it in thousands of flips.
pub fn planted_k3(n: usize, seed: u64) -> Formula {
    gen_planted(&GenSpec::uniform(n, 3, 4.2, seed)).expect("valid spec").0
}

/// Uniform k-SAT at the threshold ratio for `k`.
pub fn threshold(n: usize, k: usize, seed: u64) -> Formula {
    let ratio = default_ratio(k).expect("tabulated width");
    gen_uniform(&GenSpec::uniform(n, k, ratio, seed)).expect("valid spec")
}
