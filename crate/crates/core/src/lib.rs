//! Hybrid SAT solving: probSAT local search seeded with clauses mined by CDCL
//! or derived by resolution, plus instance generators, oracle clause models
//! and benchmark statistics.

pub mod cdcl;
pub mod cnf;
pub mod gapsat;
pub mod gen;
pub mod harness;
pub mod oracle;
pub mod resolution;
pub mod rng;
pub mod sls;
pub mod stats;

pub use cnf::{parse_dimacs, parse_dimacs_str, Assignment, Clause, Formula, Lit, Var};
pub use gapsat::{run_gapsat, select_strategy, GapsatConfig, SolveResult, Strategy, Track};
pub use sls::{probsat_run, ScoringFunction, ScoringKind};
pub use stats::{Currency, TrialRecord};
pub use rng::{seeded, SeededRng};
