//! Random k-SAT generators: uniform and planted (hidden-solution).

use rand::seq::index::sample;
use rand::Rng;
use thiserror::Error;

use crate::cnf::{Assignment, Clause, Formula, Lit, Var};
use crate::rng::{seeded, SeededRng};

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("clause width {k} exceeds variable count {n}")]
    WidthExceedsVars { k: usize, n: usize },
    #[error("clause width must be at least 2, got {0}")]
    WidthTooSmall(usize),
    #[error("planted assignment has {got} variables, expected {n}")]
    PlantedLength { got: usize, n: usize },
    #[error("uniform generation does not take a planted assignment")]
    UnexpectedPlanted,
}

/// Number of clauses, either explicit or as a clause-to-variable ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClauseCount {
    Ratio(f64),
    Exact(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    pub k: usize,
    pub clauses: ClauseCount,
    pub planted: Option<Assignment>,
    pub seed: u64,
}

impl GenSpec {
    pub fn uniform(n: usize, k: usize, ratio: f64, seed: u64) -> Self {
        GenSpec { n, k, clauses: ClauseCount::Ratio(ratio), planted: None, seed }
    }

    pub fn with_clauses(n: usize, k: usize, m: usize, seed: u64) -> Self {
        GenSpec { n, k, clauses: ClauseCount::Exact(m), planted: None, seed }
    }

    pub fn num_clauses(&self) -> usize {
        match self.clauses {
            ClauseCount::Exact(m) => m,
            ClauseCount::Ratio(r) => (r * self.n as f64).round() as usize,
        }
    }

    fn check(&self) -> Result<(), GenError> {
        if self.k < 2 {
            return Err(GenError::WidthTooSmall(self.k));
        }
        if self.k > self.n {
            return Err(GenError::WidthExceedsVars { k: self.k, n: self.n });
        }
        if let Some(p) = &self.planted {
            if p.num_vars() != self.n {
                return Err(GenError::PlantedLength { got: p.num_vars(), n: self.n });
            }
        }
        Ok(())
    }
}

/// Threshold-region clause-to-variable ratio for uniform k-SAT.
pub fn default_ratio(k: usize) -> Option<f64> {
    match k {
        3 => Some(4.267),
        5 => Some(21.117),
        7 => Some(87.79),
        _ => None,
    }
}

fn random_vars(rng: &mut SeededRng, n: usize, k: usize) -> Vec<Var> {
    sample(rng, n, k).into_iter().map(Var::from_slot).collect()
}

/// Uniform random k-SAT: `k` distinct variables per clause, fair polarities.
/// Duplicate clauses are allowed.
pub fn gen_uniform(spec: &GenSpec) -> Result<Formula, GenError> {
    spec.check()?;
    if spec.planted.is_some() {
        return Err(GenError::UnexpectedPlanted);
    }
    let mut rng = seeded(spec.seed);
    let clauses = (0..spec.num_clauses())
        .map(|_| {
            random_vars(&mut rng, spec.n, spec.k)
                .into_iter()
                .map(|v| Lit::new(v, rng.random::<bool>()))
                .collect::<Clause>()
        })
        .collect();
    Ok(Formula::new(spec.n, clauses).expect("variables drawn from 1..=n"))
}

/// Planted k-SAT by rejection: polarity vectors that falsify the hidden
/// assignment are redrawn. Without `spec.planted`, the hidden assignment is
/// drawn from the seed first.
pub fn gen_planted(spec: &GenSpec) -> Result<(Formula, Assignment), GenError> {
    spec.check()?;
    let mut rng = seeded(spec.seed);
    let hidden = match &spec.planted {
        Some(p) => p.clone(),
        None => Assignment::new((0..spec.n).map(|_| rng.random::<bool>()).collect()),
    };
    let mut clauses = Vec::with_capacity(spec.num_clauses());
    for _ in 0..spec.num_clauses() {
        let vars = random_vars(&mut rng, spec.n, spec.k);
        loop {
            let lits: Vec<Lit> = vars.iter().map(|&v| Lit::new(v, rng.random::<bool>())).collect();
            if lits.iter().any(|&l| hidden.lit_value(l)) {
                clauses.push(Clause::new(lits));
                break;
            }
        }
    }
    let formula = Formula::new(spec.n, clauses).expect("variables drawn from 1..=n");
    debug_assert!(formula.is_satisfied_by(&hidden));
    Ok((formula, hidden))
}
