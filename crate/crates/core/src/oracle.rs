//! Solution-aware clause models: backbones, deceptive and general clause
//! injection, and clause quality against a fixed solution.

use std::io::{self, Write};

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cdcl::{self, Cdcl, SearchLimits, SolveStatus};
use crate::cnf::{Assignment, Clause, Formula, Lit, Var};
use crate::rng::seeded;

/// Literals true in every model of a formula, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Backbone {
    lits: Vec<Lit>,
}

impl Backbone {
    pub fn new(mut lits: Vec<Lit>) -> Self {
        lits.sort_unstable();
        lits.dedup();
        Backbone { lits }
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
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BackboneError {
    #[error("formula is unsatisfiable")]
    Unsatisfiable,
    #[error("solver budget exhausted after confirming {confirmed} backbone literals")]
    BudgetExhausted { confirmed: usize },
}

/// Exact backbone by one solver call per candidate literal.
///
/// Candidates start as the literals of a first model; every further model
/// removes the candidates it falsifies, and each confirmed literal is added
/// as a unit to later calls. `conflicts_per_call` bounds each call.
pub fn compute_backbone(
    formula: &Formula,
    conflicts_per_call: Option<u64>,
) -> Result<Backbone, BackboneError> {
    let limits = SearchLimits { conflicts: conflicts_per_call, deadline: None };
    let model = match cdcl::solve(formula, limits, 0) {
        (SolveStatus::Sat, Some(m)) => m,
        (SolveStatus::Unsat, _) => return Err(BackboneError::Unsatisfiable),
        _ => return Err(BackboneError::BudgetExhausted { confirmed: 0 }),
    };

    let n = formula.num_vars();
    let mut candidate: Vec<Option<Lit>> =
        (0..n).map(|s| Some(model.true_lit(Var::from_slot(s)))).collect();
    let mut confirmed: Vec<Lit> = Vec::new();

    for slot in 0..n {
        let Some(lit) = candidate[slot] else { continue };
        let mut solver = Cdcl::new(formula, slot as u64 + 1);
        for &b in &confirmed {
            solver.add_clause(&Clause::new(vec![b]));
        }
        solver.add_clause(&Clause::new(vec![!lit]));
        match solver.solve(limits, |_| std::ops::ControlFlow::Continue(())) {
            SolveStatus::Unsat => confirmed.push(lit),
            SolveStatus::Sat => {
                let other = solver.model().expect("sat leaves a total assignment");
                for c in candidate.iter_mut() {
                    if c.is_some_and(|l| !other.lit_value(l)) {
                        *c = None;
                    }
                }
            }
            SolveStatus::Unknown => {
                return Err(BackboneError::BudgetExhausted { confirmed: confirmed.len() })
            }
        }
    }
    Ok(Backbone::new(confirmed))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("deceptive clauses need backbone literals over at least 3 variables, got {0}")]
    BackboneTooSmall(usize),
    #[error("general clauses need a non-empty backbone")]
    EmptyBackbone,
    #[error("general clauses need at least 3 variables, got {0}")]
    TooFewVariables(usize),
}

/// `t` clauses, each made of one backbone literal and the complements of two
/// further backbone literals, over three distinct variables. Clauses are
/// drawn independently, so duplicates are possible.
pub fn gen_deceptive(backbone: &Backbone, t: usize, seed: u64) -> Result<Vec<Clause>, ModelError> {
    let lits = backbone.lits();
    if lits.len() < 3 {
        return Err(ModelError::BackboneTooSmall(lits.len()));
    }
    let mut rng = seeded(seed);
    let mut out = Vec::with_capacity(t);
    for _ in 0..t {
        let keep = lits[rng.random_range(0..lits.len())];
        let mut picked = vec![keep];
        while picked.len() < 3 {
            let l = lits[rng.random_range(0..lits.len())];
            if picked.iter().all(|p| p.var() != l.var()) {
                picked.push(l);
            }
        }
        out.push(Clause::new(vec![keep, !picked[1], !picked[2]]));
    }
    Ok(out)
}

/// `t` clauses, each made of one backbone literal and two uniformly random
/// literals over two further distinct variables.
pub fn gen_general(
    num_vars: usize,
    backbone: &Backbone,
    t: usize,
    seed: u64,
) -> Result<Vec<Clause>, ModelError> {
    let lits = backbone.lits();
    if lits.is_empty() {
        return Err(ModelError::EmptyBackbone);
    }
    if num_vars < 3 {
        return Err(ModelError::TooFewVariables(num_vars));
    }
    let mut rng = seeded(seed);
    let mut out = Vec::with_capacity(t);
    for _ in 0..t {
        let keep = lits[rng.random_range(0..lits.len())];
        let mut picked = vec![keep];
        while picked.len() < 3 {
            let var = Var::from_slot(rng.random_range(0..num_vars));
            if picked.iter().all(|p| p.var() != var) {
                picked.push(Lit::new(var, rng.random::<bool>()));
            }
        }
        out.push(Clause::new(picked));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClauseQuality {
    #[serde(rename = "clauseId")]
    pub clause_id: usize,
    pub width: usize,
    pub correct: usize,
    pub quality: f64,
}

/// Correct-literal counts of a clause set against one solution.
#[derive(Clone, Debug, PartialEq)]
pub struct QualityReport {
    pub per_clause: Vec<ClauseQuality>,
    /// Mean of `correct / width`; NaN for an empty clause set.
    pub mean_quality: f64,
    /// Mean of `correct`; NaN for an empty clause set.
    pub mean_correct_literals: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("clause {clause_id} mentions variable {var}, beyond the solution's {num_vars} variables")]
pub struct IncompleteSolution {
    pub clause_id: usize,
    pub var: u32,
    pub num_vars: usize,
}

pub fn quality_report(clauses: &[Clause], solution: &Assignment) -> Result<QualityReport, IncompleteSolution> {
    let mut per_clause = Vec::with_capacity(clauses.len());
    for (id, c) in clauses.iter().enumerate() {
        if let Some(v) = c.max_var() {
            if v.slot() >= solution.num_vars() {
                return Err(IncompleteSolution { clause_id: id, var: v.index(), num_vars: solution.num_vars() });
            }
        }
        let correct = c.count_satisfied(solution);
        let quality = if c.is_empty() { 0.0 } else { correct as f64 / c.len() as f64 };
        per_clause.push(ClauseQuality { clause_id: id, width: c.len(), correct, quality });
    }
    let count = per_clause.len() as f64;
    let mean_quality = per_clause.iter().map(|r| r.quality).sum::<f64>() / count;
    let mean_correct_literals = per_clause.iter().map(|r| r.correct as f64).sum::<f64>() / count;
    Ok(QualityReport { per_clause, mean_quality, mean_correct_literals })
}

impl QualityReport {
    /// CSV with header `clauseId,width,correct,quality`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.per_clause {
            w.serialize(row).map_err(io::Error::other)?;
        }
        w.flush()
    }
}
