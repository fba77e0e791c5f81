//! The GapSAT pipeline: dispatch on variable count and clause width, a short
//! probSAT burst, CDCL clause mining, then probSAT on the augmented formula.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cdcl::{cdcl_solve_and_mine, filter_learned, FilterMode, MiningBudget, MiningStatus};
use crate::cnf::{Assignment, Clause, Formula, FormulaError};
use crate::rng::seeded;
use crate::sls::{RunLimits, ScoringFunction, SlsProblem};

/// Formulas with more variables than this skip mining.
pub const PLAIN_SLS_ABOVE: usize = 9000;
pub const DEFAULT_MINER_SECONDS: f64 = 300.0;
pub const DEFAULT_WALL_BUDGET: f64 = 5000.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Track {
    PlainSls,
    K3,
    K5,
    K7,
    Fallback,
}

impl Track {
    pub fn mines(self) -> bool {
        matches!(self, Track::K3 | Track::K5 | Track::K7)
    }

    pub fn name(self) -> &'static str {
        match self {
            Track::PlainSls => "plain-sls",
            Track::K3 => "k3",
            Track::K5 => "k5",
            Track::K7 => "k7",
            Track::Fallback => "fallback",
        }
    }
}

impl fmt::Display for Track {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub track: Track,
    pub initial_flips: u64,
    pub miner_seconds: f64,
    pub width_limit: usize,
    pub count_cap_percent: Option<f64>,
    pub early_stop: bool,
}

impl Strategy {
    fn plain(track: Track) -> Self {
        Strategy {
            track,
            initial_flips: 0,
            miner_seconds: 0.0,
            width_limit: 0,
            count_cap_percent: None,
            early_stop: false,
        }
    }

    fn mining(track: Track, initial_flips: u64, width_limit: usize, cap: Option<f64>) -> Self {
        Strategy {
            track,
            initial_flips,
            miner_seconds: DEFAULT_MINER_SECONDS,
            width_limit,
            count_cap_percent: cap,
            early_stop: cap.is_some(),
        }
    }

    /// `floor(percent * m / 100)`.
    pub fn count_cap(&self, num_clauses: usize) -> Option<usize> {
        self.count_cap_percent.map(|p| (p * num_clauses as f64 / 100.0).floor() as usize)
    }
}

pub fn select_strategy(formula: &Formula) -> Strategy {
    if formula.num_vars() > PLAIN_SLS_ABOVE {
        return Strategy::plain(Track::PlainSls);
    }
    match formula.max_clause_width() {
        Ok(3) => Strategy::mining(Track::K3, 35_000_000, 4, None),
        Ok(5) => Strategy::mining(Track::K5, 15_000_000, 8, Some(5.0)),
        Ok(7) => Strategy::mining(Track::K7, 6_000_000, 9, Some(1.0)),
        _ => Strategy::plain(Track::Fallback),
    }
}

/// Replacement for the strategy's count cap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapOverride {
    None,
    Percent(f64),
}

impl FromStr for CapOverride {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("none") {
            return Ok(CapOverride::None);
        }
        let number = s.strip_suffix('%').unwrap_or(s);
        match number.trim().parse::<f64>() {
            Ok(p) if p >= 0.0 && p.is_finite() => Ok(CapOverride::Percent(p)),
            _ => Err(format!("expected `none` or a percentage like `5%`, got `{s}`")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapsatConfig {
    /// Miner wall budget; the strategy's 300 s when unset.
    pub miner_seconds: Option<f64>,
    /// Conflict budget for the miner, for reproducible runs.
    pub miner_conflicts: Option<u64>,
    pub width_limit: Option<usize>,
    pub cap: Option<CapOverride>,
    pub initial_flips: Option<u64>,
    /// Flip budget of the final probSAT phase; unbounded when unset.
    pub final_max_flips: Option<u64>,
    pub scoring: Option<ScoringFunction>,
}

impl GapsatConfig {
    /// The dispatched strategy with this config's overrides applied.
    pub fn strategy_for(&self, formula: &Formula) -> Strategy {
        let mut s = select_strategy(formula);
        if !s.track.mines() {
            return s;
        }
        if let Some(secs) = self.miner_seconds {
            s.miner_seconds = secs;
        }
        if let Some(w) = self.width_limit {
            s.width_limit = w;
        }
        if let Some(flips) = self.initial_flips {
            s.initial_flips = flips;
        }
        match self.cap {
            Some(CapOverride::None) => s.count_cap_percent = None,
            Some(CapOverride::Percent(p)) => s.count_cap_percent = Some(p),
            None => {}
        }
        s.early_stop = s.count_cap_percent.is_some();
        s
    }

    pub fn scoring_for(&self, formula: &Formula) -> ScoringFunction {
        self.scoring
            .unwrap_or_else(|| ScoringFunction::default_for_width(formula.max_clause_width().unwrap_or(0)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Sat,
    Unsat,
    Unknown,
}

impl Status {
    pub fn competition_line(self) -> &'static str {
        match self {
            Status::Sat => "s SATISFIABLE",
            Status::Unsat => "s UNSATISFIABLE",
            Status::Unknown => "s UNKNOWN",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Sat => 10,
            Status::Unsat => 20,
            Status::Unknown => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    InitialSls,
    Miner,
    FinalSls,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::InitialSls => "initial-sls",
            Phase::Miner => "miner",
            Phase::FinalSls => "final-sls",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PhaseAccount {
    pub ran: bool,
    pub seconds: f64,
    pub flips: u64,
    pub conflicts: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveResult {
    pub status: Status,
    #[serde(skip)]
    pub model: Option<Assignment>,
    pub phase_solved: Option<Phase>,
    pub strategy: Strategy,
    pub initial_sls: PhaseAccount,
    pub miner: PhaseAccount,
    pub final_sls: PhaseAccount,
    pub clauses_mined: usize,
    pub clauses_added: usize,
}

impl SolveResult {
    pub fn total_flips(&self) -> u64 {
        self.initial_sls.flips + self.final_sls.flips
    }

    pub fn total_seconds(&self) -> f64 {
        self.initial_sls.seconds + self.miner.seconds + self.final_sls.seconds
    }

    /// Everything except wall-clock timings, on one line.
    pub fn fingerprint(&self) -> String {
        let model = match &self.model {
            Some(m) => m.values().iter().map(|&b| if b { '1' } else { '0' }).collect(),
            None => "-".to_string(),
        };
        format!(
            "status={:?} track={} solved={} initial.ran={} initial.flips={} miner.ran={} \
             miner.conflicts={} final.ran={} final.flips={} mined={} added={} model={}",
            self.status,
            self.strategy.track,
            self.phase_solved.map_or("none", Phase::name),
            self.initial_sls.ran,
            self.initial_sls.flips,
            self.miner.ran,
            self.miner.conflicts,
            self.final_sls.ran,
            self.final_sls.flips,
            self.clauses_mined,
            self.clauses_added,
            model
        )
    }

    /// `c phases key=value ...` accounting line.
    pub fn phase_line(&self) -> String {
        format!(
            "c phases track={} solved={} initial_seconds={:.3} initial_flips={} miner_seconds={:.3} \
             miner_conflicts={} final_seconds={:.3} final_flips={} mined={} added={}",
            self.strategy.track,
            self.phase_solved.map_or("none", Phase::name),
            self.initial_sls.seconds,
            self.initial_sls.flips,
            self.miner.seconds,
            self.miner.conflicts,
            self.final_sls.seconds,
            self.final_sls.flips,
            self.clauses_mined,
            self.clauses_added
        )
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GapsatError {
    #[error("wall budget must be positive and finite, got {0}")]
    InvalidBudget(f64),
}

/// `F ∪ S` with duplicates of existing clauses dropped.
pub fn augment(formula: &Formula, clauses: &[Clause]) -> Result<Formula, FormulaError> {
    formula.augment(clauses.iter().cloned())
}

fn remaining(deadline: Instant) -> f64 {
    deadline.saturating_duration_since(Instant::now()).as_secs_f64()
}

/// Runs the full pipeline within `wall_budget_seconds`.
///
/// All randomness comes from one generator seeded with `seed`: the initial
/// probSAT phase draws from it, the miner seed is drawn next, and the final
/// phase continues the same stream.
pub fn run_gapsat(
    formula: &Formula,
    wall_budget_seconds: f64,
    seed: u64,
    config: &GapsatConfig,
) -> Result<SolveResult, GapsatError> {
    if !(wall_budget_seconds > 0.0 && wall_budget_seconds.is_finite()) {
        return Err(GapsatError::InvalidBudget(wall_budget_seconds));
    }
    let deadline = Instant::now() + Duration::from_secs_f64(wall_budget_seconds);
    let strategy = config.strategy_for(formula);
    let scoring = config.scoring_for(formula);
    let mut rng = seeded(seed);
    let mut result = SolveResult {
        status: Status::Unknown,
        model: None,
        phase_solved: None,
        strategy,
        initial_sls: PhaseAccount::default(),
        miner: PhaseAccount::default(),
        final_sls: PhaseAccount::default(),
        clauses_mined: 0,
        clauses_added: 0,
    };
    let problem = SlsProblem::new(formula);
    let mut target = None;

    if strategy.track.mines() {
        log::debug!("{}: initial probSAT, {} flips", strategy.track, strategy.initial_flips);
        let run = problem.run(
            RunLimits { max_flips: strategy.initial_flips, deadline: Some(deadline), seed_label: seed },
            &scoring,
            &mut rng,
        );
        result.initial_sls = PhaseAccount { ran: true, seconds: run.wall_seconds, flips: run.flips, conflicts: 0 };
        if let Some(model) = run.model {
            return Ok(finish(result, formula, model, Phase::InitialSls));
        }

        let miner_seed: u64 = rng.random();
        let cap = strategy.count_cap(formula.num_clauses());
        let budget = MiningBudget {
            wall_seconds: strategy.miner_seconds.min(remaining(deadline)),
            conflict_limit: config.miner_conflicts,
            width_limit: strategy.width_limit,
            count_cap: cap,
        };
        log::debug!("mining: width <= {}, cap {:?}, {:.1} s", budget.width_limit, cap, budget.wall_seconds);
        let mined = cdcl_solve_and_mine(formula, &budget, miner_seed);
        result.miner =
            PhaseAccount { ran: true, seconds: mined.seconds, flips: 0, conflicts: mined.conflicts };
        match mined.status {
            MiningStatus::Sat => {
                let model = mined.model.expect("sat outcome carries a model");
                return Ok(finish(result, formula, model, Phase::Miner));
            }
            MiningStatus::Unsat => {
                result.status = Status::Unsat;
                result.phase_solved = Some(Phase::Miner);
                return Ok(result);
            }
            MiningStatus::BudgetExhausted => {}
        }
        let exported =
            filter_learned(&mined.learned, strategy.width_limit, cap, FilterMode::Chronological, 0);
        result.clauses_mined = exported.len();
        let augmented = augment(formula, &exported).expect("learned clauses use the formula's variables");
        result.clauses_added = augmented.num_clauses() - formula.num_clauses();
        target = Some(augmented);
    }

    let final_formula = target.as_ref().unwrap_or(formula);
    let final_problem;
    let problem = if target.is_some() {
        final_problem = SlsProblem::new(final_formula);
        &final_problem
    } else {
        &problem
    };
    if remaining(deadline) > 0.0 {
        let run = problem.run(
            RunLimits {
                max_flips: config.final_max_flips.unwrap_or(u64::MAX),
                deadline: Some(deadline),
                seed_label: seed,
            },
            &scoring,
            &mut rng,
        );
        result.final_sls = PhaseAccount { ran: true, seconds: run.wall_seconds, flips: run.flips, conflicts: 0 };
        if let Some(model) = run.model {
            return Ok(finish(result, formula, model, Phase::FinalSls));
        }
    }
    Ok(result)
}

fn finish(mut result: SolveResult, formula: &Formula, model: Assignment, phase: Phase) -> SolveResult {
    assert!(formula.is_satisfied_by(&model), "{} returned a non-model", phase.name());
    result.status = Status::Sat;
    result.model = Some(model);
    result.phase_solved = Some(phase);
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{gen_planted, gen_uniform, GenSpec};

    fn formula_with(n: usize, width: usize) -> Formula {
        let clause: Vec<i64> = (1..=width as i64).collect();
        Formula::new(n, vec![Clause::from_dimacs(&clause)]).unwrap()
    }

    #[test]
    fn dispatch_examples() {
        assert_eq!(select_strategy(&formula_with(10_000, 3)).track, Track::PlainSls);
        let s = select_strategy(&formula_with(500, 5));
        assert_eq!(
            s,
            Strategy {
                track: Track::K5,
                initial_flips: 15_000_000,
                miner_seconds: 300.0,
                width_limit: 8,
                count_cap_percent: Some(5.0),
                early_stop: true,
            }
        );
        let s = select_strategy(&formula_with(200, 7));
        assert_eq!((s.track, s.initial_flips, s.width_limit, s.count_cap_percent), (Track::K7, 6_000_000, 9, Some(1.0)));
        let s = select_strategy(&formula_with(50, 3));
        assert_eq!((s.initial_flips, s.width_limit, s.count_cap_percent, s.early_stop), (35_000_000, 4, None, false));
        assert_eq!(select_strategy(&formula_with(50, 4)).track, Track::Fallback);
        assert_eq!(select_strategy(&Formula::new(5, vec![]).unwrap()).track, Track::Fallback);
    }

    #[test]
    fn cap_arithmetic() {
        let s = select_strategy(&formula_with(500, 5));
        assert_eq!(s.count_cap(1000), Some(50));
        assert_eq!(s.count_cap(999), Some(49));
        assert_eq!(select_strategy(&formula_with(200, 7)).count_cap(4321), Some(43));
        assert_eq!(select_strategy(&formula_with(200, 3)).count_cap(4321), None);
    }

    #[test]
    fn cap_override_parsing() {
        assert_eq!("none".parse::<CapOverride>(), Ok(CapOverride::None));
        assert_eq!("5%".parse::<CapOverride>(), Ok(CapOverride::Percent(5.0)));
        assert_eq!("0.5".parse::<CapOverride>(), Ok(CapOverride::Percent(0.5)));
        assert!("-1%".parse::<CapOverride>().is_err());
    }

    #[test]
    fn overrides_apply_to_mining_tracks_only() {
        let config = GapsatConfig {
            width_limit: Some(6),
            cap: Some(CapOverride::None),
            initial_flips: Some(10),
            ..Default::default()
        };
        let s = config.strategy_for(&formula_with(100, 5));
        assert_eq!((s.width_limit, s.count_cap_percent, s.early_stop, s.initial_flips), (6, None, false, 10));
        let s = config.strategy_for(&formula_with(100, 4));
        assert_eq!(s, Strategy::plain(Track::Fallback));
    }

    #[test]
    fn trivial_formula_solved_initially() {
        let f = formula_with(3, 3);
        let r = run_gapsat(&f, 10.0, 1, &GapsatConfig::default()).unwrap();
        assert_eq!(r.status, Status::Sat);
        assert_eq!(r.phase_solved, Some(Phase::InitialSls));
        assert_eq!(r.clauses_added, 0);
        assert!(!r.miner.ran);
    }

    #[test]
    fn unsat_reported_by_miner() {
        // every sign pattern over x1..x3 is excluded
        let mut clauses = Vec::new();
        for mask in 0..8i64 {
            clauses.push(Clause::from_dimacs(&[
                if mask & 1 == 0 { 1 } else { -1 },
                if mask & 2 == 0 { 2 } else { -2 },
                if mask & 4 == 0 { 3 } else { -3 },
            ]));
        }
        let f = Formula::new(10, clauses).unwrap();
        let config = GapsatConfig { initial_flips: Some(1000), ..Default::default() };
        let r = run_gapsat(&f, 10.0, 3, &config).unwrap();
        assert_eq!(r.status, Status::Unsat);
        assert_eq!(r.phase_solved, Some(Phase::Miner));
        assert!(r.model.is_none());
    }

    #[test]
    fn k5_additions_respect_cap() {
        let f = gen_uniform(&GenSpec::with_clauses(60, 5, 1000, 4)).unwrap();
        let config = GapsatConfig {
            initial_flips: Some(0),
            miner_conflicts: Some(2000),
            final_max_flips: Some(1000),
            ..Default::default()
        };
        let r = run_gapsat(&f, 30.0, 9, &config).unwrap();
        assert_eq!(r.strategy.track, Track::K5);
        assert!(r.clauses_added <= 50, "{}", r.clauses_added);
    }

    #[test]
    fn mined_clauses_reach_final_phase() {
        let (f, _) = gen_planted(&GenSpec::uniform(150, 3, 4.2, 5)).unwrap();
        let config = GapsatConfig {
            initial_flips: Some(0),
            miner_conflicts: Some(50),
            final_max_flips: Some(5_000_000),
            ..Default::default()
        };
        let r = run_gapsat(&f, 60.0, 2, &config).unwrap();
        assert!(r.miner.ran);
        if r.phase_solved == Some(Phase::FinalSls) {
            assert!(r.final_sls.ran);
            assert!(f.is_satisfied_by(r.model.as_ref().unwrap()));
        }
        assert!(r.clauses_mined >= r.clauses_added);
    }

    #[test]
    fn fingerprint_is_reproducible() {
        let (f, _) = gen_planted(&GenSpec::uniform(80, 3, 4.2, 8)).unwrap();
        let config = GapsatConfig {
            initial_flips: Some(200),
            miner_conflicts: Some(30),
            final_max_flips: Some(2_000_000),
            ..Default::default()
        };
        let a = run_gapsat(&f, 60.0, 5, &config).unwrap();
        let b = run_gapsat(&f, 60.0, 5, &config).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert!(a.phase_line().starts_with("c phases track=k3"));
    }

    #[test]
    fn invalid_budget() {
        let f = formula_with(3, 3);
        assert_eq!(run_gapsat(&f, 0.0, 0, &GapsatConfig::default()), Err(GapsatError::InvalidBudget(0.0)));
        assert!(run_gapsat(&f, f64::NAN, 0, &GapsatConfig::default()).is_err());
    }
}
