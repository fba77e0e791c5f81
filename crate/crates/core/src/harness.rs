//! Parallel benchmark runs, PAR2 summaries and CSV output.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, Read, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{parse_dimacs, DimacsError, Formula};
use crate::gapsat::{run_gapsat, GapsatConfig, DEFAULT_WALL_BUDGET};
use crate::oracle::QualityReport;
use crate::rng::seeded;
use crate::sls::{RunLimits, ScoringFunction, SlsProblem};
use crate::stats::{
    cohens_d, paired_t_test, par2, welch_t_test, wilcoxon_signed_rank, Currency, StatsError, TTest,
    TrialRecord,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read instance {path}: {source}")]
    Instance { path: PathBuf, source: DimacsError },
    #[error("no instances given")]
    NoInstances,
    #[error("no solvers given")]
    NoSolvers,
    #[error("no seeds given")]
    NoSeeds,
    #[error("duplicate solver id `{0}`")]
    DuplicateSolver(String),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub id: String,
    pub formula: Formula,
}

pub fn load_instance(path: &Path) -> Result<Instance, HarnessError> {
    let wrap = |source| HarnessError::Instance { path: path.to_path_buf(), source };
    let file = File::open(path).map_err(|e| wrap(e.into()))?;
    let formula = parse_dimacs(BufReader::new(file)).map_err(wrap)?;
    let id = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    Ok(Instance { id, formula })
}

/// Loads every `*.cnf` file of a directory, or a single file, sorted by path.
pub fn load_instances(path: &Path) -> Result<Vec<Instance>, HarnessError> {
    if !path.is_dir() {
        return Ok(vec![load_instance(path)?]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cnf"))
        .collect();
    files.sort();
    files.iter().map(|p| load_instance(p)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Solver {
    Probsat {
        #[serde(default)]
        scoring: Option<ScoringFunction>,
    },
    Gapsat(GapsatConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub id: String,
    #[serde(flatten)]
    pub solver: Solver,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Budget {
    Flips(u64),
    Seconds(f64),
}

impl Budget {
    pub fn currency(self) -> Currency {
        match self {
            Budget::Flips(_) => Currency::Flips,
            Budget::Seconds(_) => Currency::Seconds,
        }
    }

    pub fn timeout(self) -> f64 {
        match self {
            Budget::Flips(f) => f as f64,
            Budget::Seconds(s) => s,
        }
    }
}

/// One trial: its CSV record, a timing-free fingerprint, and a crash note.
#[derive(Clone, Debug, PartialEq)]
pub struct Trial {
    pub record: TrialRecord,
    pub fingerprint: String,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutput {
    pub trials: Vec<Trial>,
    pub summary: BenchmarkSummary,
}

impl SuiteOutput {
    pub fn records(&self) -> Vec<TrialRecord> {
        self.trials.iter().map(|t| t.record.clone()).collect()
    }
}

fn run_trial(instance: &Instance, solver: &SolverConfig, seed: u64, budget: Budget) -> (bool, u64, String) {
    let formula = &instance.formula;
    match &solver.solver {
        Solver::Probsat { scoring } => {
            let scoring = scoring.unwrap_or_else(|| {
                ScoringFunction::default_for_width(formula.max_clause_width().unwrap_or(0))
            });
            let (max_flips, deadline) = match budget {
                Budget::Flips(f) => (f, None),
                Budget::Seconds(s) => (u64::MAX, Some(Instant::now() + Duration::from_secs_f64(s))),
            };
            let run = SlsProblem::new(formula).run(
                RunLimits { max_flips, deadline, seed_label: seed },
                &scoring,
                &mut seeded(seed),
            );
            let fingerprint = format!("status={:?} flips={}", run.status, run.flips);
            (run.solved(), run.flips, fingerprint)
        }
        Solver::Gapsat(config) => {
            let mut config = config.clone();
            let wall = match budget {
                Budget::Flips(total) => {
                    let initial = config.strategy_for(formula).initial_flips.min(total);
                    config.initial_flips = Some(initial);
                    config.final_max_flips = Some(total - initial);
                    DEFAULT_WALL_BUDGET
                }
                Budget::Seconds(s) => s,
            };
            match run_gapsat(formula, wall, seed, &config) {
                Ok(r) => (r.status == crate::gapsat::Status::Sat, r.total_flips(), r.fingerprint()),
                Err(e) => panic!("{e}"),
            }
        }
    }
}

/// Runs every (instance, solver, seed) trial on `workers` threads. Records
/// come back sorted by (instance, solver, seed) whatever the schedule.
pub fn run_suite(
    instances: &[Instance],
    solvers: &[SolverConfig],
    seeds: &[u64],
    budget: Budget,
    workers: usize,
) -> Result<SuiteOutput, HarnessError> {
    if instances.is_empty() {
        return Err(HarnessError::NoInstances);
    }
    if solvers.is_empty() {
        return Err(HarnessError::NoSolvers);
    }
    if seeds.is_empty() {
        return Err(HarnessError::NoSeeds);
    }
    let mut ids: Vec<&str> = solvers.iter().map(|s| s.id.as_str()).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(HarnessError::DuplicateSolver(w[0].to_string()));
    }

    let jobs: Vec<(&Instance, &SolverConfig, u64)> = instances
        .iter()
        .flat_map(|i| solvers.iter().flat_map(move |s| seeds.iter().map(move |&seed| (i, s, seed))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
    let mut trials: Vec<Trial> = pool.install(|| {
        jobs.par_iter()
            .map(|&(instance, solver, seed)| {
                let start = Instant::now();
                let outcome = catch_unwind(AssertUnwindSafe(|| run_trial(instance, solver, seed, budget)));
                let seconds = start.elapsed().as_secs_f64();
                let (solved, flips, fingerprint, note) = match outcome {
                    Ok((solved, flips, fp)) => (solved, flips, fp, None),
                    Err(payload) => {
                        let msg = payload
                            .downcast_ref::<String>()
                            .cloned()
                            .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                            .unwrap_or_else(|| "solver panicked".to_string());
                        log::warn!("{} / {} / seed {seed} crashed: {msg}", instance.id, solver.id);
                        (false, 0, "crashed".to_string(), Some(msg))
                    }
                };
                let record = TrialRecord {
                    instance_id: instance.id.clone(),
                    solver_id: solver.id.clone(),
                    seed,
                    solved,
                    flips,
                    seconds,
                };
                Trial { record, fingerprint, note }
            })
            .collect()
    });
    trials.sort_by(|a, b| trial_key(&a.record).cmp(&trial_key(&b.record)));
    let records: Vec<TrialRecord> = trials.iter().map(|t| t.record.clone()).collect();
    let summary = summarize(&records, budget);
    Ok(SuiteOutput { trials, summary })
}

fn trial_key(r: &TrialRecord) -> (&str, &str, u64) {
    (&r.instance_id, &r.solver_id, r.seed)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverSummary {
    #[serde(rename = "solverId")]
    pub solver_id: String,
    pub trials: usize,
    #[serde(rename = "solvedCount")]
    pub solved_count: usize,
    /// Sum over instances of the mean PAR2 over seeds.
    pub score: f64,
    #[serde(skip)]
    pub per_instance: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairwiseStats {
    #[serde(rename = "solverA")]
    pub solver_a: String,
    #[serde(rename = "solverB")]
    pub solver_b: String,
    pub instances: usize,
    #[serde(rename = "t")]
    pub t: Option<f64>,
    #[serde(rename = "tP")]
    pub t_p: Option<f64>,
    #[serde(rename = "welchT")]
    pub welch_t: Option<f64>,
    #[serde(rename = "welchP")]
    pub welch_p: Option<f64>,
    #[serde(rename = "wilcoxonW")]
    pub wilcoxon_w: Option<f64>,
    #[serde(rename = "wilcoxonP")]
    pub wilcoxon_p: Option<f64>,
    #[serde(rename = "cohensD")]
    pub cohens_d: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkSummary {
    pub currency: Currency,
    pub timeout: f64,
    pub solvers: Vec<SolverSummary>,
    pub pairwise: Vec<PairwiseStats>,
}

impl BenchmarkSummary {
    pub fn solver(&self, id: &str) -> Option<&SolverSummary> {
        self.solvers.iter().find(|s| s.solver_id == id)
    }
}

fn t_parts(r: Result<TTest, StatsError>) -> (Option<f64>, Option<f64>) {
    r.map_or((None, None), |t| (Some(t.t), Some(t.p)))
}

/// Derives the summary from trial records alone.
pub fn summarize(records: &[TrialRecord], budget: Budget) -> BenchmarkSummary {
    let (timeout, currency) = (budget.timeout(), budget.currency());
    let mut grouped: BTreeMap<&str, BTreeMap<&str, Vec<f64>>> = BTreeMap::new();
    let mut solved: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for r in records {
        grouped
            .entry(&r.solver_id)
            .or_default()
            .entry(&r.instance_id)
            .or_default()
            .push(par2(r, timeout, currency));
        let e = solved.entry(&r.solver_id).or_default();
        e.0 += 1;
        e.1 += usize::from(r.solved);
    }
    let solvers: Vec<SolverSummary> = grouped
        .iter()
        .map(|(&id, by_instance)| {
            let per_instance: BTreeMap<String, f64> = by_instance
                .iter()
                .map(|(&inst, v)| (inst.to_string(), v.iter().sum::<f64>() / v.len() as f64))
                .collect();
            let (trials, solved_count) = solved[id];
            SolverSummary {
                solver_id: id.to_string(),
                trials,
                solved_count,
                score: per_instance.values().sum(),
                per_instance,
            }
        })
        .collect();

    let mut pairwise = Vec::new();
    for (i, a) in solvers.iter().enumerate() {
        for b in &solvers[i + 1..] {
            let common: Vec<&String> =
                a.per_instance.keys().filter(|k| b.per_instance.contains_key(*k)).collect();
            let xa: Vec<f64> = common.iter().map(|k| a.per_instance[*k]).collect();
            let xb: Vec<f64> = common.iter().map(|k| b.per_instance[*k]).collect();
            let (t, t_p) = t_parts(paired_t_test(&xa, &xb));
            let (welch_t, welch_p) = t_parts(welch_t_test(&xa, &xb));
            let w = wilcoxon_signed_rank(&xa, &xb).ok();
            pairwise.push(PairwiseStats {
                solver_a: a.solver_id.clone(),
                solver_b: b.solver_id.clone(),
                instances: common.len(),
                t,
                t_p,
                welch_t,
                welch_p,
                wilcoxon_w: w.map(|w| w.w_plus),
                wilcoxon_p: w.map(|w| w.p),
                cohens_d: cohens_d(&xa, &xb).ok(),
            });
        }
    }
    BenchmarkSummary { currency, timeout, solvers, pairwise }
}

/// Solved-trial costs per solver, ascending.
pub fn cactus_data(records: &[TrialRecord], currency: Currency) -> BTreeMap<String, Vec<f64>> {
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in records {
        let costs = out.entry(r.solver_id.clone()).or_default();
        if r.solved {
            costs.push(r.cost(currency));
        }
    }
    for costs in out.values_mut() {
        costs.sort_by(f64::total_cmp);
    }
    out
}

pub fn write_trials_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trials_csv<R: Read>(input: R) -> Result<Vec<TrialRecord>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

pub fn write_summary_csv<W: Write>(summary: &BenchmarkSummary, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for s in &summary.solvers {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_pairwise_csv<W: Write>(summary: &BenchmarkSummary, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for p in &summary.pairwise {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_cactus_csv<W: Write>(costs: &[f64], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["solved", "cost"])?;
    for (i, c) in costs.iter().enumerate() {
        w.write_record([(i + 1).to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `trials.csv`, `summary.csv`, `pairwise.csv` and one
/// `cactus_<solver>.csv` per solver into `dir`.
pub fn write_outputs(dir: &Path, output: &SuiteOutput) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir)?;
    let records = output.records();
    let mut written = Vec::new();
    let mut create = |name: String| -> Result<File, HarnessError> {
        let path = dir.join(name);
        let f = File::create(&path)?;
        written.push(path);
        Ok(f)
    };
    write_trials_csv(&records, create("trials.csv".into())?)?;
    write_summary_csv(&output.summary, create("summary.csv".into())?)?;
    write_pairwise_csv(&output.summary, create("pairwise.csv".into())?)?;
    for (solver, costs) in cactus_data(&records, output.summary.currency) {
        write_cactus_csv(&costs, create(format!("cactus_{solver}.csv"))?)?;
    }
    Ok(written)
}

/// Clause-quality comparison of two clause families on the same instances,
/// aggregated two ways.
#[derive(Clone, Debug, PartialEq)]
pub struct QualityComparison {
    /// Paired test on per-instance mean quality.
    pub per_instance: Result<TTest, StatsError>,
    /// Welch test on all per-clause qualities pooled.
    pub per_clause: Result<TTest, StatsError>,
}

pub fn compare_quality(a: &[QualityReport], b: &[QualityReport]) -> QualityComparison {
    let means = |rs: &[QualityReport]| -> Vec<f64> {
        rs.iter().map(|r| r.mean_quality).filter(|q| !q.is_nan()).collect()
    };
    let pooled = |rs: &[QualityReport]| -> Vec<f64> {
        rs.iter().flat_map(|r| r.per_clause.iter().map(|c| c.quality)).collect()
    };
    let paired = if a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| !x.mean_quality.is_nan() && !y.mean_quality.is_nan())
    {
        paired_t_test(&means(a), &means(b))
    } else {
        Err(StatsError::LengthMismatch(means(a).len(), means(b).len()))
    };
    QualityComparison { per_instance: paired, per_clause: welch_t_test(&pooled(a), &pooled(b)) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Clause;

    fn trivial() -> Instance {
        let f = Formula::new(3, vec![Clause::from_dimacs(&[1, 2, 3])]).unwrap();
        Instance { id: "trivial".into(), formula: f }
    }

    fn solvers() -> Vec<SolverConfig> {
        vec![
            SolverConfig { id: "probsat".into(), solver: Solver::Probsat { scoring: None } },
            SolverConfig { id: "gapsat".into(), solver: Solver::Gapsat(GapsatConfig::default()) },
        ]
    }

    #[test]
    fn trivial_suite() {
        let out = run_suite(&[trivial()], &solvers(), &[1, 2, 3], Budget::Flips(1000), 2).unwrap();
        assert_eq!(out.trials.len(), 6);
        for s in &out.summary.solvers {
            assert!(s.score < 2.0 * 1000.0);
            assert_eq!(s.solved_count, 3);
        }
        let keys: Vec<_> = out.trials.iter().map(|t| (t.record.solver_id.clone(), t.record.seed)).collect();
        assert_eq!(keys[0], ("gapsat".to_string(), 1));
        assert_eq!(keys[5], ("probsat".to_string(), 3));
    }

    #[test]
    fn score_recomputes_from_csv() {
        let records = vec![
            TrialRecord { instance_id: "a".into(), solver_id: "s".into(), seed: 0, solved: true, flips: 10, seconds: 0.1 },
            TrialRecord { instance_id: "a".into(), solver_id: "s".into(), seed: 1, solved: false, flips: 100, seconds: 0.2 },
            TrialRecord { instance_id: "b".into(), solver_id: "s".into(), seed: 0, solved: true, flips: 30, seconds: 0.1 },
        ];
        let mut buf = Vec::new();
        write_trials_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("instanceId,solverId,seed,solved,flips,seconds\n"));
        let back = read_trials_csv(buf.as_slice()).unwrap();
        assert_eq!(back, records);
        let s = summarize(&back, Budget::Flips(100));
        // a: mean(10, 200) = 105; b: 30
        assert_eq!(s.solver("s").unwrap().score, 135.0);
        assert_eq!(s.solver("s").unwrap().solved_count, 2);
    }

    #[test]
    fn cactus_sorted_and_solved_only() {
        let mk = |seed, solved, flips| TrialRecord {
            instance_id: "a".into(),
            solver_id: "s".into(),
            seed,
            solved,
            flips,
            seconds: 0.0,
        };
        let data = cactus_data(&[mk(0, true, 50), mk(1, false, 9), mk(2, true, 5)], Currency::Flips);
        assert_eq!(data["s"], vec![5.0, 50.0]);
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(matches!(run_suite(&[], &solvers(), &[1], Budget::Flips(1), 1), Err(HarnessError::NoInstances)));
        assert!(matches!(run_suite(&[trivial()], &[], &[1], Budget::Flips(1), 1), Err(HarnessError::NoSolvers)));
        let dup = vec![solvers()[0].clone(), solvers()[0].clone()];
        assert!(matches!(
            run_suite(&[trivial()], &dup, &[1], Budget::Flips(1), 1),
            Err(HarnessError::DuplicateSolver(_))
        ));
    }

    #[test]
    fn crash_is_recorded_unsolved() {
        // a zero wall budget is rejected by the pipeline, which panics the trial
        let gapsat = vec![solvers()[1].clone()];
        let out = run_suite(&[trivial()], &gapsat, &[0, 1], Budget::Seconds(0.0), 2).unwrap();
        for t in &out.trials {
            assert!(!t.record.solved);
            assert!(t.note.as_deref().unwrap().contains("wall budget"));
        }
        assert_eq!(out.summary.solver("gapsat").unwrap().solved_count, 0);
    }

    #[test]
    fn quality_aggregations() {
        use crate::cnf::Assignment;
        use crate::oracle::quality_report;
        let sol = Assignment::all(4, true);
        let family = |first: [i64; 3], second: &dyn Fn(i64) -> [i64; 3]| -> Vec<QualityReport> {
            (0..6)
                .map(|i| quality_report(&[Clause::from_dimacs(&first), Clause::from_dimacs(&second(i))], &sol).unwrap())
                .collect()
        };
        let good = family([1, 2, -3], &|i| if i % 2 == 0 { [1, 2, 4] } else { [1, -2, 4] });
        let bad = family([-1, -2, 3], &|i| if i % 3 == 0 { [-1, -2, 4] } else { [-1, -2, -4] });
        let c = compare_quality(&good, &bad);
        assert!(c.per_instance.unwrap().t > 0.0);
        assert!(c.per_clause.unwrap().t > 0.0);
    }
}
