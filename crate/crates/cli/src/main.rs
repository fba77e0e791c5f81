//! `gapsat` command line: generators, solvers, clause enrichment, oracle
//! tools, benchmarking and statistics.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use gapsat::cdcl::{cdcl_solve_and_mine, filter_learned, FilterMode, MiningBudget};
use gapsat::cnf::write_clause_lines;
use gapsat::gapsat::{CapOverride, DEFAULT_MINER_SECONDS, DEFAULT_WALL_BUDGET};
use gapsat::gen::{default_ratio, gen_planted, gen_uniform, ClauseCount, GenSpec};
use gapsat::harness::{load_instances, run_suite, write_outputs, Budget, SolverConfig};
use gapsat::oracle::{compute_backbone, gen_deceptive, gen_general, quality_report};
use gapsat::resolution::{
    level1_resolvents, level2_resolvents_with_budget, sample_clauses, ternary_saturate, CapSpec,
    DEFAULT_PAIR_BUDGET,
};
use gapsat::sls::{RunLimits, SlsProblem};
use gapsat::stats::{cohens_d, paired_t_test, welch_t_test, wilcoxon_signed_rank};
use gapsat::{parse_dimacs, run_gapsat, seeded, Assignment, Clause, Formula, GapsatConfig, ScoringFunction};

#[derive(Parser)]
#[command(name = "gapsat", version, about = "CDCL-assisted probSAT and friends")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random k-SAT instance
    Gen(GenArgs),
    /// Run probSAT once
    SolveSls(SolveSlsArgs),
    /// Run GapSAT: probSAT, CDCL clause mining, probSAT on the enriched formula
    Solve(SolveArgs),
    /// Export clauses learned by CDCL
    Mine(MineArgs),
    /// Add derived clauses to a formula
    Enrich(EnrichArgs),
    /// Print the backbone of a satisfiable formula
    Backbone(BackboneArgs),
    /// Add deceptive or general clauses built from the backbone
    Inject(InjectArgs),
    /// Per-clause quality against a solution, as CSV
    Quality(QualityArgs),
    /// Run solvers over an instance set and write PAR2 results
    Bench(BenchArgs),
    /// Compare two columns of a CSV file
    Stats(StatsArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(short, long)]
    n: usize,
    #[arg(short, long, default_value_t = 3)]
    k: usize,
    /// Clause-to-variable ratio; defaults to the threshold ratio for k
    #[arg(long, conflicts_with = "m")]
    ratio: Option<f64>,
    #[arg(short, long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Plant a hidden solution and write it next to the instance
    #[arg(long)]
    planted: bool,
    /// Solution file; defaults to the output path with a `.sol` extension
    #[arg(long, requires = "planted")]
    solution: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Poly,
    Exp,
}

#[derive(Args)]
struct ScoringArgs {
    /// Scoring function; the width-based default when unset
    #[arg(long)]
    scoring: Option<Kind>,
    #[arg(long, default_value_t = 0.9)]
    eps: f64,
    #[arg(long)]
    cb: Option<f64>,
}

impl ScoringArgs {
    fn resolve(&self, formula: &Formula) -> Result<ScoringFunction> {
        let default = ScoringFunction::default_for_width(formula.max_clause_width().unwrap_or(0));
        let scoring = match self.scoring {
            None => ScoringFunction { cb: self.cb.unwrap_or(default.cb), ..default }.validated()?,
            Some(Kind::Poly) => ScoringFunction::poly(self.eps, self.cb.unwrap_or(2.06))?,
            Some(Kind::Exp) => ScoringFunction::exp(self.cb.unwrap_or(3.0))?,
        };
        Ok(scoring)
    }
}

#[derive(Args)]
struct SolveSlsArgs {
    input: PathBuf,
    #[arg(long, default_value_t = u64::MAX)]
    max_flips: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    scoring: ScoringArgs,
}

#[derive(Args)]
struct SolveArgs {
    input: PathBuf,
    /// Wall budget in seconds
    #[arg(long, default_value_t = DEFAULT_WALL_BUDGET)]
    budget: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MINER_SECONDS)]
    miner_seconds: f64,
    /// Conflict budget for the miner, for reproducible runs
    #[arg(long)]
    miner_conflicts: Option<u64>,
    /// Width limit for mined clauses
    #[arg(long)]
    width: Option<usize>,
    /// Count cap as a percentage of m (`5%`), or `none`
    #[arg(long)]
    cap: Option<CapOverride>,
    #[arg(long)]
    initial_flips: Option<u64>,
    #[command(flatten)]
    scoring: ScoringArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Chronological,
    Random,
}

#[derive(Args)]
struct MineArgs {
    input: PathBuf,
    #[arg(long)]
    seconds: Option<f64>,
    #[arg(long)]
    conflicts: Option<u64>,
    #[arg(long, default_value_t = 4)]
    width: usize,
    /// Absolute count, `m/<d>` or `<p>%`
    #[arg(long)]
    cap: Option<CapSpec>,
    #[arg(long, value_enum, default_value_t = Mode::Chronological)]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnrichMode {
    Level1,
    Level2,
    Ternary,
    Cdcl,
}

#[derive(Args)]
struct EnrichArgs {
    input: PathBuf,
    #[arg(long, value_enum)]
    mode: EnrichMode,
    #[arg(long, default_value_t = 4)]
    max_width: usize,
    /// Absolute count, `m/<d>` or `<p>%`; everything when unset
    #[arg(long)]
    cap: Option<CapSpec>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pair budget for level-2 enumeration
    #[arg(long, default_value_t = DEFAULT_PAIR_BUDGET)]
    pair_budget: u64,
    /// Miner wall budget in cdcl mode
    #[arg(long, default_value_t = DEFAULT_MINER_SECONDS)]
    seconds: f64,
    #[arg(long)]
    conflicts: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BackboneArgs {
    input: PathBuf,
    /// Conflict budget per solver call
    #[arg(long)]
    conflicts: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Deceptive,
    General,
}

#[derive(Args)]
struct InjectArgs {
    input: PathBuf,
    #[arg(long, value_enum)]
    model: Model,
    #[arg(short, long)]
    t: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write only the injected clauses, not the augmented formula
    #[arg(long)]
    clauses_only: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct QualityArgs {
    clauses: PathBuf,
    solution: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of `.cnf` files, or a single instance
    #[arg(long)]
    instances: PathBuf,
    /// TOML file with one or more `[[solver]]` tables; repeatable
    #[arg(long = "solvers", required = true)]
    solver_files: Vec<PathBuf>,
    /// Runs per instance and solver, seeded 0..runs
    #[arg(long, default_value_t = 10, conflicts_with = "seeds")]
    runs: u64,
    /// Explicit comma-separated seeds
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, conflicts_with = "seconds", required_unless_present = "seconds")]
    flips: Option<u64>,
    #[arg(long)]
    seconds: Option<f64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    csv: PathBuf,
    a: String,
    b: String,
    /// Unpaired comparison (Welch) instead of the paired tests
    #[arg(long)]
    welch: bool,
}

#[derive(Deserialize)]
struct SolverFile {
    solver: Vec<SolverConfig>,
}

fn read_formula(path: &Path) -> Result<Formula> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    parse_dimacs(BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cap_count(cap: Option<CapSpec>, m: usize) -> Option<usize> {
    cap.map(|c| c.resolve(m))
}

fn gen(args: GenArgs) -> Result<ExitCode> {
    let clauses = match (args.m, args.ratio) {
        (Some(m), _) => ClauseCount::Exact(m),
        (None, Some(r)) => ClauseCount::Ratio(r),
        (None, None) => match default_ratio(args.k) {
            Some(r) => ClauseCount::Ratio(r),
            None => bail!("no default ratio for k = {}; pass --ratio or --m", args.k),
        },
    };
    let spec = GenSpec { n: args.n, k: args.k, clauses, planted: None, seed: args.seed };
    let mut out = open_output(args.output.as_deref())?;
    if args.planted {
        let solution_path = match (&args.solution, &args.output) {
            (Some(s), _) => s.clone(),
            (None, Some(o)) => o.with_extension("sol"),
            (None, None) => bail!("--planted on stdout needs --solution"),
        };
        let (formula, hidden) = gen_planted(&spec)?;
        formula.write_dimacs(&mut out)?;
        let mut sol = BufWriter::new(File::create(&solution_path)?);
        hidden.write_model(&mut sol)?;
        sol.flush()?;
    } else {
        gen_uniform(&spec)?.write_dimacs(&mut out)?;
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn solve_sls(args: SolveSlsArgs) -> Result<ExitCode> {
    let formula = read_formula(&args.input)?;
    let scoring = args.scoring.resolve(&formula)?;
    let limits = RunLimits { max_flips: args.max_flips, deadline: None, seed_label: args.seed };
    let run = SlsProblem::new(&formula).run(limits, &scoring, &mut seeded(args.seed));
    let mut out = io::stdout().lock();
    writeln!(out, "c probSAT with {scoring}: {} flips in {:.3} s", run.flips, run.wall_seconds)?;
    let code = match &run.model {
        Some(model) => {
            writeln!(out, "s SATISFIABLE")?;
            model.write_model(&mut out)?;
            10
        }
        None => {
            writeln!(out, "s UNKNOWN")?;
            0
        }
    };
    writeln!(
        out,
        "c result status={} flips={} seconds={:.6} seed={}",
        if run.solved() { "sat" } else { "unknown" },
        run.flips,
        run.wall_seconds,
        run.seed
    )?;
    Ok(ExitCode::from(code))
}

fn solve(args: SolveArgs) -> Result<ExitCode> {
    let formula = read_formula(&args.input)?;
    let scoring = args.scoring.scoring.is_some() || args.scoring.cb.is_some();
    let config = GapsatConfig {
        miner_seconds: Some(args.miner_seconds),
        miner_conflicts: args.miner_conflicts,
        width_limit: args.width,
        cap: args.cap,
        initial_flips: args.initial_flips,
        final_max_flips: None,
        scoring: if scoring { Some(args.scoring.resolve(&formula)?) } else { None },
    };
    let result = run_gapsat(&formula, args.budget, args.seed, &config)?;
    let mut out = io::stdout().lock();
    writeln!(out, "{}", result.status.competition_line())?;
    if let Some(model) = &result.model {
        model.write_model(&mut out)?;
    }
    writeln!(out, "{}", result.phase_line())?;
    out.flush()?;
    Ok(ExitCode::from(result.status.exit_code() as u8))
}

fn mine(args: MineArgs) -> Result<ExitCode> {
    let formula = read_formula(&args.input)?;
    let cap = cap_count(args.cap, formula.num_clauses());
    let budget = MiningBudget {
        wall_seconds: args.seconds.unwrap_or(if args.conflicts.is_some() { f64::INFINITY } else { DEFAULT_MINER_SECONDS }),
        conflict_limit: args.conflicts,
        width_limit: args.width,
        count_cap: match args.mode {
            Mode::Chronological => cap,
            Mode::Random => None,
        },
    };
    let outcome = cdcl_solve_and_mine(&formula, &budget, args.seed);
    let mode = match args.mode {
        Mode::Chronological => FilterMode::Chronological,
        Mode::Random => FilterMode::Random,
    };
    let exported = filter_learned(&outcome.learned, args.width, cap, mode, args.seed);
    log::info!("miner finished: {:?} after {} conflicts", outcome.status, outcome.conflicts);
    let mut out = open_output(args.output.as_deref())?;
    writeln!(out, "c learned {} exported {}", outcome.total_learned_seen, exported.len())?;
    write_clause_lines(&mut out, &exported)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn enrich(args: EnrichArgs) -> Result<ExitCode> {
    let formula = read_formula(&args.input)?;
    let cap = cap_count(args.cap, formula.num_clauses());
    let pool: Vec<Clause> = match args.mode {
        EnrichMode::Level1 => level1_resolvents(&formula, args.max_width).clauses,
        EnrichMode::Level2 => {
            let pool = level2_resolvents_with_budget(&formula, args.max_width, args.pair_budget);
            if pool.truncated {
                log::warn!("level-2 enumeration stopped at the pair budget of {}", args.pair_budget);
            }
            pool.clauses
        }
        EnrichMode::Ternary => ternary_saturate(&formula),
        EnrichMode::Cdcl => {
            let budget = MiningBudget {
                wall_seconds: args.seconds,
                conflict_limit: args.conflicts,
                width_limit: args.max_width,
                count_cap: cap,
            };
            cdcl_solve_and_mine(&formula, &budget, args.seed).clauses()
        }
    };
    let added = match cap {
        Some(c) => sample_clauses(&pool, c, args.seed),
        None => pool,
    };
    let enriched = formula.augment(added)?;
    let mut out = open_output(args.output.as_deref())?;
    writeln!(out, "c added {}", enriched.num_clauses() - formula.num_clauses())?;
    enriched.write_dimacs(&mut out)?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn backbone(args: BackboneArgs) -> Result<ExitCode> {
    let formula = read_formula(&args.input)?;
    let b = compute_backbone(&formula, args.conflicts)?;
    let mut out = io::stdout().lock();
    writeln!(out, "c backbone size {}", b.len())?;
    write_clause_lines(&mut out, &[Clause::new(b.lits().to_vec())])?;
    Ok(ExitCode::SUCCESS)
}

fn inject(args: InjectArgs) -> Result<ExitCode> {
    let formula = read_formula(&args.input)?;
    let b = compute_backbone(&formula, None)?;
    let clauses = match args.model {
        Model::Deceptive => gen_deceptive(&b, args.t, args.seed)?,
        Model::General => gen_general(formula.num_vars(), &b, args.t, args.seed)?,
    };
    let mut out = open_output(args.output.as_deref())?;
    if args.clauses_only {
        write_clause_lines(&mut out, &clauses)?;
    } else {
        let injected = formula.augment(clauses)?;
        writeln!(out, "c added {}", injected.num_clauses() - formula.num_clauses())?;
        injected.write_dimacs(&mut out)?;
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn quality(args: QualityArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&args.clauses).with_context(|| format!("reading {}", args.clauses.display()))?;
    let clauses = gapsat::cnf::parse_clause_list(&text)?;
    let sol = fs::read_to_string(&args.solution).with_context(|| format!("reading {}", args.solution.display()))?;
    let n = sol
        .split_whitespace()
        .filter_map(|t| t.parse::<i64>().ok())
        .map(|v| v.unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    let solution = Assignment::parse_model(&sol, n)?;
    let report = quality_report(&clauses, &solution)?;
    let mut out = open_output(args.output.as_deref())?;
    report.write_csv(&mut out)?;
    out.flush()?;
    eprintln!("mean quality {:.6}, mean correct literals {:.6}", report.mean_quality, report.mean_correct_literals);
    Ok(ExitCode::SUCCESS)
}

fn bench(args: BenchArgs) -> Result<ExitCode> {
    let instances = load_instances(&args.instances)?;
    let mut solvers = Vec::new();
    for path in &args.solver_files {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: SolverFile = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        solvers.extend(file.solver);
    }
    let seeds: Vec<u64> = args.seeds.unwrap_or_else(|| (0..args.runs).collect());
    let budget = match (args.flips, args.seconds) {
        (Some(f), _) => Budget::Flips(f),
        (None, Some(s)) => Budget::Seconds(s),
        (None, None) => unreachable!("clap requires one budget"),
    };
    let output = run_suite(&instances, &solvers, &seeds, budget, args.workers)?;
    fs::create_dir_all(&args.out)?;
    let written = write_outputs(&args.out, &output)?;
    let mut out = io::stdout().lock();
    for s in &output.summary.solvers {
        writeln!(out, "{}: solved {}/{} score {:.2}", s.solver_id, s.solved_count, s.trials, s.score)?;
    }
    for p in &written {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn read_columns(path: &Path, a: &str, b: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name).with_context(|| format!("no column `{name}`"));
    let (ia, ib) = (find(a)?, find(b)?);
    let (mut xa, mut xb) = (Vec::new(), Vec::new());
    for (row, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<Option<f64>> {
            let cell = rec.get(i).unwrap_or("").trim();
            if cell.is_empty() {
                return Ok(None);
            }
            f64::from_str(cell).map(Some).with_context(|| format!("row {}: `{cell}` is not a number", row + 2))
        };
        if let Some(v) = parse(ia)? {
            xa.push(v);
        }
        if let Some(v) = parse(ib)? {
            xb.push(v);
        }
    }
    Ok((xa, xb))
}

fn stats(args: StatsArgs) -> Result<ExitCode> {
    let (a, b) = read_columns(&args.csv, &args.a, &args.b)?;
    let mut out = io::stdout().lock();
    if args.welch {
        let t = welch_t_test(&a, &b)?;
        writeln!(out, "welch t={:.6} df={:.3} p={:.6e}", t.t, t.df, t.p)?;
    } else {
        let t = paired_t_test(&a, &b)?;
        writeln!(out, "paired t={:.6} df={} p={:.6e}", t.t, t.df, t.p)?;
        match wilcoxon_signed_rank(&a, &b) {
            Ok(w) => writeln!(
                out,
                "wilcoxon W+={} n={} p={:.6e} ({})",
                w.w_plus,
                w.n,
                w.p,
                if w.exact { "exact" } else { "normal approximation" }
            )?,
            Err(e) => writeln!(out, "wilcoxon unavailable: {e}")?,
        }
    }
    match cohens_d(&a, &b) {
        Ok(d) => writeln!(out, "cohen d={d:.6}")?,
        Err(e) => writeln!(out, "cohen d unavailable: {e}")?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::SolveSls(a) => solve_sls(a),
        Command::Solve(a) => solve(a),
        Command::Mine(a) => mine(a),
        Command::Enrich(a) => enrich(a),
        Command::Backbone(a) => backbone(a),
        Command::Inject(a) => inject(a),
        Command::Quality(a) => quality(a),
        Command::Bench(a) => bench(a),
        Command::Stats(a) => stats(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(1)
    })
}
