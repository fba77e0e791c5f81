use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gapsat::cnf::parse_clause_list;
use gapsat::{parse_dimacs_str, Assignment};

fn gapsat(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gapsat")).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn planted(dir: &Path, n: &str, seed: &str) {
    let o = gapsat(dir, &["gen", "-n", n, "--seed", seed, "--planted", "-o", "f.cnf"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn gen_writes_instance_and_solution() {
    let dir = tempfile::tempdir().unwrap();
    planted(dir.path(), "40", "5");
    let f = parse_dimacs_str(&fs::read_to_string(dir.path().join("f.cnf")).unwrap()).unwrap();
    assert_eq!(f.num_vars(), 40);
    let sol = Assignment::parse_model(&fs::read_to_string(dir.path().join("f.sol")).unwrap(), 40).unwrap();
    assert!(f.is_satisfied_by(&sol));

    let o = gapsat(dir.path(), &["gen", "-n", "10", "-k", "4", "-m", "7", "--seed", "1"]);
    let f = parse_dimacs_str(&stdout(&o)).unwrap();
    assert_eq!((f.num_vars(), f.num_clauses(), f.max_clause_width().unwrap()), (10, 7, 4));
}

#[test]
fn solve_sls_reports_model_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    planted(dir.path(), "50", "2");
    let o = gapsat(dir.path(), &["solve-sls", "f.cnf", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(10));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "s SATISFIABLE"));
    assert!(text.lines().any(|l| l.starts_with("c result status=sat flips=")));
    let f = parse_dimacs_str(&fs::read_to_string(dir.path().join("f.cnf")).unwrap()).unwrap();
    assert!(f.is_satisfied_by(&Assignment::parse_model(&text, 50).unwrap()));

    let o = gapsat(dir.path(), &["solve-sls", "f.cnf", "--max-flips", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "s UNKNOWN"));
}

#[test]
fn solve_exit_codes_and_phase_line() {
    let dir = tempfile::tempdir().unwrap();
    // all eight sign patterns over three variables
    let unsat = "p cnf 3 8\n1 2 3 0\n-1 2 3 0\n1 -2 3 0\n-1 -2 3 0\n1 2 -3 0\n-1 2 -3 0\n1 -2 -3 0\n-1 -2 -3 0\n";
    fs::write(dir.path().join("unsat.cnf"), unsat).unwrap();
    let o = gapsat(dir.path(), &["solve", "unsat.cnf", "--initial-flips", "100", "--budget", "60"]);
    assert_eq!(o.status.code(), Some(20));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("s UNSATISFIABLE"));
    assert!(text.lines().any(|l| l.starts_with("c phases track=k3 solved=miner")));

    planted(dir.path(), "60", "1");
    let o = gapsat(dir.path(), &["solve", "f.cnf", "--seed", "4", "--budget", "60"]);
    assert_eq!(o.status.code(), Some(10));
    assert!(stdout(&o).contains("solved=initial-sls"));
}

#[test]
fn mine_enrich_and_quality() {
    let dir = tempfile::tempdir().unwrap();
    planted(dir.path(), "60", "7");
    let o = gapsat(dir.path(), &["mine", "f.cnf", "--conflicts", "500", "--width", "5", "--cap", "5", "-o", "m.txt"]);
    assert!(o.status.success());
    let text = fs::read_to_string(dir.path().join("m.txt")).unwrap();
    assert!(text.starts_with("c learned "));
    let mined = parse_clause_list(&text).unwrap();
    assert!(mined.len() <= 5 && mined.iter().all(|c| c.len() <= 5));

    let o = gapsat(dir.path(), &["quality", "m.txt", "f.sol"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert_eq!(csv.lines().next(), Some("clauseId,width,correct,quality"));
    assert_eq!(csv.lines().count(), mined.len() + 1);

    for mode in ["level1", "level2", "ternary", "cdcl"] {
        let o = gapsat(dir.path(), &["enrich", "f.cnf", "--mode", mode, "--cap", "m/10", "--conflicts", "200"]);
        assert!(o.status.success(), "{mode}");
        let text = stdout(&o);
        let added: usize = text.lines().next().unwrap().strip_prefix("c added ").unwrap().parse().unwrap();
        let f = parse_dimacs_str(&text).unwrap();
        assert!(added <= 256 / 10, "{mode}: {added}");
        assert_eq!(f.num_clauses(), 256 + added, "{mode}");
    }
}

#[test]
fn backbone_and_inject() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("b.cnf"), "p cnf 4 3\n1 0\n-2 0\n3 4 0\n").unwrap();
    let o = gapsat(dir.path(), &["backbone", "b.cnf"]);
    assert_eq!(stdout(&o), "c backbone size 2\n1 -2 0\n");

    let o = gapsat(dir.path(), &["inject", "b.cnf", "--model", "general", "-t", "4", "--clauses-only"]);
    let clauses = parse_clause_list(&stdout(&o)).unwrap();
    assert_eq!(clauses.len(), 4);
    let o = gapsat(dir.path(), &["inject", "b.cnf", "--model", "deceptive", "-t", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 3"));
}

#[test]
fn bench_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("inst")).unwrap();
    for seed in ["1", "2"] {
        let out = format!("inst/u{seed}.cnf");
        assert!(gapsat(dir.path(), &["gen", "-n", "40", "--seed", seed, "--planted", "-o", &out]).status.success());
    }
    fs::write(
        dir.path().join("solvers.toml"),
        "[[solver]]\nid = \"p\"\nkind = \"probsat\"\n\n[[solver]]\nid = \"g\"\nkind = \"gapsat\"\nminer_conflicts = 100\n",
    )
    .unwrap();
    let o = gapsat(
        dir.path(),
        &["bench", "--instances", "inst", "--solvers", "solvers.toml", "--runs", "3", "--flips", "50000", "--workers", "2"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("bench-out");
    for f in ["trials.csv", "summary.csv", "pairwise.csv", "cactus_p.csv", "cactus_g.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert_eq!(fs::read_to_string(out.join("trials.csv")).unwrap().lines().count(), 1 + 2 * 2 * 3);

    fs::write(dir.path().join("s.csv"), "a,b\n1.1,1.0\n2.0,2.1\n3.2,3.0\n4.1,4.0\n5.3,5.0\n").unwrap();
    let text = stdout(&gapsat(dir.path(), &["stats", "s.csv", "a", "b"]));
    assert!(text.contains("paired t=1.809068"), "{text}");
    assert!(text.contains("W+=12.5"), "{text}");
    let text = stdout(&gapsat(dir.path(), &["stats", "s.csv", "a", "b", "--welch"]));
    assert!(text.contains("welch t=0.117500"), "{text}");

    fs::write(dir.path().join("bad.toml"), "[[solver]]\nid = \"g\"\nkind = \"gapsat\"\nminer_secs = 1\n").unwrap();
    let o = gapsat(dir.path(), &["bench", "--instances", "inst", "--solvers", "bad.toml", "--flips", "10"]);
    assert_eq!(o.status.code(), Some(1));
}
