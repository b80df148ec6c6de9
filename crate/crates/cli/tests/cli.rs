use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = "problem.cells_per_axis = 32\nhierarchy.min_coarse_dofs = 64\n";

struct Run {
    out: Output,
    dir: PathBuf,
}

impl Run {
    fn code(&self) -> i32 {
        self.out.status.code().expect("exit code")
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.out.stderr).into_owned()
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }

    fn csv(&self, name: &str) -> Vec<Vec<String>> {
        self.read(name)
            .lines()
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect()
    }

    fn summary(&self) -> serde_json::Value {
        serde_json::from_str(&self.read("summary.json")).unwrap()
    }
}

fn orthomg(tmp: &TempDir, command: &str, config: &str, env: &[(&str, &str)]) -> Run {
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, config).unwrap();
    let dir = tmp.path().join("out");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_orthomg"));
    cmd.arg(command).arg("--config").arg(&cfg).arg("--output").arg(&dir);
    cmd.env_remove("ORTHOMG_WORKERS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    Run {
        out: cmd.output().unwrap(),
        dir,
    }
}

fn column<'a>(rows: &'a [Vec<String>], name: &str) -> Vec<&'a str> {
    let idx = rows[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[idx].as_str()).collect()
}

#[test]
fn zero_rhs_converges_immediately() {
    let tmp = TempDir::new().unwrap();
    let run = orthomg(&tmp, "solve", &format!("{SMALL}problem.rhs = \"zero\"\n"), &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let history = run.read("history.csv");
    let lines: Vec<&str> = history.lines().collect();
    assert_eq!(lines[0], "step,residual,type");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].ends_with(",initial") && lines[2].ends_with(",final"));
}

#[test]
fn benchmark_solve_writes_artifacts() {
    let tmp = TempDir::new().unwrap();
    let run = orthomg(&tmp, "solve", SMALL, &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let s = run.summary();
    assert_eq!(s["converged"], true);
    assert_eq!(s["variant"], "multiplicative_sync");
    assert_eq!(s["dofs"], 1024);
    assert_eq!(s["dofs_per_level"], serde_json::json!([1024, 256, 64]));
    assert!(s["relative_residual"].as_f64().unwrap() <= 1e-8);
    assert!(s["wall_seconds"].as_f64().unwrap() >= 0.0);
    let iterations = s["iterations"].as_u64().unwrap() as usize;
    let rows = run.csv("history.csv");
    // initial + three minimizations per multiplicative cycle + final
    assert_eq!(rows.len() - 1, 2 + 3 * iterations);
    let residuals: Vec<f64> = column(&rows, "residual").iter().map(|v| v.parse().unwrap()).collect();
    assert!(residuals.windows(2).all(|w| w[1] <= w[0]));
    assert!(run.read("config.toml").contains("cells_per_axis = 32"));
}

#[test]
fn negative_coefficient_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let run = orthomg(&tmp, "solve", "problem.k_inner = -1.0\n", &[]);
    assert_eq!(run.code(), 2);
    assert!(run.stderr().contains("problem.k_inner"), "{}", run.stderr());
    assert!(!run.dir.exists());
}

#[test]
fn unknown_key_is_rejected_with_line() {
    let tmp = TempDir::new().unwrap();
    let run = orthomg(&tmp, "solve", "seed = 1\n[smoother]\noverlapp = 2\n", &[]);
    assert_eq!(run.code(), 2);
    let err = run.stderr();
    assert!(err.contains("overlapp") && err.contains("line 3"), "{err}");
}

#[test]
fn iteration_cap_gives_distinct_exit_code() {
    let tmp = TempDir::new().unwrap();
    let run = orthomg(&tmp, "solve", &format!("{SMALL}solver.max_outer_iterations = 1\nsmoother.kind = \"block_jacobi\"\n"), &[]);
    assert_eq!(run.code(), 3, "{}", run.stderr());
    assert_eq!(run.summary()["converged"], false);
    assert_eq!(run.summary()["iterations"], 1);
}

#[test]
fn task_parallel_worker_minimum_and_env_override() {
    let tmp = TempDir::new().unwrap();
    let cfg = format!("{SMALL}solver.variant = \"additive_task_parallel\"\noutput.trace = true\n");
    let run = orthomg(&tmp, "solve", &cfg, &[]);
    assert_eq!(run.code(), 2);
    assert!(run.stderr().contains("at least 3 workers"), "{}", run.stderr());

    let run = orthomg(&tmp, "solve", &cfg, &[("ORTHOMG_WORKERS", "3")]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    assert_eq!(run.summary()["workers"], 3);
    let trace = run.csv("trace.csv");
    assert_eq!(trace[0].join(","), "time_s,level,role,worker,event,cycle");
    assert!(column(&trace, "event").contains(&"coarse_correction"));
    assert!(column(&trace, "event").contains(&"terminate"));

    let run = orthomg(&tmp, "solve", &cfg, &[("ORTHOMG_WORKERS", "many")]);
    assert_eq!(run.code(), 2);
    assert!(run.stderr().contains("ORTHOMG_WORKERS"));
}

#[test]
fn deterministic_runs_reproduce_history() {
    let cfg = format!(
        "{SMALL}seed = 11\nworkers = 4\nproblem.rhs = \"random\"\nsolver.variant = \"hybrid\"\nsolver.scheduler = \"deterministic\"\nsolver.sweeps_per_cycle = 2\n"
    );
    let first = TempDir::new().unwrap();
    let second = TempDir::new().unwrap();
    let a = orthomg(&first, "solve", &cfg, &[]);
    let b = orthomg(&second, "solve", &cfg, &[]);
    assert_eq!(a.code(), 0, "{}", a.stderr());
    assert_eq!(a.read("history.csv"), b.read("history.csv"));
    assert_eq!(a.summary()["digest"], b.summary()["digest"]);
    let other = TempDir::new().unwrap();
    let c = orthomg(&other, "solve", &cfg.replace("seed = 11", "seed = 12"), &[]);
    assert_ne!(a.read("history.csv"), c.read("history.csv"));
}

#[test]
fn exported_system_round_trips() {
    let tmp = TempDir::new().unwrap();
    let run = orthomg(&tmp, "solve", "problem.cells_per_axis = 8\nhierarchy.min_coarse_dofs = 16\noutput.export_system = true\n", &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let a = orthomg::sparse::read_matrix_market(std::io::BufReader::new(fs::File::open(run.dir.join("matrix.mtx")).unwrap())).unwrap();
    let (expected, _) = orthomg::assemble_poisson(&orthomg::ProblemSpec {
        cells_per_axis: 8,
        ..orthomg::ProblemSpec::default()
    })
    .unwrap();
    assert_eq!(a, expected);
    assert_eq!(run.read("rhs.csv").lines().count(), 65);
}

#[test]
fn compare_runs_all_variants() {
    let tmp = TempDir::new().unwrap();
    let run = orthomg(&tmp, "compare", &format!("{SMALL}workers = 3\nrepetitions = 2\n"), &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let rows = run.csv("compare.csv");
    assert_eq!(rows.len(), 5);
    assert_eq!(column(&rows, "variant"), vec!["additive_sync", "multiplicative_sync", "additive_task_parallel", "hybrid"]);
    assert!(column(&rows, "converged").iter().all(|c| *c == "true"));
    let stat = |name| -> Vec<f64> { column(&rows, name).iter().map(|v| v.parse().unwrap()).collect() };
    for ((mean, min), max) in stat("mean_seconds").into_iter().zip(stat("min_seconds")).zip(stat("max_seconds")) {
        assert!(min <= mean && mean <= max);
    }
    let runs = run.csv("runs.csv");
    assert_eq!(runs.len(), 1 + 4 * 2);
    assert_eq!(column(&runs, "repetition"), vec!["0", "1", "0", "1", "0", "1", "0", "1"]);
    // each variant row is traceable to the digest of its own run configuration
    let digests = column(&rows, "digest");
    assert_eq!(digests.iter().collect::<std::collections::HashSet<_>>().len(), 4);
    assert!(column(&runs, "digest").iter().all(|d| digests.contains(d)));
}

#[test]
fn compare_single_variant_without_averaging() {
    let tmp = TempDir::new().unwrap();
    let run = orthomg(&tmp, "compare", &format!("{SMALL}repetitions = 1\ncompare.variants = [\"multiplicative_sync\"]\n"), &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let rows = run.csv("compare.csv");
    assert_eq!(rows.len(), 2);
    let runs = run.csv("runs.csv");
    assert_eq!(column(&rows, "mean_seconds"), column(&rows, "min_seconds"));
    let seconds: f64 = column(&runs, "seconds")[0].parse().unwrap();
    let mean: f64 = column(&rows, "mean_seconds")[0].parse().unwrap();
    assert!((seconds - mean).abs() <= 1e-6);
}

#[test]
fn compare_records_failed_variant_and_continues() {
    let tmp = TempDir::new().unwrap();
    let cfg = format!(
        "{SMALL}workers = 3\nrepetitions = 1\nsolver.scheduler = \"deterministic\"\nsolver.watchdog_seconds = 1e-9\ncompare.variants = [\"additive_task_parallel\", \"multiplicative_sync\"]\n"
    );
    let run = orthomg(&tmp, "compare", &cfg, &[]);
    assert_eq!(run.code(), 3);
    let text = run.read("compare.csv");
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[1].starts_with("additive_task_parallel") && lines[1].contains("failed:"), "{}", lines[1]);
    assert!(lines[2].starts_with("multiplicative_sync") && lines[2].contains(",converged,"), "{}", lines[2]);
}

#[test]
fn scaling_sweep_with_ideal_column() {
    let tmp = TempDir::new().unwrap();
    let cfg = format!(
        "{SMALL}repetitions = 1\nscaling.workers = [1, 2]\nscaling.sizes = [32]\nscaling.variants = [\"multiplicative_sync\", \"additive_task_parallel\"]\n"
    );
    let run = orthomg(&tmp, "scaling", &cfg, &[]);
    assert_eq!(run.code(), 0, "{}", run.stderr());
    let rows = run.csv("scaling.csv");
    assert_eq!(rows[0].join(","), "workers,n,variant,mean_seconds,min_seconds,max_seconds,mean_iterations,converged,ideal_seconds,requested_workers,warning");
    assert_eq!(rows.len(), 5);
    let num = |name, i: usize| -> f64 { column(&rows, name)[i].parse().unwrap() };
    assert!((num("ideal_seconds", 0) - num("mean_seconds", 0)).abs() <= 1e-6);
    assert!((num("ideal_seconds", 1) - num("mean_seconds", 0) / 2.0).abs() <= 1e-6);
    // task-parallel needs three workers on three levels
    assert_eq!(column(&rows, "workers")[2..], ["3", "3"]);
    assert!(column(&rows, "warning")[2].contains("raised from 1"));
    assert_eq!(column(&rows, "requested_workers")[2..], ["1", "2"]);
}

#[test]
fn output_directory_defaults_to_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, format!("{SMALL}output.directory = \"from-config\"\n")).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_orthomg"))
        .current_dir(tmp.path())
        .args(["solve", "--config"])
        .arg(&cfg)
        .env_remove("ORTHOMG_WORKERS")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(Path::new(&tmp.path().join("from-config/summary.json")).exists());
}
