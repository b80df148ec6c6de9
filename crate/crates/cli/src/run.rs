//! Assembly, timed solves and the per-run records behind every report.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use orthomg::async_mg::Trace;
use orthomg::sparse::write_matrix_market;
use orthomg::{build_hierarchy, ConvergenceHistory, Multigrid, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{RhsMode, RunConfig};

/// Assembled hierarchy and right-hand side, shared by every run on the same grid.
pub struct System {
    pub mg: Multigrid,
    pub b: Vec<f64>,
    pub cells_per_axis: usize,
}

impl System {
    pub fn dofs(&self) -> usize {
        self.b.len()
    }

    pub fn levels(&self) -> usize {
        self.mg.n_levels()
    }
}

pub fn assemble(cfg: &RunConfig, cells_per_axis: usize) -> Result<System> {
    let spec = orthomg::ProblemSpec {
        cells_per_axis,
        ..cfg.problem_spec()
    };
    let (hierarchy, b) = build_hierarchy(&spec, cfg.hierarchy.min_coarse_dofs)?;
    let mg = Multigrid::new(hierarchy, &cfg.smoother_config())?;
    let b = match cfg.problem.rhs {
        RhsMode::Constant => b,
        RhsMode::Zero => vec![0.0; b.len()],
        RhsMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            (0..b.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()
        }
    };
    Ok(System { mg, b, cells_per_axis })
}

pub fn export_system(system: &System, dir: &Path) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(dir.join("matrix.mtx"))?);
    write_matrix_market(system.mg.matrix(0), &mut out)?;
    out.flush()?;
    let mut out = BufWriter::new(fs::File::create(dir.join("rhs.csv"))?);
    writeln!(out, "index,value")?;
    for (i, v) in system.b.iter().enumerate() {
        writeln!(out, "{i},{v:e}")?;
    }
    out.flush()?;
    Ok(())
}

/// One timed solve.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub digest: String,
    pub variant: String,
    pub cells_per_axis: usize,
    pub dofs: usize,
    pub levels: usize,
    pub workers: usize,
    pub repetition: usize,
    pub seconds: f64,
    pub iterations: usize,
    pub initial_residual: f64,
    pub final_residual: f64,
    pub relative_residual: f64,
    pub converged: bool,
    pub error: Option<String>,
}

pub const RUNS_HEADER: &str =
    "digest,variant,n,dofs,levels,workers,repetition,seconds,iterations,initial_residual,final_residual,relative_residual,converged,error";

impl RunRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.6},{},{:e},{:e},{:e},{},{}",
            self.digest,
            self.variant,
            self.cells_per_axis,
            self.dofs,
            self.levels,
            self.workers,
            self.repetition,
            self.seconds,
            self.iterations,
            self.initial_residual,
            self.final_residual,
            self.relative_residual,
            self.converged,
            csv_field(self.error.as_deref().unwrap_or(""))
        )
    }
}

/// Quote a free-text CSV field when needed.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}

/// Configuration of a single run; its digest identifies the run in reports.
pub fn run_config(cfg: &RunConfig, variant: Variant, workers: usize, cells_per_axis: usize) -> RunConfig {
    let mut run = cfg.clone();
    run.solver.variant = variant.as_str().into();
    run.workers = workers;
    run.problem.cells_per_axis = cells_per_axis;
    run
}

/// Solve once, timing the solver call only. Solver errors become a failed record.
pub fn timed_solve(
    cfg: &RunConfig,
    system: &System,
    variant: Variant,
    workers: usize,
    repetition: usize,
    trace: Option<&Trace>,
) -> (RunRecord, Option<ConvergenceHistory>) {
    let mut opts = cfg.solver_options(variant, workers);
    opts.async_options.trace = trace.cloned();
    let x0 = vec![0.0; system.dofs()];
    let start = Instant::now();
    let result = orthomg::solver::solve(&system.mg, &system.b, &x0, &opts);
    let seconds = start.elapsed().as_secs_f64();
    let mut record = RunRecord {
        digest: run_config(cfg, variant, workers, system.cells_per_axis).digest(),
        variant: variant.as_str().into(),
        cells_per_axis: system.cells_per_axis,
        dofs: system.dofs(),
        levels: system.levels(),
        workers,
        repetition,
        seconds,
        iterations: 0,
        initial_residual: f64::NAN,
        final_residual: f64::NAN,
        relative_residual: f64::NAN,
        converged: false,
        error: None,
    };
    match result {
        Ok(out) => {
            record.iterations = out.iterations;
            record.initial_residual = out.initial_residual;
            record.final_residual = out.final_residual;
            record.relative_residual = out.relative_residual();
            record.converged = out.converged;
            (record, Some(out.history))
        }
        Err(e) => {
            record.error = Some(e.to_string());
            (record, None)
        }
    }
}

/// Mean, min and max of the wall times of repeated runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl TimeStats {
    pub fn of(records: &[RunRecord]) -> Self {
        let times: Vec<f64> = records.iter().map(|r| r.seconds).collect();
        let mean = times.iter().sum::<f64>() / times.len() as f64;
        let min = times.iter().copied().fold(f64::INFINITY, f64::min);
        let max = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { mean, min, max }
    }
}

pub fn write_runs(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?);
    writeln!(out, "{RUNS_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    out.flush()?;
    Ok(())
}
