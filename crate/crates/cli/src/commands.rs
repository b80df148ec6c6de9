//! The `solve`, `compare` and `scaling` subcommands.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use orthomg::async_mg::Trace;
use orthomg::Variant;
use serde::Serialize;

use crate::config::RunConfig;
use crate::run::{assemble, csv_field, export_system, timed_solve, write_runs, RunRecord, TimeStats};

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    NotConverged,
}

impl Status {
    fn all(converged: impl IntoIterator<Item = bool>) -> Self {
        if converged.into_iter().all(|c| c) {
            Status::Converged
        } else {
            Status::NotConverged
        }
    }
}

pub const COMPARE_HEADER: &str =
    "variant,workers,repetitions,mean_seconds,min_seconds,max_seconds,mean_iterations,final_residual,relative_residual,converged,status,digest,warning";

pub const SCALING_HEADER: &str =
    "workers,n,variant,mean_seconds,min_seconds,max_seconds,mean_iterations,converged,ideal_seconds,requested_workers,warning";

#[derive(Debug, Serialize)]
struct Summary<'a> {
    digest: String,
    variant: &'a str,
    dimension: usize,
    cells_per_axis: usize,
    dofs: usize,
    dofs_per_level: Vec<usize>,
    workers: usize,
    smoother: &'a crate::config::SmootherSection,
    iterations: usize,
    converged: bool,
    initial_residual: f64,
    final_residual: f64,
    relative_residual: f64,
    wall_seconds: f64,
    error: Option<&'a str>,
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

fn prepare_output(cfg: &RunConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    fs::write(dir.join("config.toml"), cfg.to_toml()).context("cannot write config.toml")?;
    Ok(())
}

fn hardware_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Worker count actually used for `variant`, with a warning when it differs from
/// the request or exceeds the machine.
fn effective_workers(cfg: &RunConfig, variant: Variant, levels: usize, requested: usize) -> (usize, Vec<String>) {
    let mut warnings = Vec::new();
    let needed = variant.min_workers(levels, cfg.coarsest_workers);
    let workers = requested.max(needed);
    if workers != requested {
        warnings.push(format!("raised from {requested} to the minimum of {needed} workers"));
    }
    let threads = hardware_threads();
    if workers > threads {
        warnings.push(format!("{workers} workers exceed {threads} hardware threads"));
    }
    (workers, warnings)
}

/// Run `cfg.repetitions` solves of one configuration.
fn repeat(cfg: &RunConfig, system: &crate::run::System, variant: Variant, workers: usize) -> Vec<RunRecord> {
    (0..cfg.repetitions)
        .map(|rep| timed_solve(cfg, system, variant, workers, rep, None).0)
        .collect()
}

fn mean_iterations(records: &[RunRecord]) -> f64 {
    records.iter().map(|r| r.iterations as f64).sum::<f64>() / records.len() as f64
}

pub fn solve(cfg: &RunConfig, dir: &Path) -> Result<Status> {
    let variant = cfg.variant()?;
    prepare_output(cfg, dir)?;
    let system = assemble(cfg, cfg.problem.cells_per_axis)?;
    if cfg.output.export_system {
        export_system(&system, dir)?;
    }
    let trace = cfg.output.trace.then(Trace::new);
    let (record, history) = timed_solve(cfg, &system, variant, cfg.workers, 0, trace.as_ref());

    if let Some(history) = &history {
        history.write_csv(create(&dir.join("history.csv"))?)?;
    }
    if let Some(trace) = &trace {
        let mut out = create(&dir.join("trace.csv"))?;
        trace.write_csv(&mut out)?;
        out.flush()?;
    }
    let summary = Summary {
        digest: cfg.digest(),
        variant: variant.as_str(),
        dimension: cfg.problem.dimension,
        cells_per_axis: system.cells_per_axis,
        dofs: system.dofs(),
        dofs_per_level: system.mg.hierarchy().dofs_per_level(),
        workers: cfg.workers,
        smoother: &cfg.smoother,
        iterations: record.iterations,
        converged: record.converged,
        initial_residual: record.initial_residual,
        final_residual: record.final_residual,
        relative_residual: record.relative_residual,
        wall_seconds: record.seconds,
        error: record.error.as_deref(),
    };
    let mut out = create(&dir.join("summary.json"))?;
    serde_json::to_writer_pretty(&mut out, &summary)?;
    writeln!(out)?;
    out.flush()?;

    if let Some(e) = &record.error {
        anyhow::bail!("solve failed: {e}");
    }
    println!(
        "{variant}: {} iterations, relative residual {:.3e}, {:.3} s, converged={}",
        record.iterations, record.relative_residual, record.seconds, record.converged
    );
    Ok(Status::all([record.converged]))
}

pub fn compare(cfg: &RunConfig, dir: &Path) -> Result<Status> {
    let variants = cfg.compare_variants()?;
    prepare_output(cfg, dir)?;
    let system = assemble(cfg, cfg.problem.cells_per_axis)?;
    let mut out = create(&dir.join("compare.csv"))?;
    writeln!(out, "{COMPARE_HEADER}")?;
    let mut all = Vec::new();
    let mut converged = Vec::new();
    for variant in variants {
        let (workers, warnings) = effective_workers(cfg, variant, system.levels(), cfg.workers);
        let records = repeat(cfg, &system, variant, workers);
        let stats = TimeStats::of(&records);
        let failure = records.iter().find_map(|r| r.error.clone());
        let ok = failure.is_none() && records.iter().all(|r| r.converged);
        let status = match &failure {
            Some(e) => format!("failed: {e}"),
            None if ok => "converged".into(),
            None => "not_converged".into(),
        };
        let last = records.last().expect("at least one repetition");
        writeln!(
            out,
            "{variant},{workers},{},{:.6},{:.6},{:.6},{:.2},{:e},{:e},{ok},{},{},{}",
            records.len(),
            stats.mean,
            stats.min,
            stats.max,
            mean_iterations(&records),
            last.final_residual,
            last.relative_residual,
            csv_field(&status),
            last.digest,
            csv_field(&warnings.join("; "))
        )?;
        println!("{variant}: mean {:.3} s, {:.1} iterations, {status}", stats.mean, mean_iterations(&records));
        converged.push(ok);
        all.extend(records);
    }
    out.flush()?;
    write_runs(&dir.join("runs.csv"), &all)?;
    Ok(Status::all(converged))
}

pub fn scaling(cfg: &RunConfig, dir: &Path) -> Result<Status> {
    let variants = cfg.scaling_variants()?;
    prepare_output(cfg, dir)?;
    let mut out = create(&dir.join("scaling.csv"))?;
    writeln!(out, "{SCALING_HEADER}")?;
    let mut all = Vec::new();
    let mut converged = Vec::new();
    for &n in &cfg.scaling.sizes {
        let system = assemble(cfg, n)?;
        for &variant in &variants {
            let mut reference: Option<(usize, f64)> = None;
            for &requested in &cfg.scaling.workers {
                let (workers, warnings) = effective_workers(cfg, variant, system.levels(), requested);
                let records = repeat(cfg, &system, variant, workers);
                let stats = TimeStats::of(&records);
                let ok = records.iter().all(|r| r.converged && r.error.is_none());
                let mut warnings = warnings;
                if let Some(e) = records.iter().find_map(|r| r.error.clone()) {
                    warnings.push(format!("failed: {e}"));
                }
                let (w_ref, t_ref) = *reference.get_or_insert((workers, stats.mean));
                let ideal = t_ref * w_ref as f64 / workers as f64;
                writeln!(
                    out,
                    "{workers},{n},{variant},{:.6},{:.6},{:.6},{:.2},{ok},{ideal:.6},{requested},{}",
                    stats.mean,
                    stats.min,
                    stats.max,
                    mean_iterations(&records),
                    csv_field(&warnings.join("; "))
                )?;
                println!("n={n} {variant} workers={workers}: mean {:.3} s (ideal {ideal:.3} s)", stats.mean);
                converged.push(ok);
                all.extend(records);
            }
        }
    }
    out.flush()?;
    write_runs(&dir.join("runs.csv"), &all)?;
    Ok(Status::all(converged))
}
