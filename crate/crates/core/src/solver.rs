//! One entry point for the four solver configurations.

use std::fmt;
use std::str::FromStr;

use crate::async_mg::{assign_groups, async_solve, hybrid_solve, AsyncOptions};
use crate::cycle::{orthomg_solve_additive, orthomg_solve_multiplicative, CycleConfig, SolveOutcome};
use crate::error::{Error, Result};
use crate::multigrid::Multigrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    AdditiveSync,
    MultiplicativeSync,
    AdditiveTaskParallel,
    Hybrid,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::AdditiveSync,
        Variant::MultiplicativeSync,
        Variant::AdditiveTaskParallel,
        Variant::Hybrid,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::AdditiveSync => "additive_sync",
            Variant::MultiplicativeSync => "multiplicative_sync",
            Variant::AdditiveTaskParallel => "additive_task_parallel",
            Variant::Hybrid => "hybrid",
        }
    }

    pub fn is_task_parallel(self) -> bool {
        matches!(self, Variant::AdditiveTaskParallel | Variant::Hybrid)
    }

    /// Fewest workers the variant can run with on a hierarchy of `n_levels`.
    pub fn min_workers(self, n_levels: usize, coarsest_workers: usize) -> usize {
        if self.is_task_parallel() {
            n_levels.saturating_sub(1) + coarsest_workers
        } else {
            1
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown solver variant '{s}' (expected one of additive_sync, multiplicative_sync, additive_task_parallel, hybrid)"
                ))
            })
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub variant: Variant,
    pub cycle: CycleConfig,
    pub workers: usize,
    pub coarsest_workers: usize,
    pub async_options: AsyncOptions,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            variant: Variant::MultiplicativeSync,
            cycle: CycleConfig::default(),
            workers: 1,
            coarsest_workers: 1,
            async_options: AsyncOptions::default(),
        }
    }
}

/// Run the configured variant. Synchronous variants run their smoothers on a
/// pool of `workers` threads; task-parallel variants split the workers into
/// per-level groups.
pub fn solve(mg: &Multigrid, b: &[f64], x0: &[f64], opts: &SolverOptions) -> Result<SolveOutcome> {
    if opts.workers == 0 {
        return Err(Error::InvalidInput("workers must be at least 1".into()));
    }
    match opts.variant {
        Variant::AdditiveSync | Variant::MultiplicativeSync => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(opts.workers)
                .build()
                .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
            pool.install(|| match opts.variant {
                Variant::AdditiveSync => orthomg_solve_additive(mg, b, x0, &opts.cycle),
                _ => orthomg_solve_multiplicative(mg, b, x0, &opts.cycle),
            })
        }
        Variant::AdditiveTaskParallel | Variant::Hybrid => {
            let ga = assign_groups(&mg.hierarchy().dofs_per_level(), opts.workers, opts.coarsest_workers)?;
            if opts.variant == Variant::Hybrid {
                hybrid_solve(mg, b, x0, &opts.cycle, &ga, &opts.async_options)
            } else {
                async_solve(mg, b, x0, &opts.cycle, &ga, &opts.async_options)
            }
        }
    }
}
