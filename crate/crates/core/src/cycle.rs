//! Synchronous orthonormalization multigrid cycles.
//!
//! Every smoother and coarse-grid correction passes through residual
//! minimization on its level. The multiplicative ordering pre-smooths,
//! applies the coarse correction and post-smooths, updating the residual after
//! each step. The additive ordering computes the smoother and coarse
//! corrections from the same cycle-start residual and combines them at the end.

use crate::criteria::{level_converged, ConvergenceCriteria};
use crate::error::{Error, Result};
use crate::history::{ConvergenceHistory, RecordKind};
use crate::multigrid::Multigrid;
use crate::resmin::{SearchSpace, DEFAULT_MAX_COLUMNS};
use crate::sparse::{all_finite, norm2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpdateOrder {
    Additive,
    Multiplicative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleConfig {
    pub order: UpdateOrder,
    pub criteria: ConvergenceCriteria,
    pub max_outer_iterations: usize,
    pub history_enabled: bool,
    /// Search-space size at which the minimization restarts from the current iterate.
    pub max_search_columns: usize,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            order: UpdateOrder::Multiplicative,
            criteria: ConvergenceCriteria::default(),
            max_outer_iterations: 100,
            history_enabled: true,
            max_search_columns: DEFAULT_MAX_COLUMNS,
        }
    }
}

impl CycleConfig {
    pub fn with_order(mut self, order: UpdateOrder) -> Self {
        self.order = order;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.criteria.validate()?;
        if self.max_outer_iterations == 0 {
            return Err(Error::InvalidInput("max_outer_iterations must be at least 1".into()));
        }
        if self.max_search_columns == 0 {
            return Err(Error::InvalidInput("max_search_columns must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of a finest-level solve.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub history: ConvergenceHistory,
    /// Outer iterations (cycles) performed on the finest level.
    pub iterations: usize,
    pub converged: bool,
    pub initial_residual: f64,
    pub final_residual: f64,
}

impl SolveOutcome {
    pub fn relative_residual(&self) -> f64 {
        if self.initial_residual == 0.0 {
            0.0
        } else {
            self.final_residual / self.initial_residual
        }
    }
}

pub(crate) struct LevelOutcome {
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub initial_residual: f64,
}

/// Solver for the system on the next coarser level: takes the restricted
/// residual, returns the coarse correction.
pub(crate) type CoarseSolve<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>> + 'a;

pub(crate) fn check_system(mg: &Multigrid, level: usize, b: &[f64], x0: Option<&[f64]>) -> Result<()> {
    let n = mg.matrix(level).n_rows();
    crate::error::check_len("right-hand side", n, b.len())?;
    if let Some(x0) = x0 {
        crate::error::check_len("initial guess", n, x0.len())?;
        if !all_finite(x0) {
            return Err(Error::NumericalFailure("initial guess is not finite".into()));
        }
    }
    if !all_finite(b) {
        return Err(Error::NumericalFailure("right-hand side is not finite".into()));
    }
    Ok(())
}

/// Residual minimization with the restart cap, finest-level history, and
/// NaN screening applied uniformly by every cycle variant.
pub(crate) struct Minimizer<'h> {
    pub space: SearchSpace,
    pub history: Option<&'h mut ConvergenceHistory>,
    max_columns: usize,
}

impl<'h> Minimizer<'h> {
    pub fn new(
        x0: Vec<f64>,
        r0: Vec<f64>,
        max_columns: usize,
        mut history: Option<&'h mut ConvergenceHistory>,
    ) -> Result<Self> {
        if let Some(h) = history.as_deref_mut() {
            h.push(RecordKind::Initial, norm2(&r0));
        }
        Ok(Self {
            space: SearchSpace::new(x0, r0)?,
            history,
            max_columns,
        })
    }

    pub fn update(&mut self, a: &crate::sparse::CsrMatrix, z: Vec<f64>, kind: RecordKind) -> Result<f64> {
        if !all_finite(&z) {
            return Err(Error::NumericalFailure(format!(
                "{kind} correction contains non-finite values"
            )));
        }
        self.space.restart_if_full(self.max_columns);
        self.space.update(a, z)?;
        let norm = self.space.residual_norm();
        if let Some(h) = self.history.as_deref_mut() {
            h.push(kind, norm);
        }
        Ok(norm)
    }

    pub fn residual(&self) -> &[f64] {
        self.space.residual()
    }

    pub fn residual_norm(&self) -> f64 {
        self.space.residual_norm()
    }

    pub fn finish(mut self) -> (Vec<f64>, Vec<f64>) {
        let norm = self.space.residual_norm();
        if let Some(h) = self.history.as_deref_mut() {
            h.push(RecordKind::Final, norm);
        }
        self.space.into_solution()
    }
}

/// One synchronous solve on `level` with the given update order. Coarse
/// corrections come from `coarse`.
pub(crate) fn sync_level(
    mg: &Multigrid,
    level: usize,
    b: &[f64],
    x0: Option<&[f64]>,
    order: UpdateOrder,
    cfg: &CycleConfig,
    coarse: &CoarseSolve<'_>,
    history: Option<&mut ConvergenceHistory>,
) -> Result<LevelOutcome> {
    let a = mg.matrix(level);
    let x0 = x0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; b.len()]);
    let r0 = a.residual(b, &x0)?;
    let r0_norm = norm2(&r0);
    let mut rm = Minimizer::new(x0, r0, cfg.max_search_columns, history)?;
    let mut iterations = 0;
    let mut converged = false;

    loop {
        if level_converged(level, rm.residual_norm(), r0_norm, iterations, &cfg.criteria) {
            converged = true;
            break;
        }
        if iterations >= cfg.max_outer_iterations {
            break;
        }
        if level == mg.coarsest_index() {
            let z = mg.coarsest_solver().solve(rm.residual())?;
            rm.update(a, z, RecordKind::Coarse)?;
            iterations += 1;
            continue;
        }
        match order {
            UpdateOrder::Multiplicative => {
                let z = mg.smooth(level, rm.residual())?;
                rm.update(a, z, RecordKind::Smoother)?;
                let zc = coarse(&mg.restrict(level, rm.residual())?)?;
                let z = mg.prolongate(level, &zc)?;
                rm.update(a, z, RecordKind::Coarse)?;
                let z = mg.smooth(level, rm.residual())?;
                rm.update(a, z, RecordKind::Smoother)?;
            }
            UpdateOrder::Additive => {
                let start = rm.residual().to_vec();
                let zs = mg.smooth(level, &start)?;
                let zc = coarse(&mg.restrict(level, &start)?)?;
                let z = mg.prolongate(level, &zc)?;
                rm.update(a, zs, RecordKind::Smoother)?;
                rm.update(a, z, RecordKind::Coarse)?;
            }
        }
        iterations += 1;
    }
    let (x, r) = rm.finish();
    Ok(LevelOutcome {
        x,
        r,
        iterations,
        converged,
        initial_residual: r0_norm,
    })
}

/// Approximate solve of `A^level z = rhs` by synchronous recursion, or directly on the coarsest level.
pub(crate) fn sync_coarse_solve(
    mg: &Multigrid,
    level: usize,
    rhs: &[f64],
    order: UpdateOrder,
    cfg: &CycleConfig,
) -> Result<Vec<f64>> {
    if level == mg.coarsest_index() {
        return mg.coarsest_solver().solve(rhs);
    }
    let coarse = |rc: &[f64]| sync_coarse_solve(mg, level + 1, rc, order, cfg);
    Ok(sync_level(mg, level, rhs, None, order, cfg, &coarse, None)?.x)
}

fn solve_sync(mg: &Multigrid, b: &[f64], x0: &[f64], cfg: &CycleConfig, order: UpdateOrder) -> Result<SolveOutcome> {
    cfg.validate()?;
    check_system(mg, 0, b, Some(x0))?;
    let mut history = ConvergenceHistory::new();
    let coarse = |rc: &[f64]| sync_coarse_solve(mg, 1, rc, order, cfg);
    let out = sync_level(
        mg,
        0,
        b,
        Some(x0),
        order,
        cfg,
        &coarse,
        cfg.history_enabled.then_some(&mut history),
    )?;
    Ok(SolveOutcome {
        final_residual: norm2(&out.r),
        x: out.x,
        r: out.r,
        history,
        iterations: out.iterations,
        converged: out.converged,
        initial_residual: out.initial_residual,
    })
}

/// Multiplicative ordering: pre-smooth, coarse correction, post-smooth, each minimized.
pub fn orthomg_solve_multiplicative(mg: &Multigrid, b: &[f64], x0: &[f64], cfg: &CycleConfig) -> Result<SolveOutcome> {
    solve_sync(mg, b, x0, cfg, UpdateOrder::Multiplicative)
}

/// Additive ordering: post-smoother and coarse correction from the same
/// cycle-start residual, minimized smoother first, then coarse.
pub fn orthomg_solve_additive(mg: &Multigrid, b: &[f64], x0: &[f64], cfg: &CycleConfig) -> Result<SolveOutcome> {
    solve_sync(mg, b, x0, cfg, UpdateOrder::Additive)
}

/// Synchronous solve using the ordering in `cfg.order`.
pub fn orthomg_solve(mg: &Multigrid, b: &[f64], x0: &[f64], cfg: &CycleConfig) -> Result<SolveOutcome> {
    solve_sync(mg, b, x0, cfg, cfg.order)
}
