use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender, TryRecvError};
use std::sync::Arc;
use std::time::Duration;

use super::groups::GroupAssignment;
use super::message::{ExchangeMessage, MessageKind, Role, SchedulerMode};
use super::trace::{Trace, TraceEvent};
use crate::criteria::level_converged;
use crate::cycle::{
    check_system, sync_coarse_solve, sync_level, CycleConfig, LevelOutcome, Minimizer, SolveOutcome,
    UpdateOrder,
};
use crate::error::{Error, Result};
use crate::history::{ConvergenceHistory, RecordKind};
use crate::multigrid::Multigrid;
use crate::sparse::norm2;

pub const DEFAULT_WATCHDOG: Duration = Duration::from_secs(60);

/// Which group applies the transfer operators of a level boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TransferPlacement {
    /// Restriction and prolongation both run on the coarse group.
    #[default]
    CoarseGroup,
    /// Each transfer runs on the group that consumes its result: restriction
    /// on the coarse group, prolongation on the smoother group.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransferRoles {
    pub restriction: Role,
    pub prolongation: Role,
}

/// Roles applying `R` and `P` between `level` and `level + 1`; `None` when
/// `level` is the coarsest (no transfers there).
pub fn intergrid_placement(n_levels: usize, level: usize, placement: TransferPlacement) -> Option<TransferRoles> {
    if level + 1 >= n_levels {
        return None;
    }
    Some(match placement {
        TransferPlacement::CoarseGroup => TransferRoles {
            restriction: Role::Coarse,
            prolongation: Role::Coarse,
        },
        TransferPlacement::Split => TransferRoles {
            restriction: Role::Coarse,
            prolongation: Role::Smoother,
        },
    })
}

/// Test hook: extra latency injected before each smoother sweep or coarse
/// solve, keyed by `(level, role, cycle)`.
pub type DelayHook = Arc<dyn Fn(usize, Role, usize) -> Duration + Send + Sync>;

#[derive(Clone)]
pub struct AsyncOptions {
    pub scheduler: SchedulerMode,
    pub watchdog: Duration,
    pub placement: TransferPlacement,
    pub trace: Option<Trace>,
    pub delay: Option<DelayHook>,
}

impl Default for AsyncOptions {
    fn default() -> Self {
        Self {
            scheduler: SchedulerMode::Realtime,
            watchdog: DEFAULT_WATCHDOG,
            placement: TransferPlacement::CoarseGroup,
            trace: None,
            delay: None,
        }
    }
}

impl std::fmt::Debug for AsyncOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AsyncOptions")
            .field("scheduler", &self.scheduler)
            .field("watchdog", &self.watchdog)
            .field("placement", &self.placement)
            .field("trace", &self.trace.is_some())
            .field("delay", &self.delay.is_some())
            .finish()
    }
}

impl AsyncOptions {
    pub fn with_scheduler(mut self, scheduler: SchedulerMode) -> Self {
        self.scheduler = scheduler;
        self
    }

    pub fn deterministic(sweeps_per_cycle: usize) -> Self {
        Self::default().with_scheduler(SchedulerMode::Deterministic { sweeps_per_cycle })
    }
}

struct Ctx<'a> {
    mg: &'a Multigrid,
    cfg: &'a CycleConfig,
    ga: &'a GroupAssignment,
    opts: &'a AsyncOptions,
    pools: Vec<rayon::ThreadPool>,
}

impl<'a> Ctx<'a> {
    fn new(mg: &'a Multigrid, cfg: &'a CycleConfig, ga: &'a GroupAssignment, opts: &'a AsyncOptions) -> Result<Self> {
        cfg.validate()?;
        opts.scheduler.validate()?;
        if ga.n_levels() != mg.n_levels() {
            return Err(Error::InvalidInput(format!(
                "group assignment covers {} levels, hierarchy has {}",
                ga.n_levels(),
                mg.n_levels()
            )));
        }
        let pools = (0..mg.n_levels())
            .map(|level| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(ga.smoother_count(level))
                    .thread_name(move |i| format!("orthomg-l{level}-s{i}"))
                    .build()
                    .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            mg,
            cfg,
            ga,
            opts,
            pools,
        })
    }

    fn trace(&self, level: usize, role: Role, event: TraceEvent, cycle: usize) {
        if let Some(t) = &self.opts.trace {
            let worker = match role {
                Role::Smoother => self.ga.smoother_ids(level).start,
                Role::Coarse => self.ga.coarse_ids(level).start,
            };
            t.record(level, role, worker, event, cycle);
        }
    }

    fn delay(&self, level: usize, role: Role, cycle: usize) {
        if let Some(hook) = &self.opts.delay {
            let d = hook(level, role, cycle);
            if !d.is_zero() {
                std::thread::sleep(d);
            }
        }
    }

    fn send(&self, tx: &Sender<ExchangeMessage>, level: usize, role: Role, kind: MessageKind, cycle: usize) -> Result<()> {
        self.trace(level, role, TraceEvent::Sent(kind.label()), cycle);
        let partner = match role {
            Role::Smoother => Role::Coarse,
            Role::Coarse => Role::Smoother,
        };
        tx.send(ExchangeMessage::new(kind, cycle)).map_err(|_| hung_up(level, partner))
    }

    /// Correction for the system on `level` (a coarse level of some boundary).
    fn coarse_solve(&self, level: usize, rhs: &[f64]) -> Result<Vec<f64>> {
        if level == self.mg.coarsest_index() {
            return self.mg.coarsest_solver().solve(rhs);
        }
        if self.ga.coarse_count(level - 1) >= 2 {
            Ok(async_level(self, level, rhs, None, None)?.x)
        } else {
            self.pools[level].install(|| {
                sync_coarse_solve(self.mg, level, rhs, UpdateOrder::Multiplicative, self.cfg)
            })
        }
    }
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "worker panicked".into())
}

/// Semi-asynchronous solve on `level`: a smoother group (this thread) and a
/// coarse group (a scoped thread) exchanging once per cycle.
fn async_level(
    ctx: &Ctx<'_>,
    level: usize,
    b: &[f64],
    x0: Option<&[f64]>,
    history: Option<&mut ConvergenceHistory>,
) -> Result<LevelOutcome> {
    let mg = ctx.mg;
    if level == mg.coarsest_index() {
        let unreachable = |_: &[f64]| -> Result<Vec<f64>> { unreachable!("coarsest level has no coarse grid") };
        return sync_level(mg, level, b, x0, UpdateOrder::Additive, ctx.cfg, &unreachable, history);
    }
    let a = mg.matrix(level);
    let x0 = x0.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; b.len()]);
    let r0 = a.residual(b, &x0)?;
    let r0_norm = norm2(&r0);
    let mut rm = Minimizer::new(x0, r0.clone(), ctx.cfg.max_search_columns, history)?;

    if level_converged(level, r0_norm, r0_norm, 0, &ctx.cfg.criteria) {
        let (x, r) = rm.finish();
        return Ok(LevelOutcome {
            x,
            r,
            iterations: 0,
            converged: true,
            initial_residual: r0_norm,
        });
    }

    let (up_tx, up_rx) = mpsc::channel::<ExchangeMessage>();
    let (down_tx, down_rx) = mpsc::channel::<ExchangeMessage>();

    let (smoother_result, coarse_result) = std::thread::scope(|s| {
        let coarse = std::thread::Builder::new()
            .name(format!("orthomg-l{level}-coarse"))
            .spawn_scoped(s, || coarse_group(ctx, level, r0, up_tx, down_rx));
        let coarse = match coarse {
            Ok(handle) => handle,
            Err(e) => {
                let err = Error::WorkerFailure {
                    level,
                    role: Role::Coarse.as_str(),
                    message: format!("cannot spawn coarse group: {e}"),
                };
                return (Err(err), Ok(Ok(())));
            }
        };
        let smoother = catch_unwind(AssertUnwindSafe(|| {
            smoother_group(ctx, level, &mut rm, r0_norm, &up_rx, down_tx)
        }))
        .unwrap_or_else(|p| {
            Err(Error::WorkerFailure {
                level,
                role: Role::Smoother.as_str(),
                message: panic_message(p),
            })
        });
        (smoother, coarse.join())
    });

    let coarse_result = coarse_result.unwrap_or_else(|p| {
        Err(Error::WorkerFailure {
            level,
            role: Role::Coarse.as_str(),
            message: panic_message(p),
        })
    });
    let (iterations, converged) = match (smoother_result, coarse_result) {
        (Ok(v), Ok(())) => v,
        // a failure on one side surfaces on the other as a hang-up; report the root cause
        (Err(s), Err(c)) => return Err(if is_hang_up(&s) && !is_hang_up(&c) { c } else { s }),
        (Ok(_), Err(e)) | (Err(e), Ok(())) => return Err(e),
    };
    if let Ok(msg) = up_rx.try_recv() {
        return Err(Error::WorkerFailure {
            level,
            role: Role::Coarse.as_str(),
            message: format!("undelivered {} message after termination", msg.kind.label()),
        });
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

/// Pull messages from the coarse group; `Some(payload)` once the correction is in.
fn take_correction(
    rx: &Receiver<ExchangeMessage>,
    level: usize,
    cycle: usize,
    block_for: Option<Duration>,
) -> Result<Option<Vec<f64>>> {
    loop {
        let msg = match block_for {
            None => match rx.try_recv() {
                Ok(m) => m,
                Err(TryRecvError::Empty) => return Ok(None),
                Err(TryRecvError::Disconnected) => return Err(hung_up(level, Role::Coarse)),
            },
            Some(timeout) => match rx.recv_timeout(timeout) {
                Ok(m) => m,
                Err(RecvTimeoutError::Timeout) => {
                    return Err(Error::Timeout {
                        level,
                        role: Role::Smoother.as_str(),
                        timeout,
                    })
                }
                Err(RecvTimeoutError::Disconnected) => return Err(hung_up(level, Role::Coarse)),
            },
        };
        if msg.cycle != cycle {
            return Err(protocol(level, Role::Smoother, &msg, cycle));
        }
        match msg.kind {
            MessageKind::CoarseDone => continue,
            MessageKind::CoarseCorrection(z) => return Ok(Some(z)),
            _ => return Err(protocol(level, Role::Smoother, &msg, cycle)),
        }
    }
}

const HUNG_UP: &str = "group stopped without terminating the exchange";

fn hung_up(level: usize, role: Role) -> Error {
    Error::WorkerFailure {
        level,
        role: role.as_str(),
        message: HUNG_UP.into(),
    }
}

fn is_hang_up(e: &Error) -> bool {
    matches!(e, Error::WorkerFailure { message, .. } if message == HUNG_UP)
}

fn protocol(level: usize, role: Role, msg: &ExchangeMessage, cycle: usize) -> Error {
    Error::WorkerFailure {
        level,
        role: role.as_str(),
        message: format!(
            "unexpected {} message for cycle {} while in cycle {cycle}",
            msg.kind.label(),
            msg.cycle
        ),
    }
}

/// Smoother side of one level boundary; returns (cycles, converged).
fn smoother_group(
    ctx: &Ctx<'_>,
    level: usize,
    rm: &mut Minimizer<'_>,
    r0_norm: f64,
    up_rx: &Receiver<ExchangeMessage>,
    down_tx: Sender<ExchangeMessage>,
) -> Result<(usize, bool)> {
    let mg = ctx.mg;
    let a = mg.matrix(level);
    let mut cycle = 0;
    loop {
        let mut sweeps = 0;
        let correction = loop {
            ctx.delay(level, Role::Smoother, cycle);
            let z = ctx.pools[level].install(|| mg.smooth(level, rm.residual()))?;
            rm.update(a, z, RecordKind::Smoother)?;
            sweeps += 1;
            ctx.trace(level, Role::Smoother, TraceEvent::Sweep, cycle);
            if sweeps == 1 {
                ctx.send(&down_tx, level, Role::Smoother, MessageKind::SmootherDone, cycle)?;
            }
            match ctx.opts.scheduler {
                SchedulerMode::Realtime => {
                    if let Some(z) = take_correction(up_rx, level, cycle, None)? {
                        break z;
                    }
                }
                SchedulerMode::Deterministic { sweeps_per_cycle } => {
                    if sweeps >= sweeps_per_cycle {
                        break take_correction(up_rx, level, cycle, Some(ctx.opts.watchdog))?
                            .expect("blocking receive yields a correction");
                    }
                }
            }
        };

        let z_cor = match ctx.opts.placement {
            TransferPlacement::CoarseGroup => correction,
            TransferPlacement::Split => {
                ctx.trace(level, Role::Smoother, TraceEvent::Prolong, cycle);
                mg.prolongate(level, &correction)?
            }
        };
        rm.update(a, z_cor, RecordKind::Coarse)?;

        let done_cycles = cycle + 1;
        let converged = level_converged(level, rm.residual_norm(), r0_norm, done_cycles, &ctx.cfg.criteria);
        if converged || done_cycles >= ctx.cfg.max_outer_iterations {
            ctx.send(&down_tx, level, Role::Smoother, MessageKind::Terminate, cycle)?;
            return Ok((done_cycles, converged));
        }
        let r = rm.residual().to_vec();
        cycle = done_cycles;
        ctx.send(&down_tx, level, Role::Smoother, MessageKind::UpdatedResidual(r), cycle)?;
    }
}

/// Coarse side of one level boundary: one restriction, coarse solve and
/// prolongation per cycle, always from the residual handed over at the last exchange.
fn coarse_group(
    ctx: &Ctx<'_>,
    level: usize,
    mut r: Vec<f64>,
    up_tx: Sender<ExchangeMessage>,
    down_rx: Receiver<ExchangeMessage>,
) -> Result<()> {
    let mg = ctx.mg;
    let mut cycle = 0;
    loop {
        ctx.delay(level, Role::Coarse, cycle);
        ctx.trace(level, Role::Coarse, TraceEvent::Restrict, cycle);
        let rc = mg.restrict(level, &r)?;
        let zc = ctx.coarse_solve(level + 1, &rc)?;
        let payload = match ctx.opts.placement {
            TransferPlacement::CoarseGroup => {
                ctx.trace(level, Role::Coarse, TraceEvent::Prolong, cycle);
                mg.prolongate(level, &zc)?
            }
            TransferPlacement::Split => zc,
        };
        ctx.send(&up_tx, level, Role::Coarse, MessageKind::CoarseDone, cycle)?;
        ctx.send(&up_tx, level, Role::Coarse, MessageKind::CoarseCorrection(payload), cycle)?;

        loop {
            let msg = match down_rx.recv_timeout(ctx.opts.watchdog) {
                Ok(m) => m,
                Err(RecvTimeoutError::Timeout) => {
                    return Err(Error::Timeout {
                        level,
                        role: Role::Coarse.as_str(),
                        timeout: ctx.opts.watchdog,
                    })
                }
                Err(RecvTimeoutError::Disconnected) => return Err(hung_up(level, Role::Smoother)),
            };
            match msg.kind {
                MessageKind::SmootherDone if msg.cycle == cycle => continue,
                MessageKind::UpdatedResidual(next) if msg.cycle == cycle + 1 => {
                    r = next;
                    cycle += 1;
                    break;
                }
                MessageKind::Terminate if msg.cycle == cycle => return Ok(()),
                _ => return Err(protocol(level, Role::Coarse, &msg, cycle)),
            }
        }
    }
}

fn outcome(out: LevelOutcome, history: ConvergenceHistory) -> SolveOutcome {
    SolveOutcome {
        final_residual: norm2(&out.r),
        x: out.x,
        r: out.r,
        history,
        iterations: out.iterations,
        converged: out.converged,
        initial_residual: out.initial_residual,
    }
}

/// Semi-asynchronous task-parallel solve with additive residual updates.
pub fn async_solve(
    mg: &Multigrid,
    b: &[f64],
    x0: &[f64],
    cfg: &CycleConfig,
    ga: &GroupAssignment,
    opts: &AsyncOptions,
) -> Result<SolveOutcome> {
    check_system(mg, 0, b, Some(x0))?;
    let ctx = Ctx::new(mg, cfg, ga, opts)?;
    let mut history = ConvergenceHistory::new();
    let out = async_level(&ctx, 0, b, Some(x0), cfg.history_enabled.then_some(&mut history))?;
    Ok(outcome(out, history))
}

/// Synchronous multiplicative cycle on the finest level whose coarse-grid
/// correction runs the semi-asynchronous solver on the remaining levels.
pub fn hybrid_solve(
    mg: &Multigrid,
    b: &[f64],
    x0: &[f64],
    cfg: &CycleConfig,
    ga: &GroupAssignment,
    opts: &AsyncOptions,
) -> Result<SolveOutcome> {
    if mg.n_levels() < 2 {
        return Err(Error::InvalidInput(
            "hybrid solver needs a hierarchy with at least two levels".into(),
        ));
    }
    check_system(mg, 0, b, Some(x0))?;
    let ctx = Ctx::new(mg, cfg, ga, opts)?;
    let mut history = ConvergenceHistory::new();
    let coarse = |rc: &[f64]| -> Result<Vec<f64>> {
        if mg.coarsest_index() == 1 {
            mg.coarsest_solver().solve(rc)
        } else {
            Ok(async_level(&ctx, 1, rc, None, None)?.x)
        }
    };
    let out = ctx.pools[0].install(|| {
        sync_level(
            mg,
            0,
            b,
            Some(x0),
            UpdateOrder::Multiplicative,
            cfg,
            &coarse,
            cfg.history_enabled.then_some(&mut history),
        )
    })?;
    Ok(outcome(out, history))
}
