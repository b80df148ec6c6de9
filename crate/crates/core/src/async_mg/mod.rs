//! Semi-asynchronous task-parallel orthonormalization multigrid.
//!
//! Each level boundary is served by two groups of workers. The smoother group
//! owns the fine-level search space and keeps sweeping (smooth, then
//! minimize) until the coarse group reports its correction; the coarse group
//! restricts the residual it was handed at the start of the cycle, solves on
//! the coarser levels (recursively, with its own pair of groups when it has
//! the workers for it) and prolongates. The two meet exactly once per cycle:
//! the smoother group folds in the coarse correction, tests convergence, and
//! sends the updated residual (or a terminate message) back.
//!
//! Groups talk only through ordered point-to-point channels; vectors change
//! hands by message, never by shared mutation.

mod groups;
mod message;
mod solver;
mod trace;

pub use groups::{assign_groups, GroupAssignment};
pub use message::{ExchangeMessage, MessageKind, Role, SchedulerMode};
pub use solver::{
    async_solve, hybrid_solve, intergrid_placement, AsyncOptions, DelayHook, TransferPlacement, TransferRoles,
    DEFAULT_WATCHDOG,
};
pub use trace::{Trace, TraceEvent, TraceRecord, TRACE_HEADER};
