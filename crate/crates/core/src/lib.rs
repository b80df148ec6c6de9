//! Orthonormalization multigrid (a K-cycle with residual minimization after
//! every correction) for the piecewise-coefficient Poisson benchmark.
//!
//! Synchronous cycles live in [`cycle`], the semi-asynchronous task-parallel
//! cycle and the hybrid in [`async_mg`]; [`solver::solve`] dispatches between
//! the four configurations.
//!
//! ```
//! use orthomg::{build_hierarchy, orthomg_solve_multiplicative, CycleConfig, Multigrid, ProblemSpec, SmootherConfig};
//!
//! let spec = ProblemSpec { cells_per_axis: 16, ..ProblemSpec::default() };
//! let (hierarchy, b) = build_hierarchy(&spec, 16).unwrap();
//! let mg = Multigrid::new(hierarchy, &SmootherConfig::schwarz()).unwrap();
//! let out = orthomg_solve_multiplicative(&mg, &b, &vec![0.0; b.len()], &CycleConfig::default()).unwrap();
//! assert!(out.converged);
//! ```

pub mod async_mg;
pub mod criteria;
pub mod cycle;
mod error;
pub mod hierarchy;
pub mod history;
pub mod multigrid;
pub mod problem;
pub mod resmin;
pub mod smoothers;
pub mod solver;
pub mod sparse;

pub use async_mg::{assign_groups, async_solve, hybrid_solve, AsyncOptions, GroupAssignment, SchedulerMode};
pub use criteria::{level_converged, ConvergenceCriteria, LevelRule};
pub use cycle::{orthomg_solve, orthomg_solve_additive, orthomg_solve_multiplicative, CycleConfig, SolveOutcome, UpdateOrder};
pub use error::{Error, Result};
pub use hierarchy::{build_hierarchy, build_prolongation, build_restriction, GridHierarchy, GridLevel};
pub use history::{ConvergenceHistory, HistoryRecord, RecordKind};
pub use multigrid::{coarsest_solve, CoarsestSolver, Multigrid};
pub use problem::{assemble_poisson, coefficient_at, GridGeometry, ProblemSpec};
pub use resmin::{SearchSpace, UpdateOutcome};
pub use smoothers::{Smoother, SmootherConfig};
pub use solver::{SolverOptions, Variant};
pub use sparse::{CsrMatrix, DenseMatrix, LuFactorization, Precision};
