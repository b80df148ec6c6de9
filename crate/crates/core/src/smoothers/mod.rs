//! Additive Schwarz and block-Jacobi smoothers.
//!
//! Both follow a setup/apply split: `setup` factors (or inverts) the local
//! blocks once, `apply` approximately solves `A z = r` from a zero initial
//! guess. Local solves run on the current rayon pool and are summed in a
//! fixed order, so results do not depend on the number of threads.

mod block_jacobi;
mod partition;
mod schwarz;

pub use block_jacobi::{bj_setup, BlockJacobiSmoother, DEFAULT_OMEGA, DEFAULT_SWEEPS};
pub use partition::{partition_cells, Partition};
pub use schwarz::{schwarz_setup, SchwarzSmoother};

use crate::error::Result;
use crate::hierarchy::GridLevel;
use crate::sparse::{CsrMatrix, Precision};

#[derive(Debug, Clone)]
pub enum Smoother {
    Schwarz(SchwarzSmoother),
    BlockJacobi(BlockJacobiSmoother),
}

impl Smoother {
    pub fn apply(&self, a: &CsrMatrix, r: &[f64]) -> Result<Vec<f64>> {
        match self {
            Smoother::Schwarz(s) => s.apply(a, r),
            Smoother::BlockJacobi(s) => s.apply(a, r),
        }
    }
}

/// How to build a smoother on each non-coarsest level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmootherConfig {
    Schwarz {
        /// Target core size; the subdomain count is the largest power of two
        /// not exceeding `n_dofs / cells_per_subdomain`.
        cells_per_subdomain: usize,
        overlap: usize,
        precision: Precision,
        iterations: usize,
    },
    BlockJacobi {
        /// Clamped to the level's cells per axis on small grids.
        tile: usize,
        omega: f64,
        sweeps: usize,
    },
}

impl SmootherConfig {
    pub fn schwarz() -> Self {
        SmootherConfig::Schwarz {
            cells_per_subdomain: 1024,
            overlap: 1,
            precision: Precision::Double,
            iterations: 1,
        }
    }

    pub fn block_jacobi() -> Self {
        SmootherConfig::BlockJacobi {
            tile: 4,
            omega: DEFAULT_OMEGA,
            sweeps: DEFAULT_SWEEPS,
        }
    }

    pub fn build(&self, level: &GridLevel) -> Result<Smoother> {
        let geo = &level.geometry;
        match *self {
            SmootherConfig::Schwarz {
                cells_per_subdomain,
                overlap,
                precision,
                iterations,
            } => {
                let wanted = (level.n_dofs() / cells_per_subdomain.max(1)).max(1);
                let n_sub = 1usize << wanted.ilog2();
                let partition = partition_cells(geo.cells_per_axis, geo.dimension, n_sub, overlap)?;
                Ok(Smoother::Schwarz(
                    schwarz_setup(&level.matrix, partition, precision)?.with_iterations(iterations),
                ))
            }
            SmootherConfig::BlockJacobi { tile, omega, sweeps } => {
                let tile = tile.clamp(1, geo.cells_per_axis);
                Ok(Smoother::BlockJacobi(
                    bj_setup(&level.matrix, geo, tile)?
                        .with_omega(omega)
                        .with_sweeps(sweeps),
                ))
            }
        }
    }
}

impl Default for SmootherConfig {
    fn default() -> Self {
        Self::schwarz()
    }
}
