use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::problem::GridGeometry;
use crate::sparse::{all_finite, CsrMatrix, DenseMatrix, LuFactorization};

pub const DEFAULT_OMEGA: f64 = 1.0;
pub const DEFAULT_SWEEPS: usize = 5;

/// Block-Jacobi smoother over geometric tiles with precomputed block inverses.
#[derive(Debug, Clone)]
pub struct BlockJacobiSmoother {
    blocks: Vec<Vec<usize>>,
    inverses: Vec<DenseMatrix<f64>>,
    omega: f64,
    sweeps: usize,
}

/// Tile the grid into `tile^d` blocks and invert each diagonal block.
pub fn bj_setup(a: &CsrMatrix, geometry: &GridGeometry, tile_cells_per_axis: usize) -> Result<BlockJacobiSmoother> {
    check_len("bj_setup", geometry.n_cells(), a.n_rows())?;
    let n = geometry.cells_per_axis;
    let t = tile_cells_per_axis;
    if t == 0 || n % t != 0 {
        return Err(Error::InvalidInput(format!(
            "tile size {t} does not divide {n} cells per axis"
        )));
    }
    let tiles_per_axis = n / t;
    let d = geometry.dimension;
    let tile_grid = GridGeometry::new(d, tiles_per_axis, 1.0);
    let mut blocks: Vec<Vec<usize>> = vec![Vec::with_capacity(t.pow(d as u32)); tile_grid.n_cells()];
    for cell in 0..geometry.n_cells() {
        let c = geometry.coords(cell);
        let tc: Vec<usize> = c[..d].iter().map(|v| v / t).collect();
        blocks[tile_grid.index(&tc)].push(cell);
    }
    BlockJacobiSmoother::from_blocks(a, blocks)
}

impl BlockJacobiSmoother {
    /// Build from explicit disjoint, sorted index blocks.
    pub fn from_blocks(a: &CsrMatrix, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let inverses = blocks
            .iter()
            .enumerate()
            .map(|(id, cells)| {
                LuFactorization::<f64>::new(a.principal_submatrix(cells))
                    .map(|lu| lu.inverse())
                    .map_err(|e| match e {
                        Error::Singular { pivot } => Error::SingularBlock { block: id, pivot },
                        other => other,
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            blocks,
            inverses,
            omega: DEFAULT_OMEGA,
            sweeps: DEFAULT_SWEEPS,
        })
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_sweeps(mut self, sweeps: usize) -> Self {
        self.sweeps = sweeps.max(1);
        self
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_inverses(&self) -> &[DenseMatrix<f64>] {
        &self.inverses
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// `sweeps` block-Jacobi sweeps for `A z = r` from `z = 0`.
    pub fn apply(&self, a: &CsrMatrix, r: &[f64]) -> Result<Vec<f64>> {
        check_len("bj_apply", a.n_rows(), r.len())?;
        let mut z = vec![0.0; r.len()];
        for sweep in 0..self.sweeps {
            let rho = if sweep == 0 {
                r.to_vec()
            } else {
                a.residual_par(r, &z)
            };
            if !all_finite(&rho) {
                return Err(Error::NumericalFailure(
                    "non-finite residual inside block-Jacobi".into(),
                ));
            }
            let updates: Vec<Vec<f64>> = self
                .blocks
                .par_iter()
                .zip(self.inverses.par_iter())
                .map(|(cells, inv)| {
                    let local: Vec<f64> = cells.iter().map(|&c| rho[c]).collect();
                    inv.matvec(&local).expect("block-sized rhs")
                })
                .collect();
            for (cells, dz) in self.blocks.iter().zip(&updates) {
                for (&c, &v) in cells.iter().zip(dz) {
                    z[c] += self.omega * v;
                }
            }
        }
        Ok(z)
    }
}
