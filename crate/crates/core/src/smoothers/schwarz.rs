use rayon::prelude::*;

use super::partition::Partition;
use crate::error::{check_len, Error, Result};
use crate::sparse::{all_finite, CsrMatrix, LuFactorization, Precision};

#[derive(Debug, Clone)]
enum LocalLu {
    Double(LuFactorization<f64>),
    Single(LuFactorization<f32>),
}

impl LocalLu {
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        match self {
            LocalLu::Double(lu) => lu.solve(rhs),
            LocalLu::Single(lu) => lu.solve(rhs),
        }
        .expect("local rhs sized from the same index set")
    }
}

/// Additive Schwarz smoother with cached local LU factors.
#[derive(Debug, Clone)]
pub struct SchwarzSmoother {
    partition: Partition,
    local_factors: Vec<LocalLu>,
    precision: Precision,
    iterations: usize,
}

/// Extract and factor every extended-subdomain block of `a`.
pub fn schwarz_setup(a: &CsrMatrix, partition: Partition, precision: Precision) -> Result<SchwarzSmoother> {
    check_len("schwarz_setup", partition.n_cells, a.n_rows())?;
    let local_factors = partition
        .extended_cells
        .iter()
        .enumerate()
        .map(|(id, cells)| {
            let block = a.principal_submatrix(cells);
            let lu = match precision {
                Precision::Double => LuFactorization::new(block).map(LocalLu::Double),
                Precision::Single => LuFactorization::new(block.cast::<f32>()).map(LocalLu::Single),
            };
            lu.map_err(|e| match e {
                Error::Singular { pivot } => Error::SingularBlock { block: id, pivot },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SchwarzSmoother {
        partition,
        local_factors,
        precision,
        iterations: 1,
    })
}

impl SchwarzSmoother {
    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations.max(1);
        self
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Solve one local system against a local right-hand side.
    pub fn local_solve(&self, subdomain: usize, rhs: &[f64]) -> Result<Vec<f64>> {
        check_len(
            "SchwarzSmoother::local_solve",
            self.partition.extended_cells[subdomain].len(),
            rhs.len(),
        )?;
        Ok(self.local_factors[subdomain].solve(rhs))
    }

    /// `self.iterations()` additive sweeps for `A z = r` from `z = 0`.
    pub fn apply(&self, a: &CsrMatrix, r: &[f64]) -> Result<Vec<f64>> {
        self.apply_n(a, r, self.iterations)
    }

    pub fn apply_n(&self, a: &CsrMatrix, r: &[f64], n_iterations: usize) -> Result<Vec<f64>> {
        check_len("schwarz_apply", a.n_rows(), r.len())?;
        check_len("schwarz_apply (partition)", self.partition.n_cells, r.len())?;
        if n_iterations == 0 {
            return Err(Error::InvalidInput("n_iterations must be at least 1".into()));
        }
        let mut z = vec![0.0; r.len()];
        for sweep in 0..n_iterations {
            let rho = if sweep == 0 {
                r.to_vec()
            } else {
                a.residual_par(r, &z)
            };
            if !all_finite(&rho) {
                return Err(Error::NumericalFailure(
                    "non-finite residual inside additive Schwarz".into(),
                ));
            }
            let corrections: Vec<Vec<f64>> = self
                .partition
                .extended_cells
                .par_iter()
                .zip(self.local_factors.par_iter())
                .map(|(cells, lu)| {
                    let local: Vec<f64> = cells.iter().map(|&c| rho[c]).collect();
                    lu.solve(&local)
                })
                .collect();
            // fixed subdomain order keeps the sum independent of scheduling
            for (cells, e) in self.partition.extended_cells.iter().zip(&corrections) {
                for (&c, &v) in cells.iter().zip(e) {
                    z[c] += v;
                }
            }
        }
        Ok(z)
    }
}
