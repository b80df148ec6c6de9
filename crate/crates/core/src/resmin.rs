//! Residual orthonormalization and minimization.
//!
//! A [`SearchSpace`] keeps an orthonormal basis `W` together with the
//! directions `Z` that produced it (`W = A Z`). Every new correction is
//! orthonormalized against `W` with modified Gram-Schmidt, and the iterate is
//! re-minimized over the whole space, so the residual norm never grows.

use crate::error::{Error, Result};
use crate::sparse::{all_finite, axpy, dot_unchecked, norm2, scale, CsrMatrix};

/// A direction is discarded when orthogonalization leaves less than this
/// fraction of its original norm.
pub const BREAKDOWN_TOLERANCE: f64 = 1e-13;

/// Trigger for a second Gram-Schmidt pass.
const REORTHOGONALIZE_BELOW: f64 = 0.1;

/// Column cap per outer solve before the space is restarted.
pub const DEFAULT_MAX_COLUMNS: usize = 200;

#[derive(Debug, Clone)]
pub struct SearchSpace {
    w: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    x0: Vec<f64>,
    r0: Vec<f64>,
    x: Vec<f64>,
    r: Vec<f64>,
    breakdown_count: usize,
}

/// Result of one [`SearchSpace::update`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOutcome {
    Accepted,
    /// The direction was (numerically) in the span of the basis; nothing changed.
    Breakdown,
}

impl SearchSpace {
    /// Empty space anchored at `(x0, r0)`.
    pub fn new(x0: Vec<f64>, r0: Vec<f64>) -> Result<Self> {
        if x0.len() != r0.len() {
            return Err(Error::DimensionMismatch {
                context: "SearchSpace::new",
                expected: x0.len(),
                actual: r0.len(),
            });
        }
        Ok(Self {
            w: Vec::new(),
            z: Vec::new(),
            alpha: Vec::new(),
            x: x0.clone(),
            r: r0.clone(),
            x0,
            r0,
            breakdown_count: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn breakdown_count(&self) -> usize {
        self.breakdown_count
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.w
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.z
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn anchor(&self) -> (&[f64], &[f64]) {
        (&self.x0, &self.r0)
    }

    /// Current minimizing iterate and its residual.
    pub fn current(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.r)
    }

    pub fn solution(&self) -> &[f64] {
        &self.x
    }

    pub fn residual(&self) -> &[f64] {
        &self.r
    }

    pub fn residual_norm(&self) -> f64 {
        norm2(&self.r)
    }

    pub fn into_solution(self) -> (Vec<f64>, Vec<f64>) {
        (self.x, self.r)
    }

    /// Add direction `z` and re-minimize the residual over the enlarged space.
    pub fn update(&mut self, a: &CsrMatrix, mut z: Vec<f64>) -> Result<UpdateOutcome> {
        if z.len() != self.dim() || a.n_rows() != self.dim() || a.n_cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "SearchSpace::update",
                expected: self.dim(),
                actual: z.len(),
            });
        }
        if !all_finite(&z) {
            return Err(Error::InvalidInput(
                "search direction contains NaN or Inf".into(),
            ));
        }
        let mut w = a.spmv(&z)?;
        let initial_norm = norm2(&w);
        if initial_norm == 0.0 || self.r0.iter().all(|&v| v == 0.0) {
            self.breakdown_count += 1;
            return Ok(UpdateOutcome::Breakdown);
        }

        self.orthogonalize(&mut w, &mut z);
        let mut norm = norm2(&w);
        if norm < REORTHOGONALIZE_BELOW * initial_norm {
            self.orthogonalize(&mut w, &mut z);
            norm = norm2(&w);
        }
        if !(norm > BREAKDOWN_TOLERANCE * initial_norm) {
            self.breakdown_count += 1;
            return Ok(UpdateOutcome::Breakdown);
        }

        let gamma = 1.0 / norm;
        scale(gamma, &mut w);
        scale(gamma, &mut z);
        let alpha = dot_unchecked(&w, &self.r0);
        let previous = (self.x.clone(), self.r.clone());
        let previous_norm = norm2(&self.r);
        self.w.push(w);
        self.z.push(z);
        self.alpha.push(alpha);
        self.recompute();
        if !all_finite(&self.r) {
            return Err(Error::NumericalFailure(
                "residual minimization produced a non-finite residual".into(),
            ));
        }
        // near machine precision, rounding in the re-accumulation can outweigh the gain
        if norm2(&self.r) > previous_norm {
            self.w.pop();
            self.z.pop();
            self.alpha.pop();
            (self.x, self.r) = previous;
            self.breakdown_count += 1;
            return Ok(UpdateOutcome::Breakdown);
        }
        Ok(UpdateOutcome::Accepted)
    }

    fn orthogonalize(&self, w: &mut [f64], z: &mut [f64]) {
        for (wi, zi) in self.w.iter().zip(&self.z) {
            let beta = dot_unchecked(wi, w);
            axpy(-beta, wi, w);
            axpy(-beta, zi, z);
        }
    }

    /// `x = x0 + Z alpha`, `r = r0 - W alpha`, accumulated in column order.
    fn recompute(&mut self) {
        self.x.copy_from_slice(&self.x0);
        self.r.copy_from_slice(&self.r0);
        for ((wi, zi), &ai) in self.w.iter().zip(&self.z).zip(&self.alpha) {
            axpy(ai, zi, &mut self.x);
            axpy(-ai, wi, &mut self.r);
        }
    }

    /// Clear the basis and re-anchor at `(x, r)`.
    pub fn reset(&mut self, x: Vec<f64>, r: Vec<f64>) -> Result<()> {
        if x.len() != r.len() {
            return Err(Error::DimensionMismatch {
                context: "SearchSpace::reset",
                expected: x.len(),
                actual: r.len(),
            });
        }
        self.w.clear();
        self.z.clear();
        self.alpha.clear();
        self.x.clone_from(&x);
        self.r.clone_from(&r);
        self.x0 = x;
        self.r0 = r;
        Ok(())
    }

    /// Restart anchored at the current iterate once the basis reaches `max_columns`.
    pub fn restart_if_full(&mut self, max_columns: usize) {
        if self.len() >= max_columns {
            let (x, r) = (self.x.clone(), self.r.clone());
            self.reset(x, r).expect("consistent lengths");
        }
    }
}
