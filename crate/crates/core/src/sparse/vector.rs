//! Dense vector kernels on `&[f64]`.

use crate::error::{check_len, Result};

/// Euclidean inner product.
pub fn dot(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len("dot", x.len(), y.len())?;
    Ok(dot_unchecked(x, y))
}

/// Euclidean norm, `sqrt(dot(x, x))`.
pub fn norm2(x: &[f64]) -> f64 {
    dot_unchecked(x, x).sqrt()
}

#[inline]
pub(crate) fn dot_unchecked(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `y += alpha * x`
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub(crate) fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

pub(crate) fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}
