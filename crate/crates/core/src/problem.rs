//! Piecewise-coefficient Poisson benchmark on `[-L, L]^d`.
//!
//! Cell-centered finite volumes on a uniform grid: one unknown per cell,
//! harmonic averaging of the diffusion coefficient across interior faces,
//! and homogeneous Dirichlet walls eliminated through a ghost cell.

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub dimension: usize,
    /// Half-width `L` of the domain `[-L, L]^d`.
    pub half_width: f64,
    pub cells_per_axis: usize,
    /// Interface radius relative to `L`.
    pub radius_factor: f64,
    pub k_inner: f64,
    pub k_outer: f64,
    pub rhs: f64,
}

impl Default for ProblemSpec {
    /// The circular-interface benchmark: `r = 0.7 L`, `k_outer / k_inner = 1000`, `f = 1`.
    fn default() -> Self {
        Self {
            dimension: 2,
            half_width: 1.0,
            cells_per_axis: 64,
            radius_factor: 0.7,
            k_inner: 1.0,
            k_outer: 1000.0,
            rhs: 1.0,
        }
    }
}

impl ProblemSpec {
    /// Full validation, including the power-of-two grid needed for coarsening.
    pub fn validate(&self) -> Result<()> {
        self.validate_for_assembly()?;
        if self.cells_per_axis < 4 || !self.cells_per_axis.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "cells_per_axis must be a power of two >= 4, got {}",
                self.cells_per_axis
            )));
        }
        Ok(())
    }

    /// Validation sufficient for assembling a single-grid system (any `n >= 1`).
    pub fn validate_for_assembly(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidInput(msg));
        if !(self.dimension == 2 || self.dimension == 3) {
            return invalid(format!("dimension must be 2 or 3, got {}", self.dimension));
        }
        if self.cells_per_axis == 0 {
            return invalid("cells_per_axis must be positive".into());
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return invalid(format!("half_width must be positive, got {}", self.half_width));
        }
        if !(self.k_inner > 0.0 && self.k_inner.is_finite()) {
            return invalid(format!("k_inner must be positive, got {}", self.k_inner));
        }
        if !(self.k_outer > 0.0 && self.k_outer.is_finite()) {
            return invalid(format!("k_outer must be positive, got {}", self.k_outer));
        }
        if !(self.radius_factor > 0.0 && self.radius_factor < 1.0) {
            return invalid(format!(
                "radius_factor must lie in (0, 1), got {}",
                self.radius_factor
            ));
        }
        if !self.rhs.is_finite() {
            return invalid("rhs must be finite".into());
        }
        Ok(())
    }

    pub fn radius(&self) -> f64 {
        self.radius_factor * self.half_width
    }

    pub fn geometry(&self) -> GridGeometry {
        GridGeometry::new(self.dimension, self.cells_per_axis, 2.0 * self.half_width)
    }

    pub fn n_dofs(&self) -> usize {
        self.cells_per_axis.pow(self.dimension as u32)
    }
}

/// Uniform tensor grid of `cells_per_axis^dimension` cells, x fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub dimension: usize,
    pub cells_per_axis: usize,
    pub spacing: f64,
}

impl GridGeometry {
    pub fn new(dimension: usize, cells_per_axis: usize, extent: f64) -> Self {
        Self {
            dimension,
            cells_per_axis,
            spacing: extent / cells_per_axis as f64,
        }
    }

    pub fn n_cells(&self) -> usize {
        self.cells_per_axis.pow(self.dimension as u32)
    }

    #[inline]
    pub fn index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .rev()
            .fold(0, |acc, &c| acc * self.cells_per_axis + c)
    }

    #[inline]
    pub fn coords(&self, mut index: usize) -> [usize; 3] {
        let mut c = [0; 3];
        for slot in c.iter_mut().take(self.dimension) {
            *slot = index % self.cells_per_axis;
            index /= self.cells_per_axis;
        }
        c
    }

    /// Face neighbors of a cell (no diagonal neighbors).
    pub fn neighbors(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        let c = self.coords(index);
        let n = self.cells_per_axis;
        (0..self.dimension).flat_map(move |axis| {
            let stride = n.pow(axis as u32);
            let lower = (c[axis] > 0).then(|| index - stride);
            let upper = (c[axis] + 1 < n).then(|| index + stride);
            lower.into_iter().chain(upper)
        })
    }

    /// Grid with half as many cells per axis.
    pub fn coarsened(&self) -> GridGeometry {
        GridGeometry {
            dimension: self.dimension,
            cells_per_axis: self.cells_per_axis / 2,
            spacing: self.spacing * 2.0,
        }
    }
}

/// Diffusion coefficient at a point; the interface `|x| = r` belongs to the outer phase.
pub fn coefficient_at(spec: &ProblemSpec, x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let radius = spec.radius();
    if r2 < radius * radius {
        spec.k_inner
    } else {
        spec.k_outer
    }
}

fn cell_center(spec: &ProblemSpec, geo: &GridGeometry, index: usize) -> [f64; 3] {
    let c = geo.coords(index);
    let mut x = [0.0; 3];
    for axis in 0..geo.dimension {
        x[axis] = -spec.half_width + (c[axis] as f64 + 0.5) * geo.spacing;
    }
    x
}

/// Assemble the SPD system `A u = b` for `-div(k grad u) = f`.
pub fn assemble_poisson(spec: &ProblemSpec) -> Result<(CsrMatrix, Vec<f64>)> {
    spec.validate_for_assembly()?;
    let geo = spec.geometry();
    let n_cells = geo.n_cells();
    let inv_h2 = 1.0 / (geo.spacing * geo.spacing);
    let k: Vec<f64> = (0..n_cells)
        .map(|i| coefficient_at(spec, &cell_center(spec, &geo, i)[..geo.dimension]))
        .collect();

    let n = geo.cells_per_axis;
    let mut triplets = Vec::with_capacity(n_cells * (2 * geo.dimension + 1));
    for i in 0..n_cells {
        let c = geo.coords(i);
        let mut diag = 0.0;
        for axis in 0..geo.dimension {
            let stride = n.pow(axis as u32);
            for (has_neighbor, j) in [
                (c[axis] > 0, i.wrapping_sub(stride)),
                (c[axis] + 1 < n, i + stride),
            ] {
                if has_neighbor {
                    let kf = 2.0 * k[i] * k[j] / (k[i] + k[j]);
                    diag += kf * inv_h2;
                    triplets.push((i, j, -kf * inv_h2));
                } else {
                    diag += 2.0 * k[i] * inv_h2;
                }
            }
        }
        triplets.push((i, i, diag));
    }
    let a = CsrMatrix::from_triplets(n_cells, n_cells, triplets)?;
    Ok((a, vec![spec.rhs; n_cells]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn benchmark() -> ProblemSpec {
        ProblemSpec {
            half_width: 1.0,
            radius_factor: 0.7,
            k_inner: 1.0,
            k_outer: 1000.0,
            ..ProblemSpec::default()
        }
    }

    #[test]
    fn coefficient_inside_outside_and_on_interface() {
        let s = benchmark();
        assert_eq!(coefficient_at(&s, &[0.0, 0.0]), 1.0);
        assert_eq!(coefficient_at(&s, &[0.9, 0.0]), 1000.0);
        assert_eq!(coefficient_at(&s, &[0.7, 0.0]), 1000.0);
    }

    #[test]
    fn hand_stencil_two_by_two() {
        // L = 1, n = 2 gives h = 1; every cell has two interior and two wall faces
        let s = ProblemSpec {
            cells_per_axis: 2,
            k_outer: 1.0,
            ..benchmark()
        };
        let (a, b) = assemble_poisson(&s).unwrap();
        assert_eq!(b, vec![1.0; 4]);
        let expected = [
            [6.0, -1.0, -1.0, 0.0],
            [-1.0, 6.0, 0.0, -1.0],
            [-1.0, 0.0, 6.0, -1.0],
            [0.0, -1.0, -1.0, 6.0],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(a.get(i, j), v, "({i}, {j})");
            }
        }
        assert!(s.validate().is_err());
    }

    #[test]
    fn rejects_invalid_specs() {
        for bad in [
            ProblemSpec { k_inner: -1.0, ..benchmark() },
            ProblemSpec { cells_per_axis: 6, ..benchmark() },
            ProblemSpec { cells_per_axis: 2, ..benchmark() },
            ProblemSpec { dimension: 1, ..benchmark() },
            ProblemSpec { radius_factor: 1.0, ..benchmark() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn index_coords_round_trip() {
        let g = GridGeometry::new(3, 4, 2.0);
        for i in 0..g.n_cells() {
            assert_eq!(g.index(&g.coords(i)[..3]), i);
        }
        let mut nb: Vec<usize> = g.neighbors(0).collect();
        nb.sort();
        assert_eq!(nb, vec![1, 4, 16]);
    }
}
