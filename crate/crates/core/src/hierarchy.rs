//! Geometric grid hierarchy with Galerkin coarse operators.

use crate::error::{Error, Result};
use crate::problem::{assemble_poisson, GridGeometry, ProblemSpec};
use crate::sparse::{triple_product, CsrMatrix};

/// Default coarsest-level size threshold (DOFs) for desk-scale runs.
pub const DEFAULT_MIN_COARSE_DOFS: usize = 1024;

/// Piecewise-constant prolongation from `(n/2)^d` coarse cells to `n^d` fine cells.
pub fn build_prolongation(fine_cells_per_axis: usize, dimension: usize) -> Result<CsrMatrix> {
    if fine_cells_per_axis == 0 || fine_cells_per_axis % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "prolongation needs an even, positive cell count per axis, got {fine_cells_per_axis}"
        )));
    }
    if !(1..=3).contains(&dimension) {
        return Err(Error::InvalidInput(format!(
            "dimension must be 1, 2 or 3, got {dimension}"
        )));
    }
    let fine = GridGeometry::new(dimension, fine_cells_per_axis, 1.0);
    let coarse = fine.coarsened();
    let n_fine = fine.n_cells();
    let col_indices: Vec<usize> = (0..n_fine)
        .map(|i| {
            let c = fine.coords(i);
            let parent: Vec<usize> = c[..dimension].iter().map(|v| v / 2).collect();
            coarse.index(&parent)
        })
        .collect();
    CsrMatrix::new(
        n_fine,
        coarse.n_cells(),
        (0..=n_fine).collect(),
        col_indices,
        vec![1.0; n_fine],
    )
}

/// Averaging restriction `R = P^T / 2^d`.
pub fn build_restriction(prolongation: &CsrMatrix, dimension: usize) -> CsrMatrix {
    prolongation
        .transpose()
        .scaled(1.0 / (1usize << dimension) as f64)
}

#[derive(Debug, Clone)]
pub struct GridLevel {
    pub index: usize,
    pub matrix: CsrMatrix,
    /// `R` mapping this level to the next coarser one; `None` on the coarsest.
    pub restriction: Option<CsrMatrix>,
    /// `P` mapping the next coarser level to this one; `None` on the coarsest.
    pub prolongation: Option<CsrMatrix>,
    pub geometry: GridGeometry,
}

impl GridLevel {
    pub fn n_dofs(&self) -> usize {
        self.matrix.n_rows()
    }
}

/// Levels ordered finest first.
#[derive(Debug, Clone)]
pub struct GridHierarchy {
    levels: Vec<GridLevel>,
    min_coarse_dofs: usize,
}

impl GridHierarchy {
    /// Coarsen `matrix` (defined on `geometry`) 2:1 per axis while the current
    /// level has more than `min_coarse_dofs` unknowns and every axis can still
    /// be halved without dropping below two cells.
    pub fn from_matrix(matrix: CsrMatrix, geometry: GridGeometry, min_coarse_dofs: usize) -> Result<Self> {
        if matrix.n_rows() != geometry.n_cells() || matrix.n_cols() != geometry.n_cells() {
            return Err(Error::DimensionMismatch {
                context: "GridHierarchy::from_matrix",
                expected: geometry.n_cells(),
                actual: matrix.n_rows(),
            });
        }
        let mut levels = vec![GridLevel {
            index: 0,
            matrix,
            restriction: None,
            prolongation: None,
            geometry,
        }];
        loop {
            let last = levels.last_mut().unwrap();
            let geo = last.geometry;
            if last.n_dofs() <= min_coarse_dofs
                || geo.cells_per_axis <= 2
                || geo.cells_per_axis % 2 != 0
            {
                break;
            }
            let p = build_prolongation(geo.cells_per_axis, geo.dimension)?;
            let r = build_restriction(&p, geo.dimension);
            let coarse = triple_product(&r, &last.matrix, &p)?;
            last.restriction = Some(r);
            last.prolongation = Some(p);
            let index = last.index + 1;
            levels.push(GridLevel {
                index,
                matrix: coarse,
                restriction: None,
                prolongation: None,
                geometry: geo.coarsened(),
            });
        }
        Ok(Self {
            levels,
            min_coarse_dofs,
        })
    }

    pub fn levels(&self) -> &[GridLevel] {
        &self.levels
    }

    pub fn level(&self, index: usize) -> &GridLevel {
        &self.levels[index]
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn coarsest_index(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn min_coarse_dofs(&self) -> usize {
        self.min_coarse_dofs
    }

    pub fn dofs_per_level(&self) -> Vec<usize> {
        self.levels.iter().map(GridLevel::n_dofs).collect()
    }
}

/// Assemble the benchmark and build its hierarchy; returns the hierarchy and right-hand side.
pub fn build_hierarchy(spec: &ProblemSpec, min_coarse_dofs: usize) -> Result<(GridHierarchy, Vec<f64>)> {
    spec.validate()?;
    if min_coarse_dofs < 4 {
        return Err(Error::InvalidInput(format!(
            "min_coarse_dofs must be at least 4, got {min_coarse_dofs}"
        )));
    }
    let (a, b) = assemble_poisson(spec)?;
    let h = GridHierarchy::from_matrix(a, spec.geometry(), min_coarse_dofs)?;
    Ok((h, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prolongation_1d() {
        let p = build_prolongation(4, 1).unwrap();
        assert_eq!((p.n_rows(), p.n_cols()), (4, 2));
        let d = p.to_dense();
        let rows: Vec<Vec<f64>> = (0..4).map(|i| d.row(i).to_vec()).collect();
        assert_eq!(
            rows,
            vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]
        );
    }

    #[test]
    fn prolongation_2d_column_sums() {
        let p = build_prolongation(4, 2).unwrap();
        assert_eq!((p.n_rows(), p.n_cols()), (16, 4));
        let sums = p.transpose().spmv(&vec![1.0; 16]).unwrap();
        assert_eq!(sums, vec![4.0; 4]);
        assert_eq!(p.spmv(&[2.5; 4]).unwrap(), vec![2.5; 16]);
    }

    #[test]
    fn odd_axis_rejected() {
        assert!(build_prolongation(5, 2).is_err());
    }

    #[test]
    fn restriction_1d_rows_and_constants() {
        let p = build_prolongation(4, 1).unwrap();
        let r = build_restriction(&p, 1);
        let d = r.to_dense();
        assert_eq!(d.row(0), &[0.5, 0.5, 0.0, 0.0]);
        assert_eq!(d.row(1), &[0.0, 0.0, 0.5, 0.5]);
        let p2 = build_prolongation(8, 2).unwrap();
        let r2 = build_restriction(&p2, 2);
        assert_eq!(r2.spmv(&[3.0; 64]).unwrap(), vec![3.0; 16]);
    }

    #[test]
    fn coarsening_arithmetic() {
        let spec = ProblemSpec::default();
        let (h, _) = build_hierarchy(&spec, 64).unwrap();
        assert_eq!(h.dofs_per_level(), vec![4096, 1024, 256, 64]);
        let small = ProblemSpec {
            cells_per_axis: 8,
            ..spec
        };
        let (h, _) = build_hierarchy(&small, 4096).unwrap();
        assert_eq!(h.n_levels(), 1);
        assert!(h.level(0).restriction.is_none());
    }

    #[test]
    fn stops_at_two_cells_per_axis() {
        let spec = ProblemSpec {
            cells_per_axis: 8,
            dimension: 3,
            ..ProblemSpec::default()
        };
        let (h, _) = build_hierarchy(&spec, 4).unwrap();
        assert_eq!(h.dofs_per_level(), vec![512, 64, 8]);
    }
}
