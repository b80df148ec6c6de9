//! Solver-ready hierarchy: per-level smoothers and the cached coarsest factorization.

use crate::error::{check_len, Error, Result};
use crate::hierarchy::GridHierarchy;
use crate::smoothers::{Smoother, SmootherConfig};
use crate::sparse::{all_finite, CsrMatrix, LuFactorization};

/// Direct solver for the coarsest level: dense LU with one step of
/// iterative refinement.
#[derive(Debug, Clone)]
pub struct CoarsestSolver {
    matrix: CsrMatrix,
    lu: LuFactorization<f64>,
}

impl CoarsestSolver {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        check_len("coarsest solver (square)", a.n_rows(), a.n_cols())?;
        Ok(Self {
            matrix: a.clone(),
            lu: LuFactorization::new(a.to_dense())?,
        })
    }

    pub fn solve(&self, r: &[f64]) -> Result<Vec<f64>> {
        check_len("coarsest_solve", self.matrix.n_rows(), r.len())?;
        if !all_finite(r) {
            return Err(Error::NumericalFailure(
                "non-finite right-hand side on the coarsest level".into(),
            ));
        }
        let mut z = self.lu.solve(r)?;
        let res = self.matrix.residual(r, &z)?;
        let dz = self.lu.solve(&res)?;
        for (zi, di) in z.iter_mut().zip(&dz) {
            *zi += di;
        }
        Ok(z)
    }
}

/// Factor `a` and solve `a z = r`.
pub fn coarsest_solve(a: &CsrMatrix, r: &[f64]) -> Result<Vec<f64>> {
    CoarsestSolver::new(a)?.solve(r)
}

/// A grid hierarchy with everything set up for cycling.
#[derive(Debug, Clone)]
pub struct Multigrid {
    hierarchy: GridHierarchy,
    smoothers: Vec<Option<Smoother>>,
    coarsest: CoarsestSolver,
}

impl Multigrid {
    pub fn new(hierarchy: GridHierarchy, smoother: &SmootherConfig) -> Result<Self> {
        Self::with_level_smoothers(hierarchy, std::slice::from_ref(smoother))
    }

    /// `configs[i]` is used on level `i`; the last entry repeats for deeper levels.
    pub fn with_level_smoothers(hierarchy: GridHierarchy, configs: &[SmootherConfig]) -> Result<Self> {
        if configs.is_empty() {
            return Err(Error::InvalidInput("at least one smoother config is required".into()));
        }
        let coarsest_index = hierarchy.coarsest_index();
        let smoothers = hierarchy
            .levels()
            .iter()
            .map(|level| {
                if level.index == coarsest_index {
                    return Ok(None);
                }
                let cfg = configs.get(level.index).unwrap_or(configs.last().unwrap());
                cfg.build(level).map(Some)
            })
            .collect::<Result<Vec<_>>>()?;
        let coarsest = CoarsestSolver::new(&hierarchy.level(coarsest_index).matrix)?;
        Ok(Self {
            hierarchy,
            smoothers,
            coarsest,
        })
    }

    pub fn hierarchy(&self) -> &GridHierarchy {
        &self.hierarchy
    }

    pub fn n_levels(&self) -> usize {
        self.hierarchy.n_levels()
    }

    pub fn coarsest_index(&self) -> usize {
        self.hierarchy.coarsest_index()
    }

    pub fn matrix(&self, level: usize) -> &CsrMatrix {
        &self.hierarchy.level(level).matrix
    }

    pub fn smoother(&self, level: usize) -> Option<&Smoother> {
        self.smoothers[level].as_ref()
    }

    pub fn coarsest_solver(&self) -> &CoarsestSolver {
        &self.coarsest
    }

    pub(crate) fn smooth(&self, level: usize, r: &[f64]) -> Result<Vec<f64>> {
        let s = self.smoothers[level]
            .as_ref()
            .ok_or_else(|| Error::InvalidInput(format!("level {level} has no smoother")))?;
        let z = s.apply(self.matrix(level), r)?;
        if !all_finite(&z) {
            return Err(Error::NumericalFailure(format!(
                "smoother on level {level} produced non-finite values"
            )));
        }
        Ok(z)
    }

    pub(crate) fn restrict(&self, level: usize, r: &[f64]) -> Result<Vec<f64>> {
        self.hierarchy
            .level(level)
            .restriction
            .as_ref()
            .ok_or_else(|| Error::InvalidInput(format!("level {level} has no restriction")))?
            .spmv(r)
    }

    pub(crate) fn prolongate(&self, level: usize, zc: &[f64]) -> Result<Vec<f64>> {
        self.hierarchy
            .level(level)
            .prolongation
            .as_ref()
            .ok_or_else(|| Error::InvalidInput(format!("level {level} has no prolongation")))?
            .spmv(zc)
    }
}
