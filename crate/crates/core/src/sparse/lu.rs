use super::dense::{DenseMatrix, Scalar};
use crate::error::{check_len, Error, Result};

/// Storage precision of a factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Precision {
    #[default]
    Double,
    Single,
}

/// LU factorization with partial (row) pivoting, `P M = L U`.
///
/// `L` (unit diagonal) and `U` are packed into a single matrix. Right-hand
/// sides come in as `f64`, are solved in `T`, and returned as `f64`.
#[derive(Debug, Clone)]
pub struct LuFactorization<T: Scalar = f64> {
    factors: DenseMatrix<T>,
    pivots: Vec<usize>,
    /// Per row: first nonzero column of `L` and one past the last nonzero of `U`.
    extents: Vec<(usize, usize)>,
}

/// Factor `m` in precision `T`.
pub fn lu_factor<T: Scalar>(m: &DenseMatrix<f64>) -> Result<LuFactorization<T>> {
    LuFactorization::new(m.cast())
}

impl<T: Scalar> LuFactorization<T> {
    pub fn new(mut a: DenseMatrix<T>) -> Result<Self> {
        let n = a.n_rows();
        check_len("lu_factor (square)", n, a.n_cols())?;
        let scale = a.max_abs();
        // relative pivot threshold; exact zeros are always rejected
        let tiny = T::from_f64(scale * n as f64) * T::EPSILON;
        let mut pivots = Vec::with_capacity(n);

        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].abs();
            for i in k + 1..n {
                let v = a[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == T::ZERO || best <= tiny {
                return Err(Error::Singular { pivot: k });
            }
            a.swap_rows(k, p);
            pivots.push(p);

            let pivot_row: Vec<T> = a.row(k).to_vec();
            let last = pivot_row
                .iter()
                .rposition(|v| *v != T::ZERO)
                .unwrap_or(k);
            let inv = T::ONE / pivot_row[k];
            for i in k + 1..n {
                let row = a.row_mut(i);
                if row[k] == T::ZERO {
                    continue;
                }
                let l = row[k] * inv;
                row[k] = l;
                for j in k + 1..=last {
                    let u = pivot_row[j];
                    row[j] = row[j] - l * u;
                }
            }
        }
        let extents = (0..n)
            .map(|i| {
                let row = a.row(i);
                let lo = row[..i].iter().position(|v| *v != T::ZERO).unwrap_or(i);
                let hi = row[i..].iter().rposition(|v| *v != T::ZERO).map_or(i + 1, |j| i + j + 1);
                (lo, hi)
            })
            .collect();
        Ok(Self {
            factors: a,
            pivots,
            extents,
        })
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn factors(&self) -> &DenseMatrix<T> {
        &self.factors
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn precision(&self) -> Precision {
        if std::mem::size_of::<T>() == 4 {
            Precision::Single
        } else {
            Precision::Double
        }
    }

    /// Solve `M x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len("LuFactorization::solve", self.dim(), b.len())?;
        let mut work: Vec<T> = b.iter().map(|&v| T::from_f64(v)).collect();
        self.solve_in_place(&mut work);
        Ok(work.into_iter().map(Scalar::to_f64).collect())
    }

    pub(crate) fn solve_in_place(&self, x: &mut [T]) {
        let n = self.dim();
        for (k, &p) in self.pivots.iter().enumerate() {
            x.swap(k, p);
        }
        for i in 0..n {
            let row = self.factors.row(i);
            let mut s = x[i];
            for j in self.extents[i].0..i {
                if row[j] != T::ZERO {
                    s = s - row[j] * x[j];
                }
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.factors.row(i);
            let mut s = x[i];
            for j in i + 1..self.extents[i].1 {
                if row[j] != T::ZERO {
                    s = s - row[j] * x[j];
                }
            }
            x[i] = s / row[i];
        }
    }

    /// Solve with `steps` rounds of iterative refinement; residuals are
    /// formed in f64 against the original matrix.
    pub fn solve_refined(&self, m: &DenseMatrix<f64>, b: &[f64], steps: usize) -> Result<Vec<f64>> {
        let mut x = self.solve(b)?;
        for _ in 0..steps {
            let mx = m.matvec(&x)?;
            let r: Vec<f64> = b.iter().zip(&mx).map(|(bi, ai)| bi - ai).collect();
            let dx = self.solve(&r)?;
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
        Ok(x)
    }

    /// Explicit inverse, one column solve at a time.
    pub fn inverse(&self) -> DenseMatrix<f64> {
        let n = self.dim();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut col = vec![T::ZERO; n];
        for j in 0..n {
            col.iter_mut().for_each(|c| *c = T::ZERO);
            col[j] = T::ONE;
            self.solve_in_place(&mut col);
            for i in 0..n {
                inv[(i, j)] = col[i].to_f64();
            }
        }
        inv
    }
}
