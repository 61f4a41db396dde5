use super::DenseMatrix;
use crate::error::{Error, Result};

/// Pivots below this fraction of `||A||_F` are treated as exact singularity.
const PIVOT_RTOL: f64 = 1e-14;

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactor {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl LuFactor {
    pub fn new(a: &DenseMatrix) -> Result<Self> {
        let m = a.nrows();
        if a.ncols() != m {
            return Err(Error::DimensionMismatch {
                context: "LU factorization (square matrix)",
                expected: m,
                found: a.ncols(),
            });
        }
        let scale = super::frobenius(a);
        let tol = PIVOT_RTOL * scale;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in k + 1..m {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tol) || best == 0.0 {
                return Err(Error::Singular {
                    index: k,
                    magnitude: best,
                });
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..m {
                lu[(i, k)] /= pivot;
            }
            for j in k + 1..m {
                let ukj = lu[(k, j)];
                if ukj == 0.0 {
                    continue;
                }
                let (head, tail) = lu.as_mut_slice().split_at_mut(j * m);
                let col_k = &head[k * m..(k + 1) * m];
                let col_j = &mut tail[..m];
                for i in k + 1..m {
                    col_j[i] -= col_k[i] * ukj;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let m = self.dim();
        if b.len() != m {
            return Err(Error::DimensionMismatch {
                context: "LU solve right-hand side",
                expected: m,
                found: b.len(),
            });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..m {
            let xj = x[j];
            if xj != 0.0 {
                let col = self.lu.column(j);
                for i in j + 1..m {
                    x[i] -= col[i] * xj;
                }
            }
        }
        for j in (0..m).rev() {
            x[j] /= self.lu[(j, j)];
            let xj = x[j];
            if xj != 0.0 {
                let col = self.lu.column(j);
                for i in 0..j {
                    x[i] -= col[i] * xj;
                }
            }
        }
        Ok(x)
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let mut out = DenseMatrix::zeros(b.nrows(), b.ncols());
        for j in 0..b.ncols() {
            let col: Vec<f64> = b.column(j).iter().copied().collect();
            let x = self.solve(&col)?;
            out.column_mut(j).copy_from_slice(&x);
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<DenseMatrix> {
        self.solve_matrix(&DenseMatrix::identity(self.dim(), self.dim()))
    }
}

/// Solves the square system `A x = b` by LU with partial pivoting.
pub fn solve_dense(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    LuFactor::new(a)?.solve(b)
}
