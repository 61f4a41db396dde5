use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};
use crate::snapshots::SparsityPattern;

/// One bilinear contribution `alpha ⊙ (left x) ⊙ (right x)`.
#[derive(Debug, Clone)]
pub struct BilinearTerm {
    pub alpha: Vec<f64>,
    pub left: CsrMatrix,
    pub right: CsrMatrix,
}

/// Quadratic right-hand side `F(x) = L x + Σ_t alpha_t ⊙ (Left_t x) ⊙ (Right_t x)`.
///
/// The Jacobian pattern is the structural union of `L`, every `Left_t` and
/// `Right_t`, and the diagonal. Jacobian values are produced directly in
/// pattern order, and entrywise sampling repeats the same arithmetic so that
/// sampled and assembled values agree bit for bit.
#[derive(Debug, Clone)]
pub struct QuadraticOperator {
    n: usize,
    linear: CsrMatrix,
    terms: Vec<BilinearTerm>,
    pattern: SparsityPattern,
    linear_at: Vec<f64>,
    left_at: Vec<Vec<f64>>,
    right_at: Vec<Vec<f64>>,
}

/// Jacobian entries at fixed coordinates as an affine function of the state:
/// `J(coords) = constant + weights x`.
#[derive(Debug, Clone)]
pub struct AffineSampler {
    pub coords: Vec<(usize, usize)>,
    pub constant: Vec<f64>,
    pub weights: CsrMatrix,
}

impl AffineSampler {
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.constant.len()];
        self.weights.mul_vec_into(x, &mut out);
        for (o, c) in out.iter_mut().zip(&self.constant) {
            *o += c;
        }
        out
    }
}

impl QuadraticOperator {
    pub fn new(linear: CsrMatrix, terms: Vec<BilinearTerm>) -> Result<Self> {
        let n = linear.nrows();
        let square = |m: &CsrMatrix| m.nrows() == n && m.ncols() == n;
        if !square(&linear) {
            return Err(Error::DimensionMismatch {
                context: "linear operator",
                expected: n,
                found: linear.ncols(),
            });
        }
        for t in &terms {
            if !square(&t.left) || !square(&t.right) || t.alpha.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "bilinear term",
                    expected: n,
                    found: t.alpha.len(),
                });
            }
        }
        let mut coords: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
        coords.extend(linear.iter().map(|(r, c, _)| (r, c)));
        for t in &terms {
            coords.extend(t.left.iter().map(|(r, c, _)| (r, c)));
            coords.extend(t.right.iter().map(|(r, c, _)| (r, c)));
        }
        let pattern = SparsityPattern::from_unsorted(n, coords)?;
        let at = |m: &CsrMatrix| -> Vec<f64> {
            pattern.coords().iter().map(|&(r, c)| m.get(r, c)).collect()
        };
        let linear_at = at(&linear);
        let left_at = terms.iter().map(|t| at(&t.left)).collect();
        let right_at = terms.iter().map(|t| at(&t.right)).collect();
        Ok(Self {
            n,
            linear,
            terms,
            pattern,
            linear_at,
            left_at,
            right_at,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn linear(&self) -> &CsrMatrix {
        &self.linear
    }

    pub fn terms(&self) -> &[BilinearTerm] {
        &self.terms
    }

    pub fn pattern(&self) -> &SparsityPattern {
        &self.pattern
    }

    fn products(&self, x: &[f64]) -> Vec<(Vec<f64>, Vec<f64>)> {
        self.terms
            .iter()
            .map(|t| {
                let mut lx = vec![0.0; self.n];
                let mut rx = vec![0.0; self.n];
                t.left.mul_vec_into(x, &mut lx);
                t.right.mul_vec_into(x, &mut rx);
                (lx, rx)
            })
            .collect()
    }

    /// Nonlinear part `Σ_t alpha_t ⊙ (Left_t x) ⊙ (Right_t x)`.
    pub fn nonlinear(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (t, (lx, rx)) in self.terms.iter().zip(self.products(x)) {
            for a in 0..self.n {
                y[a] += t.alpha[a] * lx[a] * rx[a];
            }
        }
        y
    }

    /// Full right-hand side `F(x)`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.linear.mul_vec_into(x, &mut y);
        for (t, (lx, rx)) in self.terms.iter().zip(self.products(x)) {
            for a in 0..self.n {
                y[a] += t.alpha[a] * lx[a] * rx[a];
            }
        }
        y
    }

    #[inline]
    fn entry(&self, p: usize, a: usize, lr: &[(f64, f64)]) -> f64 {
        let mut v = self.linear_at[p];
        for (t, &(lx, rx)) in lr.iter().enumerate() {
            let alpha = self.terms[t].alpha[a];
            v += alpha * rx * self.left_at[t][p];
            v += alpha * lx * self.right_at[t][p];
        }
        v
    }

    /// Jacobian values of `F` at `x`, in pattern order.
    pub fn jacobian_values(&self, x: &[f64]) -> Vec<f64> {
        let prods = self.products(x);
        let mut lr = vec![(0.0, 0.0); self.terms.len()];
        self.pattern
            .coords()
            .iter()
            .enumerate()
            .map(|(p, &(a, _))| {
                for (slot, (lx, rx)) in lr.iter_mut().zip(&prods) {
                    *slot = (lx[a], rx[a]);
                }
                self.entry(p, a, &lr)
            })
            .collect()
    }

    pub fn jacobian(&self, x: &[f64]) -> CsrMatrix {
        self.pattern.to_csr(&self.jacobian_values(x))
    }

    /// Jacobian values at the given pattern positions; touches only the rows involved.
    pub fn sample_positions(&self, x: &[f64], positions: &[usize]) -> Vec<f64> {
        let mut lr = vec![(0.0, 0.0); self.terms.len()];
        positions
            .iter()
            .map(|&p| {
                let a = self.pattern.coords()[p].0;
                for (slot, t) in lr.iter_mut().zip(&self.terms) {
                    *slot = (t.left.row_dot(a, x), t.right.row_dot(a, x));
                }
                self.entry(p, a, &lr)
            })
            .collect()
    }

    /// Jacobian values at arbitrary coordinates; entries outside the pattern are zero.
    pub fn sample_coords(&self, x: &[f64], coords: &[(usize, usize)]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(coords.len());
        for &(a, b) in coords {
            if a >= self.n || b >= self.n {
                return Err(Error::InvalidArgument(format!("coordinate ({a}, {b}) out of range")));
            }
            out.push(match self.pattern.position(a, b) {
                Some(p) => self.sample_positions(x, &[p])[0],
                None => 0.0,
            });
        }
        Ok(out)
    }

    /// Affine map from the state to the Jacobian entries at the given pattern positions.
    pub fn affine_sampler(&self, positions: &[usize]) -> AffineSampler {
        let mut constant = Vec::with_capacity(positions.len());
        let mut triplets = Vec::new();
        for (i, &p) in positions.iter().enumerate() {
            let a = self.pattern.coords()[p].0;
            constant.push(self.linear_at[p]);
            for (t, term) in self.terms.iter().enumerate() {
                let scale_right = term.alpha[a] * self.left_at[t][p];
                let scale_left = term.alpha[a] * self.right_at[t][p];
                if scale_right != 0.0 {
                    let (cols, vals) = term.right.row(a);
                    triplets.extend(cols.iter().zip(vals).map(|(&c, &v)| (i, c, scale_right * v)));
                }
                if scale_left != 0.0 {
                    let (cols, vals) = term.left.row(a);
                    triplets.extend(cols.iter().zip(vals).map(|(&c, &v)| (i, c, scale_left * v)));
                }
            }
        }
        AffineSampler {
            coords: positions.iter().map(|&p| self.pattern.coords()[p]).collect(),
            constant,
            weights: CsrMatrix::from_triplets(positions.len(), self.n, &triplets),
        }
    }

    /// Affine sampler at arbitrary coordinates; coordinates outside the
    /// pattern are identically zero.
    pub fn affine_sampler_at(&self, coords: &[(usize, usize)]) -> AffineSampler {
        let known: Vec<usize> = coords.iter().filter_map(|&(a, b)| self.pattern.position(a, b)).collect();
        let inner = self.affine_sampler(&known);
        let mut constant = Vec::with_capacity(coords.len());
        let mut trip = Vec::new();
        let mut k = 0;
        for (i, &(a, b)) in coords.iter().enumerate() {
            if self.pattern.position(a, b).is_some() {
                constant.push(inner.constant[k]);
                let (cols, vals) = inner.weights.row(k);
                trip.extend(cols.iter().zip(vals).map(|(&c, &v)| (i, c, v)));
                k += 1;
            } else {
                constant.push(0.0);
            }
        }
        AffineSampler {
            coords: coords.to_vec(),
            constant,
            weights: CsrMatrix::from_triplets(coords.len(), self.n, &trip),
        }
    }

    /// Rows `rows` of the nonlinear-part Jacobian times `basis`, as an affine
    /// function of the state: returns per term the sampled `Left U`, `Right U`
    /// blocks and the matching `alpha` entries.
    pub fn sampled_term_blocks(&self, rows: &[usize], basis: &DenseMatrix) -> Vec<SampledTerm> {
        self.terms
            .iter()
            .map(|t| {
                let pick = |m: &CsrMatrix| {
                    DenseMatrix::from_fn(rows.len(), basis.ncols(), |i, j| {
                        let (cols, vals) = m.row(rows[i]);
                        cols.iter().zip(vals).map(|(&c, &v)| v * basis[(c, j)]).sum()
                    })
                };
                SampledTerm {
                    alpha: rows.iter().map(|&a| t.alpha[a]).collect(),
                    left_basis: pick(&t.left),
                    right_basis: pick(&t.right),
                    left_rows: sparse_rows(&t.left, rows),
                    right_rows: sparse_rows(&t.right, rows),
                }
            })
            .collect()
    }
}

fn sparse_rows(m: &CsrMatrix, rows: &[usize]) -> CsrMatrix {
    let mut trip = Vec::new();
    for (i, &a) in rows.iter().enumerate() {
        let (cols, vals) = m.row(a);
        trip.extend(cols.iter().zip(vals).map(|(&c, &v)| (i, c, v)));
    }
    CsrMatrix::from_triplets(rows.len(), m.ncols(), &trip)
}

/// Row-sampled pieces of one bilinear term.
#[derive(Debug, Clone)]
pub struct SampledTerm {
    pub alpha: Vec<f64>,
    /// `(Left U)` restricted to the sampled rows.
    pub left_basis: DenseMatrix,
    /// `(Right U)` restricted to the sampled rows.
    pub right_basis: DenseMatrix,
    pub left_rows: CsrMatrix,
    pub right_rows: CsrMatrix,
}
