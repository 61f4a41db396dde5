//! Sparsity patterns, the gather/scatter pair between sparse matrices and their
//! nonzero values, and full-order snapshot sets.
//!
//! Coordinates are 0-based `(row, col)` pairs. A pattern lists them in
//! column-major order, so the column-wise linear index `col * n + row` is
//! strictly increasing along the pattern.

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseMatrix};

/// Ordered nonzero coordinate set of an `n x n` matrix.
#[derive(Debug, Clone)]
pub struct SparsityPattern {
    n: usize,
    coords: Vec<(usize, usize)>,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    /// Pattern position of each CSR slot.
    csr_to_pattern: Vec<usize>,
}

impl PartialEq for SparsityPattern {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.coords == other.coords
    }
}

impl Eq for SparsityPattern {}

fn column_major_key(c: &(usize, usize)) -> (usize, usize) {
    (c.1, c.0)
}

impl SparsityPattern {
    /// Builds a pattern from coordinates already sorted in column-major order.
    pub fn new(n: usize, coords: Vec<(usize, usize)>) -> Result<Self> {
        for (k, &(a, b)) in coords.iter().enumerate() {
            if a >= n || b >= n {
                return Err(Error::InvalidArgument(format!(
                    "coordinate ({a}, {b}) outside a {n}x{n} matrix"
                )));
            }
            if k > 0 && column_major_key(&coords[k - 1]) >= column_major_key(&coords[k]) {
                return Err(Error::InvalidArgument(format!(
                    "coordinates not strictly increasing in column-major order at position {k}"
                )));
            }
        }
        let mut by_row: Vec<usize> = (0..coords.len()).collect();
        by_row.sort_by_key(|&p| coords[p]);
        let mut row_offsets = vec![0usize; n + 1];
        for &(a, _) in &coords {
            row_offsets[a + 1] += 1;
        }
        for i in 0..n {
            row_offsets[i + 1] += row_offsets[i];
        }
        let col_indices = by_row.iter().map(|&p| coords[p].1).collect();
        Ok(Self {
            n,
            coords,
            row_offsets,
            col_indices,
            csr_to_pattern: by_row,
        })
    }

    /// Builds a pattern from coordinates in any order; duplicates are merged.
    pub fn from_unsorted(n: usize, mut coords: Vec<(usize, usize)>) -> Result<Self> {
        coords.sort_by_key(column_major_key);
        coords.dedup();
        Self::new(n, coords)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored coordinates.
    pub fn r(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[(usize, usize)] {
        &self.coords
    }

    /// Column-wise linear index of pattern position `p`.
    pub fn linear_index(&self, p: usize) -> usize {
        let (a, b) = self.coords[p];
        b * self.n + a
    }

    pub fn linear_indices(&self) -> Vec<usize> {
        (0..self.r()).map(|p| self.linear_index(p)).collect()
    }

    /// Pattern position of `(row, col)`, if present.
    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        self.coords
            .binary_search_by_key(&(col, row), column_major_key)
            .ok()
    }

    /// Pattern positions of row `a`, ordered by column.
    pub fn row_positions(&self, a: usize) -> &[usize] {
        &self.csr_to_pattern[self.row_offsets[a]..self.row_offsets[a + 1]]
    }

    pub fn has_full_diagonal(&self) -> bool {
        (0..self.n).all(|i| self.position(i, i).is_some())
    }

    /// Sparse matrix with this pattern holding `values` (pattern order).
    pub fn to_csr(&self, values: &[f64]) -> CsrMatrix {
        assert_eq!(values.len(), self.r());
        let vals = self.csr_to_pattern.iter().map(|&p| values[p]).collect();
        CsrMatrix::new(
            self.n,
            self.n,
            self.row_offsets.clone(),
            self.col_indices.clone(),
            vals,
        )
        .expect("pattern CSR structure is valid by construction")
    }

    /// Dense `n x n` matrix with this pattern holding `values`.
    pub fn to_dense(&self, values: &[f64]) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(self.n, self.n);
        for (&(r, c), &v) in self.coords.iter().zip(values) {
            a[(r, c)] = v;
        }
        a
    }
}

/// Pattern of the stored entries of a square sparse matrix.
pub fn build_pattern(j: &CsrMatrix) -> Result<SparsityPattern> {
    if j.nrows() != j.ncols() {
        return Err(Error::DimensionMismatch {
            context: "sparsity pattern of a square matrix",
            expected: j.nrows(),
            found: j.ncols(),
        });
    }
    SparsityPattern::from_unsorted(j.nrows(), j.iter().map(|(r, c, _)| (r, c)).collect())
}

/// Sorted union of patterns over the same dimension.
pub fn pattern_union(patterns: &[SparsityPattern]) -> Result<SparsityPattern> {
    let first = patterns
        .first()
        .ok_or_else(|| Error::InvalidArgument("pattern union of an empty list".into()))?;
    let n = first.n;
    let mut all = Vec::new();
    for p in patterns {
        if p.n != n {
            return Err(Error::DimensionMismatch {
                context: "pattern union",
                expected: n,
                found: p.n,
            });
        }
        all.extend_from_slice(&p.coords);
    }
    SparsityPattern::from_unsorted(n, all)
}

/// Values of `j` at the pattern coordinates.
pub fn gather(j: &CsrMatrix, p: &SparsityPattern) -> Result<Vec<f64>> {
    if j.nrows() != p.n || j.ncols() != p.n {
        return Err(Error::DimensionMismatch {
            context: "gather",
            expected: p.n,
            found: j.nrows(),
        });
    }
    let mut out = vec![0.0; p.r()];
    for (r, c, v) in j.iter() {
        match p.position(r, c) {
            Some(k) => out[k] = v,
            None => return Err(Error::PatternViolation { row: r, col: c }),
        }
    }
    Ok(out)
}

/// Sparse matrix with exactly the pattern `p` and values `v`.
pub fn scatter(v: &[f64], p: &SparsityPattern) -> Result<CsrMatrix> {
    if v.len() != p.r() {
        return Err(Error::DimensionMismatch {
            context: "scatter",
            expected: p.r(),
            found: v.len(),
        });
    }
    Ok(p.to_csr(v))
}

/// Gathered Jacobian snapshots of one implicit stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageJacobians {
    pub pattern: SparsityPattern,
    /// `r x N` matrix, one gathered Jacobian per column.
    pub values: DenseMatrix,
}

/// States, nonlinear-term values and gathered Jacobians from a full-order run.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub model_id: String,
    pub config_hash: u64,
    pub dt: f64,
    pub states: DenseMatrix,
    pub nonlinear: DenseMatrix,
    /// One entry per implicit stage; single-stage models have exactly one.
    pub stages: Vec<StageJacobians>,
}

impl SnapshotSet {
    pub fn new(
        model_id: impl Into<String>,
        config_hash: u64,
        dt: f64,
        states: DenseMatrix,
        nonlinear: DenseMatrix,
        stages: Vec<StageJacobians>,
    ) -> Result<Self> {
        let cols = states.ncols();
        if nonlinear.shape() != states.shape() {
            return Err(Error::DimensionMismatch {
                context: "nonlinear snapshot block",
                expected: cols,
                found: nonlinear.ncols(),
            });
        }
        if stages.is_empty() {
            return Err(Error::InvalidArgument("snapshot set without Jacobian stages".into()));
        }
        for st in &stages {
            if st.values.ncols() != cols {
                return Err(Error::DimensionMismatch {
                    context: "Jacobian snapshot columns",
                    expected: cols,
                    found: st.values.ncols(),
                });
            }
            if st.values.nrows() != st.pattern.r() {
                return Err(Error::DimensionMismatch {
                    context: "Jacobian snapshot rows",
                    expected: st.pattern.r(),
                    found: st.values.nrows(),
                });
            }
            if st.pattern.n() != states.nrows() {
                return Err(Error::DimensionMismatch {
                    context: "Jacobian pattern dimension",
                    expected: states.nrows(),
                    found: st.pattern.n(),
                });
            }
        }
        Ok(Self {
            model_id: model_id.into(),
            config_hash,
            dt,
            states,
            nonlinear,
            stages,
        })
    }

    pub fn n(&self) -> usize {
        self.states.nrows()
    }

    pub fn columns(&self) -> usize {
        self.states.ncols()
    }

    /// Pattern of the first implicit stage.
    pub fn pattern(&self) -> &SparsityPattern {
        &self.stages[0].pattern
    }

    /// Gathered Jacobian values of the first implicit stage.
    pub fn jacobian(&self) -> &DenseMatrix {
        &self.stages[0].values
    }

    /// Time levels `n x N_t` of the run that produced the snapshots: the
    /// stored states themselves for single-stage models, otherwise `x0`
    /// followed by the output of every last stage.
    pub fn time_levels(&self, x0: &[f64]) -> Result<DenseMatrix> {
        if x0.len() != self.n() {
            return Err(Error::DimensionMismatch {
                context: "initial state",
                expected: self.n(),
                found: x0.len(),
            });
        }
        let s = self.stages.len();
        if s <= 1 {
            return Ok(self.states.clone());
        }
        let levels = 1 + self.columns() / s;
        let mut out = DenseMatrix::zeros(self.n(), levels);
        out.column_mut(0).copy_from_slice(x0);
        for t in 1..levels {
            out.set_column(t, &self.states.column(t * s - 1));
        }
        Ok(out)
    }

    /// Copy restricted to the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let pick = |m: &DenseMatrix| DenseMatrix::from_fn(m.nrows(), cols.len(), |i, j| m[(i, cols[j])]);
        Self {
            model_id: self.model_id.clone(),
            config_hash: self.config_hash,
            dt: self.dt,
            states: pick(&self.states),
            nonlinear: pick(&self.nonlinear),
            stages: self
                .stages
                .iter()
                .map(|s| StageJacobians {
                    pattern: s.pattern.clone(),
                    values: pick(&s.values),
                })
                .collect(),
        }
    }
}

pub use crate::models::collect_snapshots;
