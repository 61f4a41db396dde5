use super::DenseMatrix;
use crate::error::{Error, Result};

/// Compressed sparse row matrix with strictly increasing column indexes per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from raw CSR arrays, validating the structure.
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(Error::DimensionMismatch {
                context: "CSR row offsets",
                expected: nrows + 1,
                found: row_offsets.len(),
            });
        }
        if col_indices.len() != values.len() || *row_offsets.last().unwrap() != values.len() {
            return Err(Error::DimensionMismatch {
                context: "CSR values",
                expected: col_indices.len(),
                found: values.len(),
            });
        }
        for r in 0..nrows {
            let (lo, hi) = (row_offsets[r], row_offsets[r + 1]);
            if lo > hi {
                return Err(Error::InvalidArgument(format!("row offsets decrease at row {r}")));
            }
            let cols = &col_indices[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "column indexes of row {r} are not strictly increasing"
                )));
            }
            if let Some(&c) = cols.last() {
                if c >= ncols {
                    return Err(Error::InvalidArgument(format!("column {c} out of range in row {r}")));
                }
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Assembles from `(row, col, value)` triplets; duplicate positions are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_offsets = vec![0usize; nrows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &sorted {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of range");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_offsets[r + 1] += row_offsets[r];
        }
        Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_offsets: vec![0; nrows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_dense(a: &DenseMatrix) -> Self {
        let mut trip = Vec::new();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if a[(i, j)] != 0.0 {
                    trip.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(a.nrows(), a.ncols(), &trip)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Column indexes and values of one row.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[r], self.row_offsets[r + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Position of `(r, c)` in the value array, if stored.
    pub fn position(&self, r: usize, c: usize) -> Option<usize> {
        let lo = self.row_offsets[r];
        let (cols, _) = self.row(r);
        cols.binary_search(&c).ok().map(|k| lo + k)
    }

    /// Stored value at `(r, c)`; zero when not stored.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.position(r, c).map_or(0.0, |p| self.values[p])
    }

    /// Iterates `(row, col, value)` over stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            a[(r, c)] = v;
        }
        a
    }

    /// Row dot product `A[r,:] . x`.
    #[inline]
    pub fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let (cols, vals) = self.row(r);
        cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
    }

    /// `A x` into a preallocated buffer.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate().take(self.nrows) {
            *out = self.row_dot(r, x);
        }
    }

    /// Sparse-times-dense product `A B`.
    pub fn mul_dense(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.ncols, b.nrows());
        let mut out = DenseMatrix::zeros(self.nrows, b.ncols());
        for j in 0..b.ncols() {
            let col = b.column(j);
            let src = col.as_slice();
            let mut dst = out.column_mut(j);
            for r in 0..self.nrows {
                dst[r] = self.row_dot(r, src);
            }
        }
        out
    }

    /// `I - scale * A` for a square matrix, keeping the stored pattern.
    ///
    /// The diagonal must be stored (structural zeros allowed).
    pub fn identity_minus_scaled(&self, scale: f64) -> Self {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v *= -scale;
        }
        for r in 0..self.nrows {
            let p = out
                .position(r, r)
                .expect("identity shift requires a stored diagonal");
            out.values[p] += 1.0;
        }
        out
    }
}

/// Exact sparse matrix-vector product.
pub fn spmv(a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != a.ncols {
        return Err(Error::DimensionMismatch {
            context: "spmv",
            expected: a.ncols,
            found: x.len(),
        });
    }
    let mut y = vec![0.0; a.nrows];
    a.mul_vec_into(x, &mut y);
    Ok(y)
}

/// Banded LU with partial pivoting of one connected block.
#[derive(Debug, Clone)]
struct BandedBlock {
    /// Global indexes of the block's unknowns, increasing.
    members: Vec<usize>,
    lower: usize,
    upper: usize,
    /// Row-major band storage; row `i` holds columns `i - lower ..= i + lower + upper`.
    band: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedBlock {
    fn width(&self) -> usize {
        2 * self.lower + self.upper + 1
    }

    #[inline]
    fn at(&self, i: usize, c: usize) -> usize {
        i * self.width() + (c + self.lower - i)
    }

    fn factor(&mut self, tol: f64) -> Result<()> {
        let s = self.members.len();
        let (kl, ku) = (self.lower, self.upper);
        for k in 0..s {
            let last_row = (k + kl).min(s - 1);
            let mut p = k;
            let mut best = self.band[self.at(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.band[self.at(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tol) || best == 0.0 {
                return Err(Error::Singular {
                    index: self.members[k],
                    magnitude: best,
                });
            }
            self.pivots.push(p);
            let last_col = (k + kl + ku).min(s - 1);
            if p != k {
                for c in k..=last_col {
                    let (a, b) = (self.at(k, c), self.at(p, c));
                    self.band.swap(a, b);
                }
            }
            let pivot = self.band[self.at(k, k)];
            for i in k + 1..=last_row {
                let lpos = self.at(i, k);
                let l = self.band[lpos] / pivot;
                self.band[lpos] = l;
                if l != 0.0 {
                    for c in k + 1..=last_col {
                        let u = self.band[self.at(k, c)];
                        let pos = self.at(i, c);
                        self.band[pos] -= l * u;
                    }
                }
            }
        }
        Ok(())
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        let s = self.members.len();
        let (kl, ku) = (self.lower, self.upper);
        for k in 0..s {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            for i in k + 1..=(k + kl).min(s - 1) {
                x[i] -= self.band[self.at(i, k)] * xk;
            }
        }
        for k in (0..s).rev() {
            let mut v = x[k];
            for c in k + 1..=(k + kl + ku).min(s - 1) {
                v -= self.band[self.at(k, c)] * x[c];
            }
            x[k] = v / self.band[self.at(k, k)];
        }
    }
}

/// Direct sparse solver: splits the matrix into its connected blocks and factors
/// each block with a banded partial-pivoting LU.
#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    blocks: Vec<BandedBlock>,
}

impl SparseLu {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows;
        if a.ncols != n {
            return Err(Error::DimensionMismatch {
                context: "sparse LU (square matrix)",
                expected: n,
                found: a.ncols,
            });
        }
        let scale = a.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        let tol = 1e-14 * scale;

        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (r, c, _) in a.iter() {
            let (ra, rb) = (find(&mut parent, r), find(&mut parent, c));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut block_of = vec![usize::MAX; n];
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut root_block = std::collections::HashMap::new();
        for i in 0..n {
            let root = find(&mut parent, i);
            let b = *root_block.entry(root).or_insert_with(|| {
                members.push(Vec::new());
                members.len() - 1
            });
            block_of[i] = b;
            members[b].push(i);
        }
        let mut local = vec![0usize; n];
        for m in &members {
            for (k, &g) in m.iter().enumerate() {
                local[g] = k;
            }
        }
        let mut bands = vec![(0usize, 0usize); members.len()];
        for (r, c, _) in a.iter() {
            let b = block_of[r];
            let (lr, lc) = (local[r], local[c]);
            if lr > lc {
                bands[b].0 = bands[b].0.max(lr - lc);
            } else {
                bands[b].1 = bands[b].1.max(lc - lr);
            }
        }
        let mut blocks: Vec<BandedBlock> = members
            .into_iter()
            .zip(bands)
            .map(|(members, (lower, upper))| {
                let w = 2 * lower + upper + 1;
                let len = members.len();
                BandedBlock {
                    members,
                    lower,
                    upper,
                    band: vec![0.0; len * w],
                    pivots: Vec::with_capacity(len),
                }
            })
            .collect();
        for (r, c, v) in a.iter() {
            let blk = &mut blocks[block_of[r]];
            let pos = blk.at(local[r], local[c]);
            blk.band[pos] = v;
        }
        for blk in blocks.iter_mut() {
            blk.factor(tol)?;
        }
        Ok(Self { n, blocks })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "sparse LU right-hand side",
                expected: self.n,
                found: b.len(),
            });
        }
        let mut x = vec![0.0; self.n];
        let mut buf = Vec::new();
        for blk in &self.blocks {
            buf.clear();
            buf.extend(blk.members.iter().map(|&g| b[g]));
            blk.solve_in_place(&mut buf);
            for (&g, &v) in blk.members.iter().zip(&buf) {
                x[g] = v;
            }
        }
        Ok(x)
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }
}
