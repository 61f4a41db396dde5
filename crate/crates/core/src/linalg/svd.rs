use super::{record_svd_call, DenseMatrix};
use crate::error::{Error, Result};

/// Sweep cap handed to the small-core bidiagonal QR iteration.
const MAX_SWEEPS: usize = 10_000;

/// Entries below this fraction of a column's largest magnitude are skipped when
/// fixing the column sign.
const SIGN_RTOL: f64 = 1e-12;

/// Thin singular value decomposition `A = U diag(singulars) Wᵀ`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Left singular vectors, `rows x s`, orthonormal columns.
    pub u: DenseMatrix,
    /// Singular values, nonincreasing.
    pub singulars: Vec<f64>,
    /// Right singular vectors, `s x s`, orthogonal.
    pub w: DenseMatrix,
}

impl SvdResult {
    /// Rebuilds `U diag(Σ) Wᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.singulars.iter().enumerate() {
            us.column_mut(j).scale_mut(s);
        }
        us * self.w.transpose()
    }

    /// Number of singular values above `rtol * σ₁`.
    pub fn numerical_rank(&self, rtol: f64) -> usize {
        let top = self.singulars.first().copied().unwrap_or(0.0);
        self.singulars.iter().take_while(|&&s| s > rtol * top && s > 0.0).count()
    }
}

/// Householder QR of a tall matrix, with `Q` kept in factored form.
///
/// Reflector `k` is stored below the diagonal of column `k` of `packed`, with
/// its implicit leading entry equal to one.
#[derive(Debug, Clone)]
pub struct QrFactor {
    packed: DenseMatrix,
    betas: Vec<f64>,
}

impl QrFactor {
    /// Upper triangular `s x s` factor.
    pub fn r(&self) -> DenseMatrix {
        let s = self.packed.ncols();
        self.packed.rows(0, s).upper_triangle()
    }

    /// Computes `Q [B; 0]` for an `s x c` matrix `B`.
    pub fn apply_q(&self, b: &DenseMatrix) -> DenseMatrix {
        let (m, s) = self.packed.shape();
        assert_eq!(b.nrows(), s);
        let mut out = DenseMatrix::zeros(m, b.ncols());
        out.rows_mut(0, s).copy_from(b);
        for k in (0..s).rev() {
            let beta = self.betas[k];
            if beta == 0.0 {
                continue;
            }
            let v = &self.packed.as_slice()[k * m + k + 1..(k + 1) * m];
            for j in 0..out.ncols() {
                let mut col = out.column_mut(j);
                let tail = &mut col.as_mut_slice()[k..];
                let d = tail[0] + v.iter().zip(&tail[1..]).map(|(a, b)| a * b).sum::<f64>();
                let f = beta * d;
                if f != 0.0 {
                    tail[0] -= f;
                    for (t, vi) in tail[1..].iter_mut().zip(v) {
                        *t -= f * vi;
                    }
                }
            }
        }
        out
    }

    /// Explicit thin `Q`, `rows x s`.
    pub fn q(&self) -> DenseMatrix {
        let s = self.packed.ncols();
        self.apply_q(&DenseMatrix::identity(s, s))
    }
}

/// Householder QR of a `rows x s` matrix with `rows >= s`.
pub fn householder_qr(a: &DenseMatrix) -> Result<QrFactor> {
    householder_qr_owned(a.clone())
}

/// Householder QR reusing the input storage.
pub fn householder_qr_owned(mut work: DenseMatrix) -> Result<QrFactor> {
    let (m, s) = work.shape();
    if s > m {
        return Err(Error::WideMatrix { rows: m, cols: s });
    }
    let mut betas = Vec::with_capacity(s);
    for k in 0..s {
        let (head, rest) = work.as_mut_slice().split_at_mut((k + 1) * m);
        let x = &mut head[k * m + k..];
        let scale = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if scale == 0.0 {
            betas.push(0.0);
            continue;
        }
        let norm = scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt();
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let v0 = x[0] - alpha;
        for vi in x[1..].iter_mut() {
            *vi /= v0;
        }
        let vtv = 1.0 + x[1..].iter().map(|t| t * t).sum::<f64>();
        let beta = 2.0 / vtv;
        x[0] = alpha;
        let v = &x[1..];
        for j in 0..s - k - 1 {
            let tail = &mut rest[j * m + k..(j + 1) * m];
            let d = tail[0] + v.iter().zip(&tail[1..]).map(|(a, b)| a * b).sum::<f64>();
            let f = beta * d;
            if f != 0.0 {
                tail[0] -= f;
                for (t, vi) in tail[1..].iter_mut().zip(v) {
                    *t -= f * vi;
                }
            }
        }
        betas.push(beta);
    }
    Ok(QrFactor { packed: work, betas })
}

/// Thin SVD of a `rows x s` matrix with `s <= rows`.
///
/// Reduces to an `s x s` core by Householder QR, factors the core by
/// bidiagonalization and implicit-shift QR, then maps the left vectors back.
/// Each left vector is signed so that its first non-negligible entry is
/// nonnegative; the matching right vector is flipped with it.
pub fn thin_svd(a: &DenseMatrix) -> Result<SvdResult> {
    thin_svd_owned(a.clone())
}

/// [`thin_svd`] consuming its input, so the factorization reuses its storage.
pub fn thin_svd_owned(a: DenseMatrix) -> Result<SvdResult> {
    let (m, s) = (a.nrows(), a.ncols());
    if s > m {
        return Err(Error::WideMatrix { rows: m, cols: s });
    }
    for j in 0..s {
        for i in 0..m {
            if !a[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    record_svd_call();
    if s == 0 {
        return Ok(SvdResult {
            u: DenseMatrix::zeros(m, 0),
            singulars: Vec::new(),
            w: DenseMatrix::zeros(0, 0),
        });
    }
    // Exactly zero rows are moved below the others so the reflectors never
    // touch them; they come back as exactly zero rows of `u`.
    let mut a = a;
    let order = zero_rows_last(&a);
    if let Some(order) = &order {
        permute_rows(&mut a, |dst| order[dst]);
    }
    let qr = householder_qr_owned(a)?;
    // Entries below round-off of the core are flushed: strongly graded cores
    // (rank-deficient inputs leave trailing entries near underflow) otherwise
    // break the bidiagonal iteration.
    let r = qr.r();
    let r_norm = super::frobenius(&r);
    let flush = r_norm * f64::EPSILON;
    let r = r.map(|v| if v.abs() <= flush { 0.0 } else { v });
    let core = nalgebra::linalg::SVD::try_new(r.clone(), true, true, f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::SvdNoConvergence { first: 0, last: s })?;
    let (u_core, vt) = match (core.u, core.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::SvdNoConvergence { first: 0, last: s }),
    };
    let recomposed = &u_core * DenseMatrix::from_diagonal(&core.singular_values) * &vt;
    if super::frobenius(&(recomposed - &r)) > 1e-10 * r_norm.max(f64::MIN_POSITIVE) {
        return Err(Error::SvdNoConvergence { first: 0, last: s });
    }
    let mut u = qr.apply_q(&u_core);
    if let Some(order) = &order {
        let mut inverse = vec![0; order.len()];
        for (dst, &src) in order.iter().enumerate() {
            inverse[src] = dst;
        }
        permute_rows(&mut u, |dst| inverse[dst]);
    }
    let mut w = vt.transpose();
    let singulars: Vec<f64> = core.singular_values.iter().copied().collect();
    for j in 0..s {
        let col = u.column(j);
        let top = col.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let lead = col.iter().copied().find(|v| v.abs() > SIGN_RTOL * top);
        if matches!(lead, Some(v) if v < 0.0) {
            u.column_mut(j).neg_mut();
            w.column_mut(j).neg_mut();
        }
    }
    Ok(SvdResult { u, singulars, w })
}

/// Row order with every exactly zero row after the nonzero ones, or `None`
/// when no row moves.
fn zero_rows_last(a: &DenseMatrix) -> Option<Vec<usize>> {
    let m = a.nrows();
    let mut nonzero = vec![false; m];
    for col in a.column_iter() {
        for (flag, &v) in nonzero.iter_mut().zip(col.iter()) {
            *flag |= v != 0.0;
        }
    }
    let first_zero = nonzero.iter().position(|&f| !f)?;
    if nonzero[first_zero..].iter().all(|&f| !f) {
        return None;
    }
    let order: Vec<usize> = (0..m).filter(|&i| nonzero[i]).chain((0..m).filter(|&i| !nonzero[i])).collect();
    Some(order)
}

/// Row `dst` of the result is row `source(dst)` of the input.
fn permute_rows(a: &mut DenseMatrix, source: impl Fn(usize) -> usize) {
    let m = a.nrows();
    let mut buf = vec![0.0; m];
    for mut col in a.column_iter_mut() {
        for (dst, b) in buf.iter_mut().enumerate() {
            *b = col[source(dst)];
        }
        col.as_mut_slice().copy_from_slice(&buf);
    }
}

/// Thin SVD of a matrix of any shape; wide inputs are factored through their
/// transpose. `u` is `rows x min`, `w` is `cols x min`.
pub fn economy_svd(a: &DenseMatrix) -> Result<SvdResult> {
    if a.ncols() <= a.nrows() {
        return thin_svd(a);
    }
    let t = thin_svd(&a.transpose())?;
    Ok(SvdResult {
        u: t.w,
        singulars: t.singulars,
        w: t.u,
    })
}
