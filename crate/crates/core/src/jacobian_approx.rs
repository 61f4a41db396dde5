//! Interpolation of sparse Jacobians from gathered snapshots, its dense
//! vectorized reference, and the row-sampled function-interpolation Jacobian.

use crate::deim::{deim_interpolant, DeimInterpolant};
use crate::error::{Error, Result};
use crate::linalg::{frobenius, thin_svd, thin_svd_owned, CsrMatrix, DenseMatrix};
use crate::snapshots::{SnapshotSet, SparsityPattern, StageJacobians};

/// Largest `n` for which the dense reference is built unless overridden.
pub const DEFAULT_GUARD_N: usize = 512;

/// Environment variable overriding [`DEFAULT_GUARD_N`].
pub const GUARD_ENV: &str = "SMDEIM_GUARD_N";

/// Singular values below this fraction of the largest count as numerically zero.
const RANK_RTOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpolantMode {
    /// Interpolates the `r` gathered nonzero values.
    Sparse,
    /// Interpolates the full `n²` column-wise vectorization.
    DenseReference,
}

/// Matrix interpolant with its online sampling locations.
#[derive(Debug, Clone)]
pub struct MatrixInterpolant {
    pub pattern: SparsityPattern,
    pub interpolant: DeimInterpolant,
    /// `(row, col)` of each interpolation index.
    pub sample_coords: Vec<(usize, usize)>,
    pub mode: InterpolantMode,
    /// Spectrum of the factored snapshot matrix.
    pub singulars: Vec<f64>,
}

impl MatrixInterpolant {
    pub fn m(&self) -> usize {
        self.interpolant.m()
    }

    /// Interpolation indexes as column-wise linear indexes `col * n + row`.
    pub fn linear_indexes(&self) -> Vec<usize> {
        let n = self.pattern.n();
        self.sample_coords.iter().map(|&(a, b)| b * n + a).collect()
    }

    /// Pattern positions of the sample coordinates (sparse mode only).
    pub fn sample_positions(&self) -> Option<Vec<usize>> {
        match self.mode {
            InterpolantMode::Sparse => Some(self.interpolant.indexes.clone()),
            InterpolantMode::DenseReference => None,
        }
    }

    /// Interpolated values: gathered (`r`) in sparse mode, vectorized (`n²`) otherwise.
    pub fn approximate_values(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.interpolant.interpolate(samples)
    }
}

/// Memory guard for the dense reference: `SMDEIM_GUARD_N` if set, else [`DEFAULT_GUARD_N`].
pub fn guard_from_env() -> usize {
    std::env::var(GUARD_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_GUARD_N)
}

fn check_order(m: usize, singulars: &[f64], columns: usize) -> Result<()> {
    if m == 0 || m > columns {
        return Err(Error::InvalidArgument(format!(
            "interpolant order must satisfy 1 <= m <= {columns}, got {m}"
        )));
    }
    let top = singulars.first().copied().unwrap_or(0.0);
    let rank = singulars.iter().filter(|&&s| s > RANK_RTOL * top).count();
    if m > rank {
        return Err(Error::RankExceeded { requested: m, rank });
    }
    Ok(())
}

/// Sparse interpolant of the first stage of a snapshot set.
pub fn build_smdeim(snap: &SnapshotSet, m: usize) -> Result<MatrixInterpolant> {
    build_smdeim_stage(&snap.stages[0], m)
}

/// Sparse interpolant from gathered Jacobian snapshots: factors the `r x N`
/// value matrix and selects `m` indexes among the pattern positions.
pub fn build_smdeim_stage(stage: &StageJacobians, m: usize) -> Result<MatrixInterpolant> {
    let svd = thin_or_wide_svd(&stage.values)?;
    check_order(m, &svd.1, stage.values.ncols())?;
    let interpolant = deim_interpolant(&svd.0, m)?;
    let sample_coords = interpolant
        .indexes
        .iter()
        .map(|&p| stage.pattern.coords()[p])
        .collect();
    Ok(MatrixInterpolant {
        pattern: stage.pattern.clone(),
        interpolant,
        sample_coords,
        mode: InterpolantMode::Sparse,
        singulars: svd.1,
    })
}

/// Left singular vectors and spectrum of a snapshot matrix of any shape.
fn thin_or_wide_svd(a: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>)> {
    let svd = crate::linalg::economy_svd(a)?;
    Ok((svd.u, svd.singulars))
}

/// Dense reference interpolant of the first stage, guarded by `SMDEIM_GUARD_N`.
pub fn build_mdeim_reference(snap: &SnapshotSet, m: usize) -> Result<MatrixInterpolant> {
    build_mdeim_reference_with_guard(&snap.stages[0], m, guard_from_env())
}

/// Column-wise vectorized snapshot matrix, `n² x N`.
pub fn vectorized_snapshots(stage: &StageJacobians) -> DenseMatrix {
    let n = stage.pattern.n();
    let cols = stage.values.ncols();
    let lin = stage.pattern.linear_indices();
    let mut full = DenseMatrix::zeros(n * n, cols);
    for c in 0..cols {
        let src = stage.values.column(c);
        let mut dst = full.column_mut(c);
        for (p, &li) in lin.iter().enumerate() {
            dst[li] = src[p];
        }
    }
    full
}

/// Dense reference interpolant: materializes and factors the `n² x N`
/// vectorized snapshots. Fails with a memory-guard error when `n > guard`.
pub fn build_mdeim_reference_with_guard(
    stage: &StageJacobians,
    m: usize,
    guard: usize,
) -> Result<MatrixInterpolant> {
    let n = stage.pattern.n();
    if n > guard {
        return Err(Error::MemoryGuard { n, limit: guard });
    }
    let full = vectorized_snapshots(stage);
    let cols = full.ncols();
    let svd = if full.nrows() >= cols {
        thin_svd_owned(full)?
    } else {
        crate::linalg::economy_svd(&full)?
    };
    check_order(m, &svd.singulars, cols)?;
    let interpolant = deim_interpolant(&svd.u, m)?;
    let sample_coords = interpolant.indexes.iter().map(|&li| (li % n, li / n)).collect();
    Ok(MatrixInterpolant {
        pattern: stage.pattern.clone(),
        interpolant,
        sample_coords,
        mode: InterpolantMode::DenseReference,
        singulars: svd.singulars,
    })
}

/// Sparse matrix from interpolation samples `J(sample_coords)`.
///
/// In sparse mode the result has exactly the interpolant's pattern; the dense
/// reference keeps every nonzero of the interpolated `n²` vector.
pub fn approximate_matrix(interp: &MatrixInterpolant, samples: &[f64]) -> Result<CsrMatrix> {
    let values = interp.approximate_values(samples)?;
    let n = interp.pattern.n();
    match interp.mode {
        InterpolantMode::Sparse => Ok(interp.pattern.to_csr(&values)),
        InterpolantMode::DenseReference => {
            let trip: Vec<(usize, usize, f64)> = values
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(li, &v)| (li % n, li / n, v))
                .collect();
            Ok(CsrMatrix::from_triplets(n, n, &trip))
        }
    }
}

/// Checks that padding the gathered thin SVD back to `n²` rows gives a thin
/// SVD of the vectorized snapshots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma2Report {
    /// `‖S − P̄ᵀ V Σ Wᵀ‖_F / ‖S‖_F` with `S` the vectorized snapshots.
    pub reconstruction: f64,
    /// Largest `|⟨P̄ᵀ v_j, P̄ᵀ v_l⟩ − δ_jl|` over the retained columns.
    pub orthonormality: f64,
    /// Largest gap between gathered and vectorized singular values, relative to `σ₁`.
    pub spectrum_gap: f64,
}

/// Verifies the padded gathered SVD against the dense vectorized snapshots.
pub fn verify_lemma2(snap: &SnapshotSet) -> Result<Lemma2Report> {
    verify_lemma2_with_guard(&snap.stages[0], guard_from_env())
}

pub fn verify_lemma2_with_guard(stage: &StageJacobians, guard: usize) -> Result<Lemma2Report> {
    let n = stage.pattern.n();
    if n > guard {
        return Err(Error::MemoryGuard { n, limit: guard });
    }
    let full = vectorized_snapshots(stage);
    let gathered = crate::linalg::economy_svd(&stage.values)?;
    let s = gathered.singulars.len();
    let lin = stage.pattern.linear_indices();
    let mut padded = DenseMatrix::zeros(n * n, s);
    for j in 0..s {
        for (p, &li) in lin.iter().enumerate() {
            padded[(li, j)] = gathered.u[(p, j)];
        }
    }
    let mut us = padded.clone();
    for (j, &sv) in gathered.singulars.iter().enumerate() {
        us.column_mut(j).scale_mut(sv);
    }
    let recon = &us * gathered.w.transpose();
    let norm = frobenius(&full);
    let reconstruction = if norm == 0.0 { 0.0 } else { frobenius(&(&full - recon)) / norm };
    let gram = padded.transpose() * &padded;
    let mut orthonormality = 0.0f64;
    for j in 0..s {
        for l in 0..s {
            let target = if j == l { 1.0 } else { 0.0 };
            orthonormality = orthonormality.max((gram[(j, l)] - target).abs());
        }
    }
    let dense = if full.nrows() >= full.ncols() {
        thin_svd_owned(full)?.singulars
    } else {
        thin_svd(&full.transpose())?.singulars
    };
    let top = gathered.singulars.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let spectrum_gap = gathered
        .singulars
        .iter()
        .zip(&dense)
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs() / top));
    Ok(Lemma2Report {
        reconstruction,
        orthonormality,
        spectrum_gap,
    })
}

/// Row-sampled Jacobian approximation `V (Pᵀ V)⁻¹ Pᵀ J` from the rows of `J`
/// at the function interpolation indexes (`j_rows` is `m x n`).
pub fn deim_function_jacobian(fn_basis: &DeimInterpolant, j_rows: &CsrMatrix) -> Result<DenseMatrix> {
    if j_rows.nrows() != fn_basis.m() {
        return Err(Error::DimensionMismatch {
            context: "sampled Jacobian rows",
            expected: fn_basis.m(),
            found: j_rows.nrows(),
        });
    }
    let dense_rows = j_rows.to_dense();
    Ok(&fn_basis.projector * dense_rows)
}

/// Rows of `j` at the interpolation indexes of `fn_basis`.
pub fn sample_rows(fn_basis: &DeimInterpolant, j: &CsrMatrix) -> Result<CsrMatrix> {
    let mut trip = Vec::new();
    for (i, &a) in fn_basis.indexes.iter().enumerate() {
        if a >= j.nrows() {
            return Err(Error::InvalidArgument(format!("row index {a} out of range")));
        }
        let (cols, vals) = j.row(a);
        trip.extend(cols.iter().zip(vals).map(|(&c, &v)| (i, c, v)));
    }
    Ok(CsrMatrix::from_triplets(fn_basis.m(), j.ncols(), &trip))
}
