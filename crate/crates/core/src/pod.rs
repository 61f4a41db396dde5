//! Proper orthogonal decomposition bases with energy-fraction truncation.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{economy_svd, DenseMatrix};

/// Relative slack when comparing cumulative energy against the threshold, so
/// that `gamma = 1` stops at the numerical rank instead of chasing round-off.
const ENERGY_SLACK: f64 = 1e-14;

/// Orthonormal POD modes with their spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct PodBasis {
    /// `n x k` modes.
    pub u: DenseMatrix,
    /// Full singular value spectrum; for block bases, the per-block spectra
    /// concatenated in block order.
    pub singulars: Vec<f64>,
    pub k: usize,
    pub gamma: f64,
    pub centered: bool,
    /// Snapshot mean, zero when uncentered.
    pub mean: Vec<f64>,
}

impl PodBasis {
    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    /// Reduced coordinates `Uᵀ (x - mean)`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        (0..self.k)
            .map(|j| crate::linalg::dot(self.u.column(j).as_slice(), &centered))
            .collect()
    }

    /// Lifted state `mean + U x̃`.
    pub fn lift(&self, xr: &[f64]) -> Vec<f64> {
        let mut x = self.mean.clone();
        for (j, &c) in xr.iter().enumerate() {
            if c != 0.0 {
                for (xi, ui) in x.iter_mut().zip(self.u.column(j).iter()) {
                    *xi += c * ui;
                }
            }
        }
        x
    }
}

/// Cumulative energy `Σ_{i<=m} σ_i² / Σ σ_i²`.
pub fn energy_fraction(singulars: &[f64], m: usize) -> Result<f64> {
    if m == 0 || m > singulars.len() {
        return Err(Error::InvalidArgument(format!(
            "energy fraction needs 1 <= m <= {}, got {m}",
            singulars.len()
        )));
    }
    let total: f64 = singulars.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return Err(Error::Degenerate("all singular values are zero".into()));
    }
    let head: f64 = singulars[..m].iter().map(|s| s * s).sum();
    Ok(head / total)
}

/// Smallest `m` whose energy fraction reaches `gamma`.
fn energy_rank(singulars: &[f64], gamma: f64) -> usize {
    let total: f64 = singulars.iter().map(|s| s * s).sum();
    let mut acc = 0.0;
    for (i, s) in singulars.iter().enumerate() {
        acc += s * s;
        if acc >= (gamma - ENERGY_SLACK) * total {
            return i + 1;
        }
    }
    singulars.len()
}

/// POD basis of the columns of `s`.
///
/// `k` is the energy rank for `gamma`, clamped to `k_max`. With `centered`
/// the column mean is removed before factorization.
pub fn pod_basis(s: &DenseMatrix, gamma: f64, k_max: usize, centered: bool) -> Result<PodBasis> {
    if s.ncols() == 0 || s.nrows() == 0 {
        return Err(Error::Degenerate("empty snapshot matrix".into()));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidArgument(format!("energy threshold must lie in (0, 1], got {gamma}")));
    }
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be positive".into()));
    }
    let n = s.nrows();
    let mean: Vec<f64> = if centered {
        (0..n).map(|i| s.row(i).mean()).collect()
    } else {
        vec![0.0; n]
    };
    let mut work = s.clone();
    if centered {
        for mut col in work.column_iter_mut() {
            for (x, m) in col.iter_mut().zip(&mean) {
                *x -= m;
            }
        }
    }
    let svd = economy_svd(&work)?;
    if svd.singulars.first().map_or(true, |&s| s == 0.0) {
        return Err(Error::Degenerate("snapshot matrix is zero".into()));
    }
    let k = energy_rank(&svd.singulars, gamma).min(k_max);
    Ok(PodBasis {
        u: svd.u.columns(0, k).into_owned(),
        singulars: svd.singulars,
        k,
        gamma,
        centered,
        mean,
    })
}

/// Block-diagonal POD basis: an independent basis of each row block, with up
/// to `k_max` modes per block.
pub fn block_pod_basis(
    s: &DenseMatrix,
    blocks: &[Range<usize>],
    gamma: f64,
    k_max: usize,
    centered: bool,
) -> Result<PodBasis> {
    let n = s.nrows();
    let mut parts = Vec::with_capacity(blocks.len());
    for b in blocks {
        if b.end > n || b.start >= b.end {
            return Err(Error::InvalidArgument(format!("row block {b:?} invalid for {n} rows")));
        }
        parts.push(pod_basis(&s.rows(b.start, b.len()).into_owned(), gamma, k_max, centered)?);
    }
    let k: usize = parts.iter().map(|p| p.k).sum();
    let mut u = DenseMatrix::zeros(n, k);
    let mut mean = vec![0.0; n];
    let mut singulars = Vec::new();
    let mut col = 0;
    for (b, p) in blocks.iter().zip(&parts) {
        u.view_mut((b.start, col), (b.len(), p.k)).copy_from(&p.u);
        mean[b.clone()].copy_from_slice(&p.mean);
        singulars.extend_from_slice(&p.singulars);
        col += p.k;
    }
    Ok(PodBasis {
        u,
        singulars,
        k,
        gamma,
        centered,
        mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn energy_fraction_cases() {
        assert!((energy_fraction(&[3.0, 1.0], 1).unwrap() - 0.9).abs() < 1e-15);
        assert_eq!(energy_fraction(&[3.0, 1.0], 2).unwrap(), 1.0);
        assert_eq!(energy_fraction(&[1.0; 4], 2).unwrap(), 0.5);
        assert!(energy_fraction(&[1.0], 0).is_err());
        assert!(energy_fraction(&[1.0], 2).is_err());
    }

    #[test]
    fn threshold_picks_first_mode() {
        let s = DenseMatrix::from_row_slice(3, 2, &[3.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let b = pod_basis(&s, 0.9, 10, false).unwrap();
        assert_eq!(b.k, 1);
        let b = pod_basis(&s, 0.95, 10, false).unwrap();
        assert_eq!(b.k, 2);
    }

    #[test]
    fn full_energy_gives_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = DenseMatrix::from_fn(20, 3, |_, _| rng.gen_range(-1.0..1.0));
        let c = DenseMatrix::from_fn(3, 9, |_, _| rng.gen_range(-1.0..1.0));
        let b = pod_basis(&(a * c), 1.0, 100, false).unwrap();
        assert_eq!(b.k, 3);
    }

    #[test]
    fn repeated_column() {
        let col = [1.0, 2.0, 2.0];
        let s = DenseMatrix::from_fn(3, 4, |i, _| col[i]);
        let b = pod_basis(&s, 0.99, 5, false).unwrap();
        assert_eq!(b.k, 1);
        for i in 0..3 {
            assert!((b.u[(i, 0)] - col[i] / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        assert!(matches!(
            pod_basis(&DenseMatrix::zeros(4, 3), 0.99, 2, false),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn centering_removes_mean() {
        let s = DenseMatrix::from_fn(4, 6, |i, j| 5.0 + (i as f64) * (j as f64 - 2.5));
        let b = pod_basis(&s, 1.0, 10, true).unwrap();
        assert_eq!(b.k, 1);
        assert!(b.mean.iter().all(|&m| (m - 5.0).abs() < 1e-12));
        let x: Vec<f64> = s.column(4).iter().copied().collect();
        let back = b.lift(&b.project(&x));
        for (p, q) in back.iter().zip(&x) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn block_basis_is_block_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = DenseMatrix::from_fn(9, 5, |_, _| rng.gen_range(-1.0..1.0));
        let b = block_pod_basis(&s, &[0..3, 3..6, 6..9], 1.0, 2, false).unwrap();
        assert_eq!(b.k, 6);
        for j in 0..2 {
            assert!(b.u.column(j).rows(3, 6).iter().all(|&v| v == 0.0));
        }
        let g = b.u.transpose() * &b.u;
        assert!(crate::linalg::frobenius(&(g - DenseMatrix::identity(6, 6))) < 1e-12);
    }
}
