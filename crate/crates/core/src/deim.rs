//! Discrete empirical interpolation: greedy index selection, the interpolation
//! projector `V (Pᵀ V)⁻¹` and its a-posteriori error bound.

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::linalg::{norm2, thin_svd, DenseMatrix, LuFactor};

/// A step is rank deficient when its residual falls below this fraction of the
/// norm of the incoming basis vector.
const RANK_RTOL: f64 = 1e-13;

thread_local! {
    static INDEX_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of index selections run on the current thread.
pub fn deim_call_count() -> u64 {
    INDEX_CALLS.with(|c| c.get())
}

/// Precomputed interpolant for a basis prefix.
#[derive(Debug, Clone)]
pub struct DeimInterpolant {
    /// `d x m` basis prefix.
    pub basis: DenseMatrix,
    /// Selected rows, in selection order.
    pub indexes: Vec<usize>,
    /// `V (Pᵀ V)⁻¹`, `d x m`.
    pub projector: DenseMatrix,
    /// `‖(Pᵀ V)⁻¹‖₂`.
    pub inverse_norm: f64,
    factor: LuFactor,
}

fn argmax_abs(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, -1.0);
    for (i, v) in values.enumerate() {
        if v.abs() > best.1 {
            best = (i, v.abs());
        }
    }
    best
}

/// Greedy interpolation indexes of the columns of `v`.
///
/// The first index maximizes `|v_1|`; each later one maximizes the residual of
/// interpolating `v_l` with the previous columns at the previous indexes.
/// Exact ties go to the smallest index.
pub fn deim_indexes(v: &DenseMatrix) -> Result<Vec<usize>> {
    INDEX_CALLS.with(|c| c.set(c.get() + 1));
    let (d, m) = v.shape();
    if m > d {
        return Err(Error::RankExceeded { requested: m, rank: d });
    }
    let mut indexes = Vec::with_capacity(m);
    for l in 0..m {
        let col = v.column(l);
        let col_norm = norm2(col.as_slice());
        let residual: Vec<f64> = if l == 0 {
            col.iter().copied().collect()
        } else {
            let pv = DenseMatrix::from_fn(l, l, |i, j| v[(indexes[i], j)]);
            let rhs: Vec<f64> = indexes.iter().map(|&p| v[(p, l)]).collect();
            let c = LuFactor::new(&pv)
                .and_then(|f| f.solve(&rhs))
                .map_err(|_| Error::RankDeficient {
                    column: l,
                    residual: 0.0,
                })?;
            let mut r: Vec<f64> = col.iter().copied().collect();
            for (j, &cj) in c.iter().enumerate() {
                for (ri, vij) in r.iter_mut().zip(v.column(j).iter()) {
                    *ri -= cj * vij;
                }
            }
            r
        };
        let res_norm = norm2(&residual);
        if !(res_norm > RANK_RTOL * col_norm) || res_norm == 0.0 {
            return Err(Error::RankDeficient {
                column: l,
                residual: res_norm,
            });
        }
        let (p, _) = argmax_abs(residual.iter().copied());
        indexes.push(p);
    }
    Ok(indexes)
}

/// Interpolant of the first `m` columns of `v`.
pub fn deim_interpolant(v: &DenseMatrix, m: usize) -> Result<DeimInterpolant> {
    if m == 0 || m > v.ncols() {
        return Err(Error::InvalidArgument(format!(
            "interpolant order must satisfy 1 <= m <= {}, got {m}",
            v.ncols()
        )));
    }
    let basis = v.columns(0, m).into_owned();
    let indexes = deim_indexes(&basis)?;
    let pv = DenseMatrix::from_fn(m, m, |i, j| basis[(indexes[i], j)]);
    let factor = LuFactor::new(&pv)?;
    let inverse = factor.inverse()?;
    let projector = &basis * &inverse;
    let inverse_norm = thin_svd(&inverse)?.singulars[0];
    Ok(DeimInterpolant {
        basis,
        indexes,
        projector,
        inverse_norm,
        factor,
    })
}

impl DeimInterpolant {
    /// Rebuilds an interpolant from stored pieces; only refactors `Pᵀ V`.
    pub fn from_parts(
        basis: DenseMatrix,
        indexes: Vec<usize>,
        projector: DenseMatrix,
        inverse_norm: f64,
    ) -> Result<Self> {
        let (d, m) = basis.shape();
        if indexes.len() != m || projector.shape() != (d, m) {
            return Err(Error::DimensionMismatch {
                context: "stored interpolant pieces",
                expected: m,
                found: indexes.len(),
            });
        }
        if let Some(&bad) = indexes.iter().find(|&&p| p >= d) {
            return Err(Error::InvalidArgument(format!("interpolation index {bad} out of range {d}")));
        }
        let pv = DenseMatrix::from_fn(m, m, |i, j| basis[(indexes[i], j)]);
        let factor = LuFactor::new(&pv)?;
        Ok(Self {
            basis,
            indexes,
            projector,
            inverse_norm,
            factor,
        })
    }

    pub fn m(&self) -> usize {
        self.indexes.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// `projector · samples`.
    pub fn interpolate(&self, samples: &[f64]) -> Result<Vec<f64>> {
        if samples.len() != self.m() {
            return Err(Error::DimensionMismatch {
                context: "interpolation samples",
                expected: self.m(),
                found: samples.len(),
            });
        }
        let mut out = vec![0.0; self.dim()];
        for (j, &s) in samples.iter().enumerate() {
            if s != 0.0 {
                for (o, p) in out.iter_mut().zip(self.projector.column(j).iter()) {
                    *o += s * p;
                }
            }
        }
        Ok(out)
    }

    /// Interpolation of a full vector from its entries at the selected rows.
    pub fn approximate(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "interpolated vector",
                expected: self.dim(),
                found: f.len(),
            });
        }
        let samples: Vec<f64> = self.indexes.iter().map(|&p| f[p]).collect();
        self.interpolate(&samples)
    }

    /// Interpolation coefficients `(Pᵀ V)⁻¹ samples`.
    pub fn coefficients(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.factor.solve(samples)
    }
}

/// `‖(Pᵀ V)⁻¹‖₂ ‖(I - V Vᵀ) f‖₂` for an orthonormal basis prefix.
pub fn deim_error_bound(interp: &DeimInterpolant, f: &[f64]) -> Result<f64> {
    if f.len() != interp.dim() {
        return Err(Error::DimensionMismatch {
            context: "error bound vector",
            expected: interp.dim(),
            found: f.len(),
        });
    }
    let mut r = f.to_vec();
    for col in interp.basis.column_iter() {
        let c = crate::linalg::dot(col.as_slice(), f);
        for (ri, v) in r.iter_mut().zip(col.iter()) {
            *ri -= c * v;
        }
    }
    Ok(interp.inverse_norm * norm2(&r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn orthonormal(rng: &mut ChaCha8Rng, d: usize, s: usize) -> DenseMatrix {
        let a = DenseMatrix::from_fn(d, s, |_, _| rng.gen_range(-1.0..1.0));
        thin_svd(&a).unwrap().u
    }

    #[test]
    fn single_column_argmax() {
        let v = DenseMatrix::from_column_slice(3, 1, &[0.2, -0.7, 0.5]);
        assert_eq!(deim_indexes(&v).unwrap(), vec![1]);
        let e = DenseMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        assert_eq!(deim_indexes(&e).unwrap(), vec![0]);
    }

    #[test]
    fn manual_trace_two_columns() {
        let v = DenseMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.5, 1.0, 0.0]);
        assert_eq!(deim_indexes(&v).unwrap(), vec![0, 1]);
    }

    #[test]
    fn ties_take_smallest_index() {
        let v = DenseMatrix::from_column_slice(4, 1, &[0.5, -0.5, 0.5, 0.1]);
        assert_eq!(deim_indexes(&v).unwrap(), vec![0]);
    }

    #[test]
    fn dependent_columns_are_rejected() {
        let v = DenseMatrix::from_column_slice(3, 2, &[1.0, 2.0, 0.0, 2.0, 4.0, 0.0]);
        match deim_indexes(&v) {
            Err(Error::RankDeficient { column, .. }) => assert_eq!(column, 1),
            other => panic!("expected rank error, got {other:?}"),
        }
    }

    #[test]
    fn identity_interpolant_is_exact() {
        let it = deim_interpolant(&DenseMatrix::identity(3, 3), 3).unwrap();
        assert!(crate::linalg::frobenius(&(&it.projector - DenseMatrix::identity(3, 3))) < 1e-15);
        let f = [1.0, -2.0, 3.5];
        assert_eq!(it.approximate(&f).unwrap(), f.to_vec());
        assert!((it.inverse_norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn in_span_vectors_are_reproduced() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let v = orthonormal(&mut rng, 20, 5);
        let it = deim_interpolant(&v, 5).unwrap();
        let c: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f: Vec<f64> = (0..20).map(|i| (0..5).map(|j| v[(i, j)] * c[j]).sum()).collect();
        let fh = it.approximate(&f).unwrap();
        let err: Vec<f64> = f.iter().zip(&fh).map(|(a, b)| a - b).collect();
        assert!(norm2(&err) <= 1e-10 * norm2(&f));
        assert!(deim_error_bound(&it, &f).unwrap() <= 1e-10 * norm2(&f));
    }

    #[test]
    fn interpolation_property_and_nesting() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let v = orthonormal(&mut rng, 30, 8);
        let it = deim_interpolant(&v, 8).unwrap();
        for (i, &p) in it.indexes.iter().enumerate() {
            for j in 0..8 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((it.projector[(p, j)] - expect).abs() < 1e-10);
            }
        }
        let shorter = deim_interpolant(&v, 5).unwrap();
        assert_eq!(&it.indexes[..5], shorter.indexes.as_slice());
    }

    #[test]
    fn bound_dominates_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let v = orthonormal(&mut rng, 25, 6);
        let it = deim_interpolant(&v, 6).unwrap();
        for _ in 0..100 {
            let f: Vec<f64> = (0..25).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let fh = it.approximate(&f).unwrap();
            let err: Vec<f64> = f.iter().zip(&fh).map(|(a, b)| a - b).collect();
            let bound = deim_error_bound(&it, &f).unwrap();
            assert!(bound >= norm2(&err) - 1e-12 * norm2(&f));
        }
    }

    #[test]
    fn identity_prefix_bound_is_complement_norm() {
        let v = DenseMatrix::identity(4, 2);
        let it = deim_interpolant(&v, 2).unwrap();
        let f = [1.0, 2.0, 3.0, 4.0];
        assert!((deim_error_bound(&it, &f).unwrap() - 5.0).abs() < 1e-14);
    }
}
