use proptest::collection::vec;
use proptest::prelude::*;
use smdeim::deim::{deim_error_bound, deim_interpolant};
use smdeim::jacobian_approx::{approximate_matrix, build_smdeim_stage};
use smdeim::linalg::{frobenius, norm2, thin_svd, CsrMatrix, DenseMatrix, LuFactor};
use smdeim::models::{BilinearTerm, FullModel, NewtonSettings, QuadraticOperator, Stage};
use smdeim::persist::Artifact;
use smdeim::pod::pod_basis;
use smdeim::rom::{reduce_model, Strategy as Reduction, StrategyInputs};
use smdeim::snapshots::{gather, scatter, SnapshotSet, SparsityPattern, StageJacobians};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DenseMatrix> {
    vec(-1.0f64..1.0, rows * cols).prop_map(move |v| DenseMatrix::from_vec(rows, cols, v))
}

fn tall_matrix() -> impl Strategy<Value = DenseMatrix> {
    (1usize..30, 1usize..8)
        .prop_flat_map(|(extra, cols)| matrix(cols + extra, cols))
}

fn pattern() -> impl Strategy<Value = SparsityPattern> {
    (1usize..40).prop_flat_map(|n| {
        vec((0..n, 0..n), 0..3 * n).prop_map(move |mut c| {
            c.extend((0..n).map(|i| (i, i)));
            SparsityPattern::from_unsorted(n, c).unwrap()
        })
    })
}

fn banded(n: usize, values: &[f64], offset: isize) -> CsrMatrix {
    let trip: Vec<(usize, usize, f64)> = (0..n)
        .filter_map(|i| {
            let j = i as isize + offset;
            (0..n as isize).contains(&j).then(|| (i, j as usize, values[i]))
        })
        .collect();
    CsrMatrix::from_triplets(n, n, &trip)
}

/// Random quadratic operator with banded linear and bilinear factors.
fn quadratic(n: usize) -> impl Strategy<Value = QuadraticOperator> {
    (vec(-1.0f64..1.0, 3 * n), vec(-1.0f64..1.0, 3 * n), vec(-1i8..=1, 2)).prop_map(move |(a, b, off)| {
        let linear = banded(n, &a[..n], 0);
        let term = BilinearTerm {
            alpha: b[..n].to_vec(),
            left: banded(n, &a[n..2 * n], off[0] as isize),
            right: banded(n, &b[n..2 * n], off[1] as isize),
        };
        let second = BilinearTerm {
            alpha: a[2 * n..].to_vec(),
            left: banded(n, &b[2 * n..], 0),
            right: CsrMatrix::identity(n),
        };
        QuadraticOperator::new(linear, vec![term, second]).unwrap()
    })
}

fn one_stage_model(op: QuadraticOperator) -> FullModel {
    let n = op.n();
    FullModel {
        id: "quadratic".into(),
        config_hash: 0,
        dt: 0.1,
        n_t: 4,
        theta: 0.1,
        stages: vec![Stage {
            name: "implicit",
            operator: op,
        }],
        x0: vec![0.0; n],
        newton: NewtonSettings::default(),
        variable_blocks: vec![0..n],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gather_inverts_scatter(p in pattern(), seed in any::<u64>()) {
        let values: Vec<f64> = (0..p.r()).map(|i| ((seed as f64 + i as f64) * 0.37).sin()).collect();
        let j = scatter(&values, &p).unwrap();
        prop_assert_eq!(gather(&j, &p).unwrap(), values.clone());
        let again = scatter(&gather(&j, &p).unwrap(), &p).unwrap();
        prop_assert_eq!(again.to_dense(), j.to_dense());
        for (pos, &(a, b)) in p.coords().iter().enumerate() {
            prop_assert_eq!(p.position(a, b), Some(pos));
            prop_assert_eq!(p.linear_index(pos), b * p.n() + a);
        }
    }

    #[test]
    fn thin_svd_reconstructs(a in tall_matrix()) {
        let svd = thin_svd(&a).unwrap();
        let scale = frobenius(&a).max(1e-300);
        prop_assert!(frobenius(&(svd.reconstruct() - &a)) <= 1e-12 * scale.max(1.0));
        let k = a.ncols();
        prop_assert!(frobenius(&(svd.u.transpose() * &svd.u - DenseMatrix::identity(k, k))) <= 1e-12 * k as f64);
        prop_assert!(svd.singulars.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(svd.singulars.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn lu_solves_multiply_back(a in matrix(6, 6), b in vec(-1.0f64..1.0, 6)) {
        let a = a + DenseMatrix::identity(6, 6) * 4.0;
        let x = LuFactor::new(&a).unwrap().solve(&b).unwrap();
        let r: Vec<f64> = (0..6).map(|i| (0..6).map(|j| a[(i, j)] * x[j]).sum::<f64>() - b[i]).collect();
        prop_assert!(norm2(&r) <= 1e-12 * (1.0 + norm2(&b)));
    }

    #[test]
    fn interpolation_matches_at_indexes(a in matrix(25, 6), m in 1usize..6, f in vec(-1.0f64..1.0, 25)) {
        let v = thin_svd(&a).unwrap().u;
        let it = deim_interpolant(&v, m).unwrap();
        let approx = it.approximate(&f).unwrap();
        for &p in &it.indexes {
            prop_assert!((approx[p] - f[p]).abs() <= 1e-9 * (1.0 + f[p].abs()) * it.inverse_norm);
        }
        let err: Vec<f64> = f.iter().zip(&approx).map(|(x, y)| x - y).collect();
        prop_assert!(deim_error_bound(&it, &f).unwrap() >= norm2(&err) - 1e-12 * norm2(&f));
        let longer = deim_interpolant(&v, 6).unwrap();
        prop_assert_eq!(&longer.indexes[..m], it.indexes.as_slice());
    }

    #[test]
    fn energy_rule_picks_smallest_order(a in matrix(12, 5), gamma in 0.05f64..1.0) {
        let b = pod_basis(&a, gamma, 100, false).unwrap();
        let total: f64 = b.singulars.iter().map(|s| s * s).sum();
        let energy = |m: usize| b.singulars[..m].iter().map(|s| s * s).sum::<f64>() / total;
        prop_assert!(energy(b.k) >= gamma - 1e-12);
        if b.k > 1 {
            prop_assert!(energy(b.k - 1) < gamma);
        }
        let k = b.k;
        prop_assert!(frobenius(&(b.u.transpose() * &b.u - DenseMatrix::identity(k, k))) <= 1e-12 * k as f64);
    }

    #[test]
    fn sampling_agrees_with_assembly(op in quadratic(9), x in vec(-2.0f64..2.0, 9)) {
        let values = op.jacobian_values(&x);
        let positions: Vec<usize> = (0..op.pattern().r()).rev().step_by(2).collect();
        let sampled = op.sample_positions(&x, &positions);
        for (s, &p) in sampled.iter().zip(&positions) {
            prop_assert_eq!(*s, values[p]);
        }
        let coords: Vec<(usize, usize)> = positions.iter().map(|&p| op.pattern().coords()[p]).collect();
        let affine = op.affine_sampler_at(&coords).eval(&x);
        for (a, s) in affine.iter().zip(&sampled) {
            prop_assert!((a - s).abs() <= 1e-12 * (1.0 + s.abs()));
        }
    }

    #[test]
    fn tensorial_equals_direct_projection(
        op in quadratic(12),
        s in matrix(12, 5),
        xr in vec(-1.0f64..1.0, 3),
        centered in any::<bool>(),
    ) {
        let basis = pod_basis(&s, 1.0, 3, centered).unwrap();
        let k = basis.k;
        let xr = &xr[..k];
        let model = one_stage_model(op.clone());
        let inputs = StrategyInputs::default();
        let t = reduce_model(&model, basis.clone(), Reduction::Tensorial, &inputs).unwrap();
        let d = reduce_model(&model, basis.clone(), Reduction::DirectProjection, &inputs).unwrap();
        let jt = t.reduced_jacobian(0, xr);
        let jd = d.reduced_jacobian(0, xr);
        prop_assert!((jt - jd).amax() <= 1e-12);
        let lifted = basis.lift(xr);
        let f = op.eval(&lifted);
        let projected: Vec<f64> = (0..k).map(|j| basis.u.column(j).iter().zip(&f).map(|(a, b)| a * b).sum()).collect();
        for (a, b) in t.reduced_rhs(0, xr).iter().zip(&projected) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn matrix_interpolation_is_linear(values in matrix(20, 6), a in vec(-1.0f64..1.0, 4), b in vec(-1.0f64..1.0, 4)) {
        let p = SparsityPattern::from_unsorted(8, (0..8).flat_map(|i| [(i, i), (i, (i + 1) % 8)]).chain([(0, 5), (3, 7), (6, 2), (7, 1)]).collect()).unwrap();
        prop_assume!(p.r() == 20);
        let it = build_smdeim_stage(&StageJacobians { pattern: p, values }, 4).unwrap();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 3.0 * x - y).collect();
        let ma = approximate_matrix(&it, &a).unwrap().to_dense();
        let mb = approximate_matrix(&it, &b).unwrap().to_dense();
        let ms = approximate_matrix(&it, &sum).unwrap().to_dense();
        prop_assert!((ms - (ma * 3.0 - mb)).amax() <= 1e-10);
        for &(r, c) in &it.sample_coords {
            prop_assert!(it.pattern.position(r, c).is_some());
        }
    }

    #[test]
    fn artifacts_round_trip_bit_exact(states in matrix(6, 3), values in matrix(8, 3), hash in any::<u64>()) {
        let p = SparsityPattern::from_unsorted(6, (0..6).map(|i| (i, i)).chain([(0, 1), (4, 2)]).collect()).unwrap();
        let snap = SnapshotSet::new("prop", hash, 0.25, states.clone(), states * 2.0, vec![StageJacobians { pattern: p, values }]).unwrap();
        let art = Artifact::from_snapshots(snap.clone());
        let back = Artifact::from_bytes(&art.to_bytes()).unwrap().snapshots.unwrap();
        prop_assert_eq!(back.states, snap.states);
        prop_assert_eq!(back.nonlinear, snap.nonlinear);
        prop_assert_eq!(&back.stages[0].values, &snap.stages[0].values);
        prop_assert_eq!(back.config_hash, hash);
    }
}
