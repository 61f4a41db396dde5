//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria run one after another so that at most one dense reference
//! factorization is alive at a time. Set `SMDEIM_ACCEPTANCE_STRICT=1` to turn
//! any failing criterion into a nonzero exit status.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smdeim::deim::{deim_error_bound, deim_interpolant};
use smdeim::jacobian_approx::{
    build_mdeim_reference_with_guard, build_smdeim_stage, verify_lemma2_with_guard, MatrixInterpolant,
};
use smdeim::linalg::{economy_svd, frobenius, norm2, CsrMatrix, DenseMatrix};
use smdeim::models::{
    burgers_jacobian, burgers_residual, full_solve, BurgersConfig, FullModel, FullRun, SweConfig,
};
use smdeim::pod::{block_pod_basis, pod_basis, PodBasis};
use smdeim::rom::{
    online_flop_count, reduce_model, rom_solve, rom_solve_observed, ReducedModel, Strategy, StrategyInputs,
};
use smdeim::snapshots::{gather, scatter, SparsityPattern, StageJacobians};

const ROUND_TRIP_CASES: usize = 1000;
const ROUND_TRIP_MAX_N: usize = 512;
const ROUND_TRIP_SECONDS: f64 = 5.0;
const LEMMA2_RECONSTRUCTION: f64 = 1e-10;
const LEMMA2_ORTHONORMALITY: f64 = 1e-12;
const LEMMA2_SECONDS: f64 = 10.0;
const BOUND_SLACK: f64 = 1e-12;
const BOUND_CASES: usize = 100;
const BOUND_M: usize = 20;
const INDEX_PREFIX: usize = 20;
const ORACLE_FROBENIUS: f64 = 1e-10;
const EXACT_MAX_ABS: f64 = 1e-12;
const RICHARDSON_TARGET: f64 = 10.0;
const RICHARDSON_SLACK: f64 = 3.0;
const FD_BURGERS: f64 = 1e-6;
const FD_SWE: f64 = 1e-5;
const FD_STATES: usize = 50;
const DECAY_ORDERS: f64 = 2.0;
const TRAINING_REPRODUCTION: f64 = 1e-8;
const ITERATION_WINDOW: f64 = 1.0;
const PAPER_FULL: f64 = 4.83;
const PAPER_SMDEIM: f64 = 4.61;
const PAPER_DEIM: f64 = 5.73;
const ITERATION_SECONDS: f64 = 300.0;
const OFFLINE_RATIO: f64 = 5.0;
const ONLINE_TIME_RATIO: f64 = 2.0;
const FIDELITY_MARGIN: f64 = 0.10;
const STEADY_TOL: f64 = 1e-10;
const SWE_ITERATION_MARGIN: f64 = 1.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&d) / norm2(b).max(f64::MIN_POSITIVE)
}

fn column(m: &DenseMatrix, c: usize) -> Vec<f64> {
    m.column(c).iter().copied().collect()
}

fn interpolate_column(it: &MatrixInterpolant, values: &DenseMatrix, c: usize) -> Vec<f64> {
    let col = values.column(c);
    let samples: Vec<f64> = it.interpolant.indexes.iter().map(|&p| col[p]).collect();
    it.approximate_values(&samples).unwrap()
}

fn burgers_default() -> (FullModel, FullRun) {
    let model = BurgersConfig::default().build().unwrap();
    let run = full_solve(&model).unwrap();
    (model, run)
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = 0;
    for case in 0..ROUND_TRIP_CASES {
        let n = rng.gen_range(1..=ROUND_TRIP_MAX_N);
        let density = rng.gen_range(0.0..0.02);
        let mut coords: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
        let extra = ((n * n) as f64 * density) as usize;
        coords.extend((0..extra).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))));
        let pattern = SparsityPattern::from_unsorted(n, coords).unwrap();
        let values: Vec<f64> = (0..pattern.r()).map(|_| rng.gen_range(-1e3..1e3)).collect();
        let j = scatter(&values, &pattern).unwrap();
        let back = gather(&j, &pattern).unwrap();
        let dense = pattern.to_dense(&values);
        let from_dense = gather(&CsrMatrix::from_dense(&dense), &pattern).unwrap();
        if back != values || from_dense != values || j.to_dense() != dense {
            mismatches += 1;
        }
        if case % 100 == 0 && pattern.r() != j.nnz() {
            mismatches += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < ROUND_TRIP_SECONDS,
        format!("{ROUND_TRIP_CASES} cases, {mismatches} mismatches, {secs:.2} s"),
    )
}

fn criterion_2() -> Outcome {
    let started = Instant::now();
    let model = BurgersConfig {
        n_t: 101,
        ..BurgersConfig::with_grid(51)
    }
    .build()
    .unwrap();
    let run = full_solve(&model).unwrap();
    let report = verify_lemma2_with_guard(&run.snapshots.stages[0], usize::MAX).unwrap();
    let secs = started.elapsed().as_secs_f64();
    outcome(
        report.reconstruction <= LEMMA2_RECONSTRUCTION
            && report.orthonormality <= LEMMA2_ORTHONORMALITY
            && secs < LEMMA2_SECONDS,
        format!(
            "n_s = {}, reconstruction {:.2e}, orthonormality {:.2e}, {secs:.2} s",
            run.snapshots.columns(),
            report.reconstruction,
            report.orthonormality
        ),
    )
}

fn bound_violations(stage: &StageJacobians) -> (usize, usize) {
    let svd = economy_svd(&stage.values).unwrap();
    let it = deim_interpolant(&svd.u, BOUND_M).unwrap();
    let cols = stage.values.ncols();
    let mut violations = 0;
    for c in 0..BOUND_CASES {
        let f = column(&stage.values, c * cols / BOUND_CASES);
        let approx = it.approximate(&f).unwrap();
        let err: Vec<f64> = f.iter().zip(&approx).map(|(a, b)| a - b).collect();
        let bound = deim_error_bound(&it, &f).unwrap();
        if bound < norm2(&err) - BOUND_SLACK * norm2(&f) {
            violations += 1;
        }
    }
    (violations, BOUND_CASES)
}

fn criterion_3(burgers: &FullRun, swe: &FullRun) -> Outcome {
    let (vb, nb) = bound_violations(&burgers.snapshots.stages[0]);
    let (vx, nx) = bound_violations(&swe.snapshots.stages[0]);
    let (vy, ny) = bound_violations(&swe.snapshots.stages[1]);
    outcome(
        vb + vx + vy == 0,
        format!("violations: burgers {vb}/{nb}, swe x-stage {vx}/{nx}, swe y-stage {vy}/{ny}"),
    )
}

fn criterion_4(burgers: &FullRun, swe: &FullRun) -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, stage) in [("burgers", &burgers.snapshots.stages[0]), ("swe x-stage", &swe.snapshots.stages[0])] {
        let sparse = build_smdeim_stage(stage, INDEX_PREFIX).unwrap();
        let dense = build_mdeim_reference_with_guard(stage, INDEX_PREFIX, stage.pattern.n()).unwrap();
        let a = sparse.linear_indexes();
        let b = dense.linear_indexes();
        let agree = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
        pass &= a == b;
        parts.push(format!("{name} {agree}/{INDEX_PREFIX} equal"));
    }
    outcome(pass, parts.join(", "))
}

fn criterion_5() -> Outcome {
    let model = BurgersConfig::with_grid(51).build().unwrap();
    let run = full_solve(&model).unwrap();
    let snap = &run.snapshots;
    let basis = pod_basis(&snap.states, 1.0, 10, false).unwrap();
    let sparse = build_smdeim_stage(&snap.stages[0], 10).unwrap();
    let dense = build_mdeim_reference_with_guard(&snap.stages[0], 10, usize::MAX).unwrap();
    let rs = reduce_model(
        &model,
        basis.clone(),
        Strategy::Smdeim,
        &StrategyInputs {
            matrix_interpolants: vec![sparse],
            ..StrategyInputs::default()
        },
    )
    .unwrap();
    let rd = reduce_model(
        &model,
        basis.clone(),
        Strategy::MdeimReference,
        &StrategyInputs {
            matrix_interpolants: vec![dense],
            ..StrategyInputs::default()
        },
    )
    .unwrap();
    let mut worst = 0.0f64;
    let mut checks = 0;
    rom_solve_observed(&rs, &basis.project(&model.x0), model.n_t, &mut |s, x, j| {
        worst = worst.max(frobenius(&(j - rd.reduced_jacobian(s, x))));
        checks += 1;
    })
    .unwrap();
    outcome(
        worst <= ORACLE_FROBENIUS && checks > 0,
        format!("{checks} Newton iterates, max Frobenius gap {worst:.2e}"),
    )
}

fn criterion_6(model: &FullModel, run: &FullRun) -> Outcome {
    let inputs = StrategyInputs::default();
    let mut worst = 0.0f64;
    let mut ratios = Vec::new();
    for k in [5, 15, 25] {
        let basis = pod_basis(&run.snapshots.states, 1.0, k, false).unwrap();
        let t = reduce_model(model, basis.clone(), Strategy::Tensorial, &inputs).unwrap();
        let d = reduce_model(model, basis.clone(), Strategy::DirectProjection, &inputs).unwrap();
        let coarse = reduce_model(
            model,
            basis.clone(),
            Strategy::DirectionalDerivative,
            &StrategyInputs {
                h: Some(1e-2),
                ..StrategyInputs::default()
            },
        )
        .unwrap();
        let fine = reduce_model(
            model,
            basis.clone(),
            Strategy::DirectionalDerivative,
            &StrategyInputs {
                h: Some(1e-3),
                ..StrategyInputs::default()
            },
        )
        .unwrap();
        for c in (0..model.n_t).step_by(40) {
            let x = basis.project(&column(&run.trajectory, c));
            let jd = d.reduced_jacobian(0, &x);
            worst = worst.max((t.reduced_jacobian(0, &x) - &jd).amax());
            let ec = frobenius(&(coarse.reduced_jacobian(0, &x) - &jd));
            let ef = frobenius(&(fine.reduced_jacobian(0, &x) - &jd));
            ratios.push(ec / ef);
        }
    }
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    outcome(
        worst <= EXACT_MAX_ABS && (lo - RICHARDSON_TARGET).abs() <= RICHARDSON_SLACK
            && (hi - RICHARDSON_TARGET).abs() <= RICHARDSON_SLACK,
        format!("tensorial vs direct max abs {worst:.2e}; difference-step error ratios in [{lo:.3}, {hi:.3}]"),
    )
}

/// Largest relative Frobenius gap between `jac(x)` and central differences of `res` at `x`.
fn fd_gap(x: &[f64], jac: &DenseMatrix, res: &dyn Fn(&[f64]) -> Vec<f64>) -> f64 {
    let n = x.len();
    let mut fd = DenseMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for c in 0..n {
        let h = 1e-6 * x[c].abs().max(1.0);
        xp[c] = x[c] + h;
        let rp = res(&xp);
        xp[c] = x[c] - h;
        let rm = res(&xp);
        xp[c] = x[c];
        for r in 0..n {
            fd[(r, c)] = (rp[r] - rm[r]) / (2.0 * h);
        }
    }
    frobenius(&(fd - jac)) / frobenius(jac)
}

fn criterion_7(burgers: &FullRun, swe_model: &FullModel, swe: &FullRun) -> Outcome {
    let cfg = BurgersConfig::default();
    let dt = cfg.dt();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_b = 0.0f64;
    for _ in 0..FD_STATES {
        let c = rng.gen_range(0..burgers.trajectory.ncols());
        let u: Vec<f64> = column(&burgers.trajectory, c).iter().map(|v| v + rng.gen_range(-0.1..0.1)).collect();
        let prev = column(&burgers.trajectory, c.saturating_sub(1));
        let jac = burgers_jacobian(&cfg, &u, dt).to_dense();
        worst_b = worst_b.max(fd_gap(&u, &jac, &|w| burgers_residual(&cfg, w, &prev, dt)));
    }
    let mut worst_s = 0.0f64;
    let states = &swe.snapshots.states;
    for i in 0..FD_STATES {
        let c = rng.gen_range(0..states.ncols());
        let w: Vec<f64> = column(states, c).iter().map(|v| v * (1.0 + rng.gen_range(-0.01..0.01))).collect();
        let start = column(states, c.saturating_sub(1));
        let s = i % swe_model.stages.len();
        let explicit = swe_model.explicit_part(s, &start);
        let jac = swe_model.stages[s]
            .operator
            .jacobian(&w)
            .identity_minus_scaled(swe_model.theta)
            .to_dense();
        worst_s = worst_s.max(fd_gap(&w, &jac, &|x| swe_model.stage_residual(s, x, &start, &explicit)));
    }
    outcome(
        worst_b <= FD_BURGERS && worst_s <= FD_SWE,
        format!("{FD_STATES} states each: burgers {worst_b:.2e}, swe stages {worst_s:.2e}"),
    )
}

fn criterion_8(run: &FullRun) -> Outcome {
    let snap = &run.snapshots;
    let cols = snap.columns();
    let train: Vec<usize> = (0..cols).filter(|c| c % 10 != 0).collect();
    let held: Vec<usize> = (0..cols).filter(|c| c % 10 == 0).collect();
    let fit = snap.select_columns(&train);
    let values = &snap.stages[0].values;
    let held_error = |m: usize| {
        let it = build_smdeim_stage(&fit.stages[0], m).unwrap();
        let (mut e, mut t) = (0.0, 0.0);
        for &c in &held {
            let approx = interpolate_column(&it, values, c);
            let exact = column(values, c);
            e += approx.iter().zip(&exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            t += exact.iter().map(|v| v * v).sum::<f64>();
        }
        (e / t).sqrt()
    };
    let e5 = held_error(5);
    let e50 = held_error(50);
    let orders = (e5 / e50).log10();
    let sub: Vec<usize> = (0..cols).step_by(40).collect();
    let small = snap.select_columns(&sub);
    let it = build_smdeim_stage(&small.stages[0], sub.len()).unwrap();
    let repro = (0..sub.len())
        .map(|c| rel_err(&interpolate_column(&it, &small.stages[0].values, c), &column(&small.stages[0].values, c)))
        .fold(0.0f64, f64::max);
    outcome(
        orders >= DECAY_ORDERS && repro <= TRAINING_REPRODUCTION,
        format!(
            "held-out error m=5 {e5:.2e}, m=50 {e50:.2e} ({orders:.1} orders); m = n_s = {} training reproduction {repro:.2e}",
            sub.len()
        ),
    )
}

struct BurgersRoms {
    basis: PodBasis,
    tensorial: ReducedModel,
    smdeim: ReducedModel,
    deim: ReducedModel,
}

fn burgers_roms(model: &FullModel, run: &FullRun, k: usize, m: usize) -> BurgersRoms {
    let snap = &run.snapshots;
    let basis = pod_basis(&snap.states, 1.0, k, false).unwrap();
    let fn_svd = economy_svd(&snap.nonlinear).unwrap();
    let inputs = StrategyInputs {
        h: None,
        function_interpolant: Some(deim_interpolant(&fn_svd.u, m).unwrap()),
        matrix_interpolants: vec![build_smdeim_stage(&snap.stages[0], m).unwrap()],
    };
    BurgersRoms {
        tensorial: reduce_model(model, basis.clone(), Strategy::Tensorial, &inputs).unwrap(),
        smdeim: reduce_model(model, basis.clone(), Strategy::Smdeim, &inputs).unwrap(),
        deim: reduce_model(model, basis.clone(), Strategy::Deim, &inputs).unwrap(),
        basis,
    }
}

fn criterion_9(model: &FullModel, run: &FullRun) -> Outcome {
    let started = Instant::now();
    let roms = burgers_roms(model, run, 25, 30);
    let x0 = roms.basis.project(&model.x0);
    let full = run.stats.mean_iterations();
    let sm = rom_solve(&roms.smdeim, &x0, model.n_t).unwrap().stats;
    let de = rom_solve(&roms.deim, &x0, model.n_t).unwrap().stats;
    let secs = started.elapsed().as_secs_f64();
    let (sm_mean, de_mean) = (sm.mean_iterations(), de.mean_iterations());
    let within = (full - PAPER_FULL).abs() <= ITERATION_WINDOW
        && (sm_mean - PAPER_SMDEIM).abs() <= ITERATION_WINDOW
        && (de_mean - PAPER_DEIM).abs() <= ITERATION_WINDOW;
    let ordered = de_mean > sm_mean;
    outcome(
        within && ordered && secs < ITERATION_SECONDS && sm.failures.is_empty() && de.failures.is_empty(),
        format!(
            "means full {full:.3} (target {PAPER_FULL}), smdeim {sm_mean:.3} (target {PAPER_SMDEIM}), \
             deim {de_mean:.3} (target {PAPER_DEIM}); window ±{ITERATION_WINDOW} {}; deim > smdeim {}; {secs:.1} s",
            if within { "met" } else { "missed" },
            if ordered { "holds" } else { "violated" }
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for n in [51, 101, 201, 501] {
        let r = BurgersConfig::with_grid(n).build().unwrap().stages[0].operator.pattern().r();
        let expect = 3 * (n - 4) + 4;
        pass &= r == expect;
        parts.push(format!("n={n}: {r}/{expect}"));
    }
    let cfg = SweConfig::default();
    let rx = cfg.build().unwrap().stages[0].operator.pattern().r();
    let expect = 32 * (cfg.ny - 2) + 16 * (cfg.nx - 4) * (cfg.ny - 2);
    pass &= rx == expect;
    parts.push(format!("swe x-stage {rx}/{expect}"));
    outcome(pass, parts.join(", "))
}

fn criterion_11(run: &FullRun) -> Outcome {
    let stage = &run.snapshots.stages[0];
    let time = |f: &dyn Fn()| {
        let t = Instant::now();
        f();
        t.elapsed().as_secs_f64()
    };
    let sparse: Vec<f64> = (0..3)
        .map(|_| time(&|| drop(build_smdeim_stage(stage, 30).unwrap())))
        .collect();
    let dense: Vec<f64> = (0..3)
        .map(|_| time(&|| drop(build_mdeim_reference_with_guard(stage, 30, stage.pattern.n()).unwrap())))
        .collect();
    let (ms, md) = (median(sparse), median(dense));
    outcome(
        md / ms >= OFFLINE_RATIO,
        format!("median build sparse {ms:.3} s, dense reference {md:.3} s, ratio {:.1}", md / ms),
    )
}

fn online_profile(n: usize) -> (Duration, u64) {
    let model = BurgersConfig::with_grid(n).build().unwrap();
    let run = full_solve(&model).unwrap();
    let roms = burgers_roms(&model, &run, 25, 30);
    let x = roms.basis.project(&column(&run.trajectory, model.n_t / 2));
    let calls = 2000;
    let mut times = Vec::new();
    let mut flops = 0;
    for _ in 0..3 {
        let before = online_flop_count();
        let t = Instant::now();
        for _ in 0..calls {
            std::hint::black_box(roms.smdeim.reduced_jacobian(0, std::hint::black_box(&x)));
        }
        times.push(t.elapsed().as_secs_f64() / calls as f64);
        flops = (online_flop_count() - before) / calls as u64;
    }
    (Duration::from_secs_f64(median(times)), flops)
}

fn criterion_12() -> Outcome {
    let (t201, f201) = online_profile(201);
    let (t501, f501) = online_profile(501);
    let ratio = t501.as_secs_f64() / t201.as_secs_f64();
    outcome(
        ratio <= ONLINE_TIME_RATIO && f201 == f501,
        format!("per call n=201 {t201:?}, n=501 {t501:?} (ratio {ratio:.2}); flops {f201} vs {f501}"),
    )
}

fn criterion_13(model: &FullModel, run: &FullRun) -> Outcome {
    let roms = burgers_roms(model, run, 25, 30);
    let x0 = roms.basis.project(&model.x0);
    let projected = roms.basis.u.transpose() * &run.trajectory;
    let err = |rm: &ReducedModel| {
        let t = rom_solve(rm, &x0, model.n_t).unwrap().trajectory;
        frobenius(&(t - &projected)) / frobenius(&projected)
    };
    let (et, es) = (err(&roms.tensorial), err(&roms.smdeim));
    outcome(
        es <= et * (1.0 + FIDELITY_MARGIN),
        format!("relative L2 error tensorial {et:.3e}, smdeim {es:.3e} (ratio {:.4})", es / et),
    )
}

fn criterion_14(swe_model: &FullModel, swe: &FullRun) -> Outcome {
    let flat_model = SweConfig {
        h1: 0.0,
        h2: 0.0,
        ..SweConfig::default()
    }
    .build()
    .unwrap();
    let flat = full_solve(&flat_model).unwrap();
    let drift = (0..flat.trajectory.ncols())
        .map(|c| {
            let d: Vec<f64> = flat.trajectory.column(c).iter().zip(&flat_model.x0).map(|(a, b)| a - b).collect();
            norm2(&d)
        })
        .fold(0.0f64, f64::max);
    let snap = &swe.snapshots;
    let basis = block_pod_basis(&snap.states, &swe_model.variable_blocks, 1.0, 20, false).unwrap();
    let inputs = StrategyInputs {
        matrix_interpolants: snap.stages.iter().map(|s| build_smdeim_stage(s, 20).unwrap()).collect(),
        ..StrategyInputs::default()
    };
    let rm = reduce_model(swe_model, basis.clone(), Strategy::Smdeim, &inputs).unwrap();
    let rom = rom_solve(&rm, &basis.project(&swe_model.x0), swe_model.n_t).unwrap();
    let full_mean = swe.stats.mean_iterations();
    let rom_mean = rom.stats.mean_iterations();
    outcome(
        swe.trajectory.ncols() == swe_model.n_t
            && drift <= STEADY_TOL
            && rom.stats.failures.is_empty()
            && rom_mean <= full_mean + SWE_ITERATION_MARGIN,
        format!(
            "full run {} levels, flat-state drift {drift:.2e}, smdeim rom k = {} failures {} mean {rom_mean:.3} vs full {full_mean:.3}",
            swe.trajectory.ncols(),
            basis.k,
            rom.stats.failures.len()
        ),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |id: usize, name: &'static str, o: Outcome| {
        println!("[{}] {id:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };
    report(1, "gather/scatter round trip", criterion_1());
    report(2, "padded sparse SVD equivalence", criterion_2());
    let (burgers_model, burgers) = burgers_default();
    let swe_model = SweConfig::default().build().unwrap();
    let swe = full_solve(&swe_model).unwrap();
    report(3, "interpolation error bound dominance", criterion_3(&burgers, &swe));
    report(4, "sparse vs dense index agreement", criterion_4(&burgers, &swe));
    report(5, "sparse vs dense reduced Jacobians", criterion_5());
    report(6, "exact reduced Jacobian strategies", criterion_6(&burgers_model, &burgers));
    report(7, "Jacobian finite-difference checks", criterion_7(&burgers, &swe_model, &swe));
    report(8, "Jacobian interpolation error decay", criterion_8(&burgers));
    report(9, "Newton iteration statistics", criterion_9(&burgers_model, &burgers));
    report(10, "sparsity-count laws", criterion_10());
    report(11, "offline cost ratio", criterion_11(&burgers));
    report(12, "online cost independent of n", criterion_12());
    report(13, "reduced solution fidelity", criterion_13(&burgers_model, &burgers));
    report(14, "shallow water end to end", criterion_14(&swe_model, &swe));
    let failed: Vec<String> = results.iter().filter(|r| !r.2.pass).map(|r| r.0.to_string()).collect();
    println!(
        "acceptance: {} of {} criteria passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() { String::new() } else { format!(" (failed: {})", failed.join(", ")) }
    );
    if !failed.is_empty() && std::env::var("SMDEIM_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
