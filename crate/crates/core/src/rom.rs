//! POD-Galerkin reduced models with implicit Newton time stepping and six
//! interchangeable reduced-Jacobian strategies.
//!
//! The reduced right-hand side of every stage is evaluated tensorially,
//!
//! ```text
//! F̃(x̃) = Uᵀ F(x̄) + L̃ x̃ + G(x̃, x̃),   L̃ = Uᵀ L U + T1,
//! ```
//!
//! where `T1 = Uᵀ J_N(x̄) U` vanishes for uncentered bases and
//! `g[j][l][p] = Σ_t Σ_s U(s,j) α_t(s) (Left_t U)(s,l) (Right_t U)(s,p)`. The
//! strategies differ only in how the reduced Jacobian of `F̃` is obtained.
//! Reduced `k x k` matrices are vectorized column-wise: entry `(j, l)` sits at
//! `l * k + j`.

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::deim::{deim_call_count, DeimInterpolant};
use crate::error::{Error, Result};
use crate::jacobian_approx::{InterpolantMode, MatrixInterpolant};
use crate::linalg::{svd_call_count, DenseMatrix, LuFactor};
use crate::models::{newton_solve, FullModel, NewtonOutcome, NewtonSettings, QuadraticOperator};
use crate::pod::PodBasis;

/// Default forward-difference step of the directional-derivative strategy.
pub const DEFAULT_FD_STEP: f64 = 0.01;

thread_local! {
    static ONLINE_FLOPS: Cell<u64> = const { Cell::new(0) };
}

/// Floating-point operations counted by reduced Jacobian evaluations on the
/// current thread.
pub fn online_flop_count() -> u64 {
    ONLINE_FLOPS.with(|c| c.get())
}

fn count_flops(n: usize) {
    ONLINE_FLOPS.with(|c| c.set(c.get() + n as u64));
}

/// Newton iteration counts and timings of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NewtonStats {
    /// Newton passes per solve (one entry per step and stage).
    pub iterations: Vec<usize>,
    /// Final residual norm of each Newton solve.
    pub residuals: Vec<f64>,
    /// Indexes (into `iterations`) of solves that hit the iteration cap.
    pub failures: Vec<usize>,
    pub offline_seconds: f64,
    pub online_seconds: f64,
}

impl NewtonStats {
    pub fn record(&mut self, outcome: &NewtonOutcome) {
        if !outcome.converged {
            self.failures.push(self.iterations.len());
        }
        self.iterations.push(outcome.iterations);
        self.residuals.push(outcome.residual_norm);
    }

    pub fn mean_iterations(&self) -> f64 {
        if self.iterations.is_empty() {
            return 0.0;
        }
        self.iterations.iter().sum::<usize>() as f64 / self.iterations.len() as f64
    }
}

/// Reduced-Jacobian strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Assembles the full Jacobian at the lifted state and projects it.
    DirectProjection,
    /// Exact reduced Jacobian from the precomputed tensor.
    Tensorial,
    /// Forward differences of the full right-hand side along the modes.
    DirectionalDerivative,
    /// Row-sampled Jacobian through the nonlinear-term interpolant.
    Deim,
    /// Dense vectorized matrix interpolation (small problems only).
    MdeimReference,
    /// Sparse matrix interpolation of the Jacobian nonzeros.
    Smdeim,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::DirectProjection,
        Strategy::Tensorial,
        Strategy::DirectionalDerivative,
        Strategy::Deim,
        Strategy::MdeimReference,
        Strategy::Smdeim,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::DirectProjection => "direct",
            Self::Tensorial => "tensorial",
            Self::DirectionalDerivative => "directional",
            Self::Deim => "deim",
            Self::MdeimReference => "mdeim",
            Self::Smdeim => "smdeim",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown strategy '{s}', expected one of direct, tensorial, directional, deim, mdeim, smdeim"
                ))
            })
    }
}

/// Strategy-specific offline inputs for [`reduce_model`].
#[derive(Debug, Clone, Default)]
pub struct StrategyInputs {
    /// Forward-difference step; defaults to [`DEFAULT_FD_STEP`].
    pub h: Option<f64>,
    /// Interpolant of the nonlinear-term snapshots (DEIM strategy).
    pub function_interpolant: Option<DeimInterpolant>,
    /// One matrix interpolant per stage (matrix interpolation strategies).
    pub matrix_interpolants: Vec<MatrixInterpolant>,
}

/// Tensorial pieces of one reduced stage.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorialPayload {
    /// `Uᵀ F(x̄)`.
    pub f_bar: Vec<f64>,
    /// `Uᵀ L U`.
    pub linear: DenseMatrix,
    /// `Uᵀ J_N(x̄) U`; zero for uncentered bases.
    pub t1: DenseMatrix,
    /// `k² x k`: row `l * k + j`, column `p` holds `g[j][l][p]`.
    pub g: DenseMatrix,
    /// `k² x k`: row `l * k + j`, column `p` holds `g[j][l][p] + g[j][p][l]`.
    pub g_sym: DenseMatrix,
}

/// Row-sampled pieces of one bilinear term for the DEIM strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct DeimTermPayload {
    pub alpha: Vec<f64>,
    /// `(Left x̄)` and `(Right x̄)` at the sampled rows.
    pub left_bar: Vec<f64>,
    pub right_bar: Vec<f64>,
    /// `(Left U)` and `(Right U)` at the sampled rows, `m x k`.
    pub left_u: DenseMatrix,
    pub right_u: DenseMatrix,
}

/// Precomputed matrix-interpolation pieces of one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperReductionPayload {
    /// `k² x m` product of `C` (or `C̃`) with the interpolation projector.
    pub product: DenseMatrix,
    pub sample_coords: Vec<(usize, usize)>,
    /// Samples at `x̄`: `constant + W x̄`.
    pub sample_bar: Vec<f64>,
    /// `W U`, `m x k`.
    pub sample_basis: DenseMatrix,
}

/// Jacobian payload of one reduced stage.
#[derive(Debug, Clone, PartialEq)]
pub enum JacobianPayload {
    DirectProjection,
    Tensorial,
    DirectionalDerivative { h: f64 },
    Deim {
        /// `Uᵀ V (Pᵀ V)⁻¹`, `k x m`.
        coefficients: DenseMatrix,
        rows: Vec<usize>,
        terms: Vec<DeimTermPayload>,
    },
    Hyper(HyperReductionPayload),
}

/// One reduced implicit stage.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedStage {
    pub tensorial: TensorialPayload,
    pub jacobian: JacobianPayload,
}

/// Galerkin reduced model with its reduced-Jacobian strategy.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    pub basis: PodBasis,
    pub strategy: Strategy,
    pub dt: f64,
    pub theta: f64,
    pub newton: NewtonSettings,
    /// Keep integrating after a Newton solve hits the cap.
    pub continue_on_failure: bool,
    pub stages: Vec<ReducedStage>,
    pub offline_seconds: f64,
    /// Full-order stage operators, needed online by the strategies that work in full space.
    full_stages: Vec<QuadraticOperator>,
    /// `Uᵀ L U + T1` per stage.
    linear_total: Vec<DenseMatrix>,
}

fn project(u: &DenseMatrix, v: &[f64]) -> Vec<f64> {
    u.column_iter().map(|c| crate::linalg::dot(c.as_slice(), v)).collect()
}

fn tensorial_payload(op: &QuadraticOperator, basis: &PodBasis) -> TensorialPayload {
    let u = &basis.u;
    let (n, k) = u.shape();
    let f_bar = project(u, &op.eval(&basis.mean));
    let linear = u.transpose() * op.linear().mul_dense(u);
    let mut t1 = DenseMatrix::zeros(k, k);
    let mut g = DenseMatrix::zeros(k * k, k);
    let centered = basis.mean.iter().any(|&v| v != 0.0);
    for term in op.terms() {
        let lu = term.left.mul_dense(u);
        let ru = term.right.mul_dense(u);
        if centered {
            let mut lx = vec![0.0; n];
            let mut rx = vec![0.0; n];
            term.left.mul_vec_into(&basis.mean, &mut lx);
            term.right.mul_vec_into(&basis.mean, &mut rx);
            let scaled_lu = DenseMatrix::from_fn(n, k, |s, l| term.alpha[s] * rx[s] * lu[(s, l)]);
            let scaled_ru = DenseMatrix::from_fn(n, k, |s, l| term.alpha[s] * lx[s] * ru[(s, l)]);
            t1 += u.transpose() * (scaled_lu + scaled_ru);
        }
        for l in 0..k {
            let w = DenseMatrix::from_fn(n, k, |s, j| u[(s, j)] * term.alpha[s] * lu[(s, l)]);
            let block = w.transpose() * &ru;
            for p in 0..k {
                for j in 0..k {
                    g[(l * k + j, p)] += block[(j, p)];
                }
            }
        }
    }
    let g_sym = DenseMatrix::from_fn(k * k, k, |row, p| {
        let (j, l) = (row % k, row / k);
        g[(row, p)] + g[(p * k + j, l)]
    });
    TensorialPayload {
        f_bar,
        linear,
        t1,
        g,
        g_sym,
    }
}

fn hyper_payload(
    op: &QuadraticOperator,
    basis: &PodBasis,
    interp: &MatrixInterpolant,
) -> Result<HyperReductionPayload> {
    let u = &basis.u;
    let k = u.ncols();
    let n = op.n();
    let m = interp.m();
    let mut product = DenseMatrix::zeros(k * k, m);
    let projector = &interp.interpolant.projector;
    for i in 0..m {
        let column = projector.column(i);
        let reduced = match interp.mode {
            InterpolantMode::Sparse => {
                let mat = interp.pattern.to_csr(column.as_slice());
                u.transpose() * mat.mul_dense(u)
            }
            InterpolantMode::DenseReference => {
                let mat = DenseMatrix::from_column_slice(n, n, column.as_slice());
                u.transpose() * (mat * u)
            }
        };
        product.column_mut(i).copy_from_slice(reduced.as_slice());
    }
    let sampler = op.affine_sampler_at(&interp.sample_coords);
    let sample_bar = sampler.eval(&basis.mean);
    let sample_basis = sampler.weights.mul_dense(u);
    Ok(HyperReductionPayload {
        product,
        sample_coords: interp.sample_coords.clone(),
        sample_bar,
        sample_basis,
    })
}

fn deim_payload(op: &QuadraticOperator, basis: &PodBasis, fn_basis: &DeimInterpolant) -> JacobianPayload {
    let u = &basis.u;
    let coefficients = u.transpose() * &fn_basis.projector;
    let rows = fn_basis.indexes.clone();
    let terms = op
        .sampled_term_blocks(&rows, u)
        .into_iter()
        .map(|t| {
            let mut left_bar = vec![0.0; rows.len()];
            let mut right_bar = vec![0.0; rows.len()];
            t.left_rows.mul_vec_into(&basis.mean, &mut left_bar);
            t.right_rows.mul_vec_into(&basis.mean, &mut right_bar);
            DeimTermPayload {
                alpha: t.alpha,
                left_bar,
                right_bar,
                left_u: t.left_basis,
                right_u: t.right_basis,
            }
        })
        .collect();
    JacobianPayload::Deim {
        coefficients,
        rows,
        terms,
    }
}

/// Builds the reduced model and all offline payloads of `strategy`.
pub fn reduce_model(
    model: &FullModel,
    basis: PodBasis,
    strategy: Strategy,
    inputs: &StrategyInputs,
) -> Result<ReducedModel> {
    if basis.n() != model.n() {
        return Err(Error::DimensionMismatch {
            context: "basis rows vs model dimension",
            expected: model.n(),
            found: basis.n(),
        });
    }
    let started = Instant::now();
    let mut stages = Vec::with_capacity(model.stages.len());
    for (s, st) in model.stages.iter().enumerate() {
        let op = &st.operator;
        let tensorial = tensorial_payload(op, &basis);
        let jacobian = match strategy {
            Strategy::DirectProjection => JacobianPayload::DirectProjection,
            Strategy::Tensorial => JacobianPayload::Tensorial,
            Strategy::DirectionalDerivative => {
                let h = inputs.h.unwrap_or(DEFAULT_FD_STEP);
                if !(h > 0.0) {
                    return Err(Error::InvalidArgument(format!("difference step must be positive, got {h}")));
                }
                JacobianPayload::DirectionalDerivative { h }
            }
            Strategy::Deim => {
                let fb = inputs.function_interpolant.as_ref().ok_or(Error::MissingPayload {
                    strategy: "deim",
                    what: "nonlinear-term interpolant",
                })?;
                if fb.dim() != model.n() {
                    return Err(Error::DimensionMismatch {
                        context: "nonlinear-term interpolant dimension",
                        expected: model.n(),
                        found: fb.dim(),
                    });
                }
                deim_payload(op, &basis, fb)
            }
            Strategy::MdeimReference | Strategy::Smdeim => {
                let (name, mode) = if strategy == Strategy::Smdeim {
                    ("smdeim", InterpolantMode::Sparse)
                } else {
                    ("mdeim", InterpolantMode::DenseReference)
                };
                let interp = inputs.matrix_interpolants.get(s).ok_or(Error::MissingPayload {
                    strategy: name,
                    what: "matrix interpolant for every stage",
                })?;
                if interp.mode != mode {
                    return Err(Error::InvalidArgument(format!(
                        "strategy {name} needs a {mode:?} interpolant"
                    )));
                }
                if interp.pattern != *op.pattern() {
                    return Err(Error::InvalidArgument(format!(
                        "interpolant pattern does not match stage {}",
                        st.name
                    )));
                }
                JacobianPayload::Hyper(hyper_payload(op, &basis, interp)?)
            }
        };
        stages.push(ReducedStage { tensorial, jacobian });
    }
    let mut rm = ReducedModel::from_parts(model, basis, strategy, stages)?;
    rm.offline_seconds = started.elapsed().as_secs_f64();
    Ok(rm)
}

impl ReducedModel {
    /// Assembles a reduced model from precomputed stages (for example, loaded
    /// from an artifact) and the full model they were built from.
    pub fn from_parts(
        model: &FullModel,
        basis: PodBasis,
        strategy: Strategy,
        stages: Vec<ReducedStage>,
    ) -> Result<Self> {
        if stages.len() != model.stages.len() {
            return Err(Error::DimensionMismatch {
                context: "reduced stage count",
                expected: model.stages.len(),
                found: stages.len(),
            });
        }
        let linear_total = stages
            .iter()
            .map(|s| &s.tensorial.linear + &s.tensorial.t1)
            .collect();
        Ok(Self {
            basis,
            strategy,
            dt: model.dt,
            theta: model.theta,
            newton: model.newton,
            continue_on_failure: true,
            stages,
            offline_seconds: 0.0,
            full_stages: model.stages.iter().map(|s| s.operator.clone()).collect(),
            linear_total,
        })
    }

    pub fn k(&self) -> usize {
        self.basis.k
    }

    /// Tensorial reduced right-hand side of stage `s`.
    pub fn reduced_rhs(&self, s: usize, xr: &[f64]) -> Vec<f64> {
        let k = self.k();
        let tp = &self.stages[s].tensorial;
        let lt = &self.linear_total[s];
        let gx = &tp.g * nalgebra::DVector::from_column_slice(xr);
        (0..k)
            .map(|j| {
                let mut v = tp.f_bar[j];
                for l in 0..k {
                    v += lt[(j, l)] * xr[l] + gx[l * k + j] * xr[l];
                }
                v
            })
            .collect()
    }

    /// Explicit contribution `Σ_{q != s} F̃_q(x̃_start)`.
    pub fn explicit_part(&self, s: usize, start: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.k()];
        for q in 0..self.stages.len() {
            if q != s {
                for (a, b) in y.iter_mut().zip(self.reduced_rhs(q, start)) {
                    *a += b;
                }
            }
        }
        y
    }

    /// Reduced Jacobian of stage `s` by the model's strategy.
    pub fn reduced_jacobian(&self, s: usize, xr: &[f64]) -> DenseMatrix {
        let k = self.k();
        let st = &self.stages[s];
        match &st.jacobian {
            JacobianPayload::DirectProjection => {
                let x = self.basis.lift(xr);
                let op = &self.full_stages[s];
                let j = op.jacobian(&x);
                let n = x.len();
                count_flops(2 * n * k + 2 * j.nnz() * k + 2 * n * k * k);
                self.basis.u.transpose() * j.mul_dense(&self.basis.u)
            }
            JacobianPayload::Tensorial => {
                count_flops(2 * k * k * k + k * k);
                let t2 = &st.tensorial.g_sym * nalgebra::DVector::from_column_slice(xr);
                &self.linear_total[s] + DenseMatrix::from_column_slice(k, k, t2.as_slice())
            }
            JacobianPayload::DirectionalDerivative { h } => {
                let x = self.basis.lift(xr);
                let op = &self.full_stages[s];
                let f0 = op.eval(&x);
                let mut out = DenseMatrix::zeros(k, k);
                for j in 0..k {
                    let xp: Vec<f64> = x
                        .iter()
                        .zip(self.basis.u.column(j).iter())
                        .map(|(a, b)| a + h * b)
                        .collect();
                    let fp = op.eval(&xp);
                    let diff: Vec<f64> = fp.iter().zip(&f0).map(|(a, b)| (a - b) / h).collect();
                    out.column_mut(j).copy_from_slice(&project(&self.basis.u, &diff));
                }
                let n = x.len();
                count_flops((k + 1) * 4 * op.pattern().r() + 2 * n * k * (k + 1));
                out
            }
            JacobianPayload::Deim {
                coefficients, terms, ..
            } => {
                let m = coefficients.ncols();
                let mut sampled = DenseMatrix::zeros(m, k);
                for t in terms {
                    for i in 0..m {
                        let lx = t.left_bar[i] + crate::linalg::dot_row(&t.left_u, i, xr);
                        let rx = t.right_bar[i] + crate::linalg::dot_row(&t.right_u, i, xr);
                        let (a_r, a_l) = (t.alpha[i] * rx, t.alpha[i] * lx);
                        for j in 0..k {
                            sampled[(i, j)] += a_r * t.left_u[(i, j)] + a_l * t.right_u[(i, j)];
                        }
                    }
                }
                count_flops(terms.len() * m * 8 * k + 2 * k * m * k + k * k);
                &st.tensorial.linear + coefficients * sampled
            }
            JacobianPayload::Hyper(hp) => {
                let m = hp.sample_bar.len();
                let samples: Vec<f64> = (0..m)
                    .map(|i| hp.sample_bar[i] + crate::linalg::dot_row(&hp.sample_basis, i, xr))
                    .collect();
                let v = &hp.product * nalgebra::DVector::from_column_slice(&samples);
                count_flops(2 * m * k + 2 * k * k * m);
                DenseMatrix::from_column_slice(k, k, v.as_slice())
            }
        }
    }

    /// Stage residual `x̃ - x̃_start - theta (F̃_s(x̃) + explicit)`.
    pub fn stage_residual(&self, s: usize, xr: &[f64], start: &[f64], explicit: &[f64]) -> Vec<f64> {
        let f = self.reduced_rhs(s, xr);
        (0..xr.len())
            .map(|i| xr[i] - start[i] - self.theta * (f[i] + explicit[i]))
            .collect()
    }

    /// Newton solve of stage `s`; `observer` sees every iterate at which the
    /// reduced Jacobian is evaluated.
    pub fn stage_solve(
        &self,
        s: usize,
        start: &[f64],
        observer: &mut dyn FnMut(usize, &[f64], &DenseMatrix),
    ) -> Result<(Vec<f64>, NewtonOutcome)> {
        let explicit = self.explicit_part(s, start);
        let mut x = start.to_vec();
        let k = self.k();
        let outcome = newton_solve(
            &mut x,
            self.newton,
            |x| self.stage_residual(s, x, start, &explicit),
            |x, r| {
                let j = self.reduced_jacobian(s, x);
                observer(s, x, &j);
                let sys = DenseMatrix::identity(k, k) - self.theta * j;
                LuFactor::new(&sys)?.solve(r)
            },
        )?;
        Ok((x, outcome))
    }
}

/// Reduced trajectory and Newton statistics.
#[derive(Debug, Clone)]
pub struct RomRun {
    /// `k x N_t`, one column per time level.
    pub trajectory: DenseMatrix,
    pub stats: NewtonStats,
}

/// Integrates the reduced model from `x̃₀` over `n_t` time levels.
pub fn rom_solve(rm: &ReducedModel, x0: &[f64], n_t: usize) -> Result<RomRun> {
    rom_solve_observed(rm, x0, n_t, &mut |_, _, _| {})
}

/// [`rom_solve`] with a hook called at every reduced Jacobian evaluation.
pub fn rom_solve_observed(
    rm: &ReducedModel,
    x0: &[f64],
    n_t: usize,
    observer: &mut dyn FnMut(usize, &[f64], &DenseMatrix),
) -> Result<RomRun> {
    let k = rm.k();
    if x0.len() != k {
        return Err(Error::DimensionMismatch {
            context: "reduced initial state",
            expected: k,
            found: x0.len(),
        });
    }
    let (svd_before, deim_before) = (svd_call_count(), deim_call_count());
    let started = Instant::now();
    let mut trajectory = DenseMatrix::zeros(k, n_t.max(1));
    trajectory.column_mut(0).copy_from_slice(x0);
    let mut stats = NewtonStats {
        offline_seconds: rm.offline_seconds,
        ..NewtonStats::default()
    };
    let mut x = x0.to_vec();
    for step in 1..n_t {
        for s in 0..rm.stages.len() {
            let (next, outcome) = rm.stage_solve(s, &x, observer)?;
            stats.record(&outcome);
            if !outcome.converged && !rm.continue_on_failure {
                return Err(Error::NewtonFailure {
                    step,
                    stage: format!("reduced stage {s}"),
                    iterations: outcome.iterations,
                    residual: outcome.residual_norm,
                });
            }
            x = next;
        }
        trajectory.column_mut(step).copy_from_slice(&x);
    }
    stats.online_seconds = started.elapsed().as_secs_f64();
    debug_assert_eq!(svd_call_count(), svd_before, "factorization inside the online stage");
    debug_assert_eq!(deim_call_count(), deim_before, "index selection inside the online stage");
    Ok(RomRun { trajectory, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CsrMatrix, frobenius};
    use crate::models::{BilinearTerm, BurgersConfig, Stage};

    fn square_model(n: usize) -> FullModel {
        let op = QuadraticOperator::new(
            CsrMatrix::zeros(n, n),
            vec![BilinearTerm {
                alpha: vec![1.0; n],
                left: CsrMatrix::identity(n),
                right: CsrMatrix::identity(n),
            }],
        )
        .unwrap();
        FullModel {
            id: "square".into(),
            config_hash: 0,
            dt: 0.1,
            n_t: 3,
            theta: 0.1,
            stages: vec![Stage { name: "implicit", operator: op }],
            x0: vec![0.0; n],
            newton: NewtonSettings::default(),
            variable_blocks: vec![0..n],
        }
    }

    fn unit_basis(n: usize, k: usize) -> PodBasis {
        PodBasis {
            u: DenseMatrix::identity(n, k),
            singulars: vec![1.0; k],
            k,
            gamma: 1.0,
            centered: false,
            mean: vec![0.0; n],
        }
    }

    #[test]
    fn single_mode_tensor_is_cube() {
        let model = square_model(3);
        let rm = reduce_model(&model, unit_basis(3, 1), Strategy::Tensorial, &StrategyInputs::default()).unwrap();
        assert_eq!(rm.stages[0].tensorial.g[(0, 0)], 1.0);
        assert!(rm.stages[0].tensorial.t1.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_rhs_keeps_state_constant() {
        let n = 4;
        let op = QuadraticOperator::new(CsrMatrix::zeros(n, n), vec![]).unwrap();
        let mut model = square_model(n);
        model.stages[0].operator = op;
        let rm = reduce_model(&model, unit_basis(n, 2), Strategy::Tensorial, &StrategyInputs::default()).unwrap();
        let run = rom_solve(&rm, &[0.5, -1.0], 5).unwrap();
        for c in 0..5 {
            assert_eq!(run.trajectory.column(c).as_slice(), &[0.5, -1.0]);
        }
        assert!(run.stats.iterations.iter().all(|&i| i == 1));
    }

    #[test]
    fn residual_trivial_cases() {
        let model = BurgersConfig::with_grid(21).build().unwrap();
        let basis = crate::pod::pod_basis(
            &DenseMatrix::from_fn(19, 3, |i, j| ((i + 1) as f64 * (j + 1) as f64 * 0.1).sin()),
            1.0,
            3,
            false,
        )
        .unwrap();
        let mut rm = reduce_model(&model, basis, Strategy::Tensorial, &StrategyInputs::default()).unwrap();
        let x = [0.1, -0.2, 0.05];
        let prev = [0.3, 0.0, 0.1];
        rm.theta = 0.0;
        let r = rm.stage_residual(0, &x, &prev, &[0.0; 3]);
        for i in 0..3 {
            assert_eq!(r[i], x[i] - prev[i]);
        }
        let zero = [0.0; 3];
        assert!(rm.stage_residual(0, &zero, &zero, &[0.0; 3]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn strategies_parse_and_print() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("nope".parse::<Strategy>().is_err());
    }

    #[test]
    fn missing_payload_is_reported() {
        let model = square_model(3);
        for s in [Strategy::Deim, Strategy::Smdeim, Strategy::MdeimReference] {
            let err = reduce_model(&model, unit_basis(3, 2), s, &StrategyInputs::default()).unwrap_err();
            assert!(matches!(err, Error::MissingPayload { .. }));
        }
    }

    #[test]
    fn tensorial_matches_direct_on_centered_basis() {
        let model = BurgersConfig::with_grid(31).build().unwrap();
        let s = DenseMatrix::from_fn(29, 6, |i, j| ((i + 2) as f64 * (j + 1) as f64 * 0.07).sin() + 0.3);
        let basis = crate::pod::pod_basis(&s, 1.0, 4, true).unwrap();
        let inputs = StrategyInputs::default();
        let t = reduce_model(&model, basis.clone(), Strategy::Tensorial, &inputs).unwrap();
        let d = reduce_model(&model, basis, Strategy::DirectProjection, &inputs).unwrap();
        let x = [0.2, -0.1, 0.05, 0.3];
        let diff = frobenius(&(t.reduced_jacobian(0, &x) - d.reduced_jacobian(0, &x)));
        assert!(diff < 1e-9, "{diff}");
        let lifted = t.basis.lift(&x);
        let full = project(&t.basis.u, &model.stages[0].operator.eval(&lifted));
        for (a, b) in t.reduced_rhs(0, &x).iter().zip(&full) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
    }
}
