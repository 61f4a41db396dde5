//! Full-order reference models and their implicit Newton solver.
//!
//! Both models are written as a sequence of implicit stages. Stage `s` advances
//! `w_start` by solving
//!
//! ```text
//! w - w_start - theta * (F_s(w) + Σ_{q != s} F_q(w_start)) = 0
//! ```
//!
//! with plain Newton. Burgers has one stage with `theta = dt` (backward Euler);
//! the shallow water model has an x-stage and a y-stage with `theta = dt / 2`.

mod burgers;
mod quadratic;
mod swe;

pub use burgers::{burgers_jacobian, burgers_residual, BurgersConfig};
pub use quadratic::{AffineSampler, BilinearTerm, QuadraticOperator, SampledTerm};
pub use swe::{swe_initialize, swe_step_adi, SweConfig, SweState};

use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{norm2, DenseMatrix, SparseLu};
use crate::rom::NewtonStats;
use crate::snapshots::{SnapshotSet, StageJacobians};

/// Newton stopping rule: Euclidean residual norm at most `tol`, at most `max_iter` passes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
        }
    }
}

/// Result of one Newton solve.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    /// Passes through the Newton loop, each evaluating and testing the
    /// residual; every pass but a converged last one also performs a linear solve.
    pub iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
    /// Residual norm tested at each pass.
    pub history: Vec<f64>,
}

/// Plain Newton iteration on `x` in place.
///
/// `residual(x)` evaluates the residual; `correction(x, r)` returns `δ` with
/// `J(x) δ = r`, and the update is `x -= δ`. Stops once the Euclidean residual
/// norm is at most `tol`, or reports failure after `max_iter` passes.
pub fn newton_solve<R, S>(
    x: &mut [f64],
    settings: NewtonSettings,
    mut residual: R,
    mut correction: S,
) -> Result<NewtonOutcome>
where
    R: FnMut(&[f64]) -> Vec<f64>,
    S: FnMut(&[f64], &[f64]) -> Result<Vec<f64>>,
{
    let mut history = Vec::new();
    loop {
        let r = residual(x);
        let norm = norm2(&r);
        history.push(norm);
        let iterations = history.len();
        let converged = norm <= settings.tol;
        if converged || iterations >= settings.max_iter || !norm.is_finite() {
            return Ok(NewtonOutcome {
                iterations,
                residual_norm: norm,
                converged,
                history,
            });
        }
        let delta = correction(x, &r)?;
        for (xi, d) in x.iter_mut().zip(&delta) {
            *xi -= d;
        }
    }
}

/// One implicit stage of a full model.
#[derive(Debug, Clone)]
pub struct Stage {
    pub name: &'static str,
    pub operator: QuadraticOperator,
}

/// Full-order model in stage form.
#[derive(Debug, Clone)]
pub struct FullModel {
    pub id: String,
    pub config_hash: u64,
    pub dt: f64,
    /// Number of stored time levels, including the initial one.
    pub n_t: usize,
    /// Implicit weight of every stage.
    pub theta: f64,
    pub stages: Vec<Stage>,
    pub x0: Vec<f64>,
    pub newton: NewtonSettings,
    /// State ranges of the physical variables.
    pub variable_blocks: Vec<Range<usize>>,
}

impl FullModel {
    pub fn n(&self) -> usize {
        self.x0.len()
    }

    /// Sum of all stage right-hand sides.
    pub fn rhs(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        for st in &self.stages {
            for (a, b) in y.iter_mut().zip(st.operator.eval(x)) {
                *a += b;
            }
        }
        y
    }

    /// Sum of the nonlinear parts of all stages.
    pub fn nonlinear(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        for st in &self.stages {
            for (a, b) in y.iter_mut().zip(st.operator.nonlinear(x)) {
                *a += b;
            }
        }
        y
    }

    /// Explicit contribution `Σ_{q != s} F_q(w_start)` of stage `s`.
    pub fn explicit_part(&self, s: usize, w_start: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        for (q, st) in self.stages.iter().enumerate() {
            if q != s {
                for (a, b) in y.iter_mut().zip(st.operator.eval(w_start)) {
                    *a += b;
                }
            }
        }
        y
    }

    /// Stage residual `w - w_start - theta (F_s(w) + explicit)`.
    pub fn stage_residual(&self, s: usize, w: &[f64], w_start: &[f64], explicit: &[f64]) -> Vec<f64> {
        let f = self.stages[s].operator.eval(w);
        (0..w.len())
            .map(|i| w[i] - w_start[i] - self.theta * (f[i] + explicit[i]))
            .collect()
    }

    /// Solves stage `s` starting from `w_start`, which is also the initial guess.
    pub fn stage_solve(&self, s: usize, w_start: &[f64]) -> Result<(Vec<f64>, NewtonOutcome)> {
        let explicit = self.explicit_part(s, w_start);
        let op = &self.stages[s].operator;
        let mut w = w_start.to_vec();
        let outcome = newton_solve(
            &mut w,
            self.newton,
            |w| self.stage_residual(s, w, w_start, &explicit),
            |w, r| {
                let m = op.jacobian(w).identity_minus_scaled(self.theta);
                SparseLu::new(&m)?.solve(r)
            },
        )?;
        Ok((w, outcome))
    }

    /// Advances one time step; returns each stage output with its Newton outcome.
    pub fn step(&self, x: &[f64]) -> Result<Vec<(Vec<f64>, NewtonOutcome)>> {
        let mut out = Vec::with_capacity(self.stages.len());
        let mut w = x.to_vec();
        for s in 0..self.stages.len() {
            let (next, outcome) = self.stage_solve(s, &w)?;
            w = next.clone();
            out.push((next, outcome));
        }
        Ok(out)
    }
}

/// Trajectory, Newton statistics and snapshots of a full-order run.
#[derive(Debug, Clone)]
pub struct FullRun {
    /// `n x N_t`, one column per time level.
    pub trajectory: DenseMatrix,
    pub stats: NewtonStats,
    pub snapshots: SnapshotSet,
}

/// Integrates the full model over its `N_t` time levels.
///
/// Snapshot columns: a single-stage model stores every time level including
/// the initial state; a multi-stage model stores every stage output.
pub fn full_solve(model: &FullModel) -> Result<FullRun> {
    let n = model.n();
    let started = std::time::Instant::now();
    let mut trajectory = DenseMatrix::zeros(n, model.n_t.max(1));
    trajectory.column_mut(0).copy_from_slice(&model.x0);
    let mut stored: Vec<Vec<f64>> = Vec::new();
    if model.stages.len() == 1 {
        stored.push(model.x0.clone());
    }
    let mut stats = NewtonStats::default();
    let mut x = model.x0.clone();
    for step in 1..model.n_t {
        let outputs = model.step(&x)?;
        for (s, (w, outcome)) in outputs.iter().enumerate() {
            if !outcome.converged {
                return Err(Error::NewtonFailure {
                    step,
                    stage: model.stages[s].name.to_string(),
                    iterations: outcome.iterations,
                    residual: outcome.residual_norm,
                });
            }
            stats.record(outcome);
            if model.stages.len() > 1 {
                stored.push(w.clone());
            }
        }
        x = outputs.last().map(|(w, _)| w.clone()).unwrap_or(x);
        trajectory.column_mut(step).copy_from_slice(&x);
        if model.stages.len() == 1 {
            stored.push(x.clone());
        }
    }
    stats.online_seconds = started.elapsed().as_secs_f64();

    let cols = stored.len();
    let mut states = DenseMatrix::zeros(n, cols);
    let mut nonlinear = DenseMatrix::zeros(n, cols);
    let mut stages: Vec<StageJacobians> = model
        .stages
        .iter()
        .map(|st| StageJacobians {
            pattern: st.operator.pattern().clone(),
            values: DenseMatrix::zeros(st.operator.pattern().r(), cols),
        })
        .collect();
    for (c, w) in stored.iter().enumerate() {
        states.column_mut(c).copy_from_slice(w);
        nonlinear.column_mut(c).copy_from_slice(&model.nonlinear(w));
        for (st, sj) in model.stages.iter().zip(stages.iter_mut()) {
            sj.values.column_mut(c).copy_from_slice(&st.operator.jacobian_values(w));
        }
    }
    let snapshots = SnapshotSet::new(
        model.id.clone(),
        model.config_hash,
        model.dt,
        states,
        nonlinear,
        stages,
    )?;
    Ok(FullRun {
        trajectory,
        stats,
        snapshots,
    })
}

/// Runs the full model and keeps only its snapshots.
pub fn collect_snapshots(model: &FullModel) -> Result<SnapshotSet> {
    Ok(full_solve(model)?.snapshots)
}

/// Either reference model configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelConfig {
    Burgers(BurgersConfig),
    Swe(SweConfig),
}

impl ModelConfig {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Burgers(_) => "burgers",
            Self::Swe(_) => "swe",
        }
    }

    pub fn build(&self) -> Result<FullModel> {
        match self {
            Self::Burgers(c) => c.build(),
            Self::Swe(c) => c.build(),
        }
    }
}
