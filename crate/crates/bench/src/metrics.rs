//! Error metrics of one reduced model against the full-order data.

use anyhow::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smdeim::deim::DeimInterpolant;
use smdeim::jacobian_approx::{approximate_matrix, deim_function_jacobian, sample_rows, MatrixInterpolant};
use smdeim::linalg::{frobenius, norm2, DenseMatrix};
use smdeim::models::{FullModel, QuadraticOperator};
use smdeim::pod::PodBasis;
use smdeim::rom::{reduce_model, ReducedModel, RomRun, Strategy, StrategyInputs};

/// Largest singular value of a dense matrix.
pub fn largest_singular(a: &DenseMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

fn relative(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Stage Jacobian as the strategy approximates it, where it builds one.
fn approximate_jacobian(
    strategy: Strategy,
    op: &QuadraticOperator,
    x: &[f64],
    exact: &smdeim::linalg::CsrMatrix,
    function_interpolant: Option<&DeimInterpolant>,
    matrix_interpolant: Option<&MatrixInterpolant>,
) -> Result<Option<DenseMatrix>> {
    Ok(match strategy {
        Strategy::Smdeim | Strategy::MdeimReference => {
            let it = matrix_interpolant.ok_or_else(|| anyhow::anyhow!("matrix interpolant missing"))?;
            let samples = op.sample_coords(x, &it.sample_coords)?;
            Some(approximate_matrix(it, &samples)?.to_dense())
        }
        Strategy::Deim => {
            // the linear part is kept exact; only the nonlinear rows are interpolated
            let fb = function_interpolant.ok_or_else(|| anyhow::anyhow!("function interpolant missing"))?;
            let linear = op.linear();
            let full = deim_function_jacobian(fb, &sample_rows(fb, exact)?)?;
            let lin = deim_function_jacobian(fb, &sample_rows(fb, linear)?)?;
            Some(linear.to_dense() + full - lin)
        }
        Strategy::DirectProjection | Strategy::Tensorial | Strategy::DirectionalDerivative => None,
    })
}

/// Jacobian-level metrics averaged over seeded snapshot columns and all stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianMetrics {
    pub jacobian_error: Option<f64>,
    pub sigma_error: Option<f64>,
    pub reduced_jacobian_error: f64,
}

/// Snapshot columns drawn for seed `seed`, sorted.
pub fn eval_columns(total: usize, count: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols = rand::seq::index::sample(&mut rng, total, count.min(total)).into_vec();
    cols.sort_unstable();
    cols
}

#[allow(clippy::too_many_arguments)]
pub fn jacobian_metrics(
    model: &FullModel,
    rm: &ReducedModel,
    basis: &PodBasis,
    states: &DenseMatrix,
    columns: &[usize],
    function_interpolant: Option<&DeimInterpolant>,
    matrix_interpolants: &[MatrixInterpolant],
) -> Result<JacobianMetrics> {
    let direct = reduce_model(model, basis.clone(), Strategy::DirectProjection, &StrategyInputs::default())?;
    let mut jac = Vec::new();
    let mut sigma = Vec::new();
    let mut reduced = Vec::new();
    for &c in columns {
        let x: Vec<f64> = states.column(c).iter().copied().collect();
        let xr = basis.project(&x);
        for (s, stage) in model.stages.iter().enumerate() {
            let op = &stage.operator;
            let exact = op.jacobian(&x);
            if let Some(approx) =
                approximate_jacobian(rm.strategy, op, &x, &exact, function_interpolant, matrix_interpolants.get(s))?
            {
                let exact = exact.to_dense();
                jac.push(relative(frobenius(&(&approx - &exact)), frobenius(&exact)));
                let top = largest_singular(&exact);
                sigma.push(relative((largest_singular(&approx) - top).abs(), top));
            }
            let jr = rm.reduced_jacobian(s, &xr);
            let jd = direct.reduced_jacobian(s, &xr);
            reduced.push(relative(frobenius(&(jr - &jd)), frobenius(&jd)));
        }
    }
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    Ok(JacobianMetrics {
        jacobian_error: mean(&jac),
        sigma_error: mean(&sigma),
        reduced_jacobian_error: mean(&reduced).unwrap_or(0.0),
    })
}

/// Relative error of the reduced trajectory against the projected full
/// trajectory, per time level and over the whole run (Frobenius norms).
pub fn trajectory_errors(full: &DenseMatrix, basis: &PodBasis, run: &RomRun) -> (Vec<f64>, f64) {
    let levels = full.ncols().min(run.trajectory.ncols());
    let mut per_level = Vec::with_capacity(levels);
    let mut num = 0.0;
    let mut den = 0.0;
    for t in 0..levels {
        let x: Vec<f64> = full.column(t).iter().copied().collect();
        let projected = basis.project(&x);
        let diff: Vec<f64> = run.trajectory.column(t).iter().zip(&projected).map(|(a, b)| a - b).collect();
        let e = norm2(&diff);
        let f = norm2(&projected);
        per_level.push(relative(e, f));
        num += e * e;
        den += f * f;
    }
    (per_level, relative(num.sqrt(), den.sqrt()))
}
