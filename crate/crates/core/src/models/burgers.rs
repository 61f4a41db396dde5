//! Viscous Burgers equation `u_t = -u u_x + mu u_xx` on `[0, L]` with
//! homogeneous Dirichlet boundaries, central differences and backward Euler.

use super::{BilinearTerm, FullModel, NewtonSettings, QuadraticOperator, Stage};
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct BurgersConfig {
    /// Grid points including both boundaries; the state has `n - 2` unknowns.
    pub n: usize,
    pub length: f64,
    pub mu: f64,
    pub t_final: f64,
    pub n_t: usize,
    /// Initial condition as polynomial coefficients in `x / L`, lowest degree
    /// first. `None` selects `c (x/L)^3 (1 - x/L)^4` scaled to a grid maximum of one.
    pub ic_coefficients: Option<Vec<f64>>,
    pub newton: NewtonSettings,
}

impl Default for BurgersConfig {
    fn default() -> Self {
        Self {
            n: 201,
            length: 1.0,
            mu: 0.01,
            t_final: 2.0,
            n_t: 401,
            ic_coefficients: None,
            newton: NewtonSettings::default(),
        }
    }
}

impl BurgersConfig {
    pub fn with_grid(n: usize) -> Self {
        Self { n, ..Self::default() }
    }

    pub fn unknowns(&self) -> usize {
        self.n - 2
    }

    pub fn dx(&self) -> f64 {
        self.length / (self.n - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_t.saturating_sub(1).max(1) as f64
    }

    fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::InvalidArgument(format!("Burgers grid needs n >= 4, got {}", self.n)));
        }
        if !(self.mu > 0.0) || !(self.length > 0.0) || !(self.t_final > 0.0) || self.n_t == 0 {
            return Err(Error::InvalidArgument(
                "Burgers requires mu > 0, L > 0, t_f > 0 and N_t >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Initial state on the interior grid points.
    pub fn initial_state(&self) -> Vec<f64> {
        let m = self.unknowns();
        let xi: Vec<f64> = (1..=m).map(|i| i as f64 / (self.n - 1) as f64).collect();
        match &self.ic_coefficients {
            Some(coef) => xi
                .iter()
                .map(|&s| coef.iter().rev().fold(0.0, |acc, &c| acc * s + c))
                .collect(),
            None => {
                let raw: Vec<f64> = xi.iter().map(|&s| s.powi(3) * (1.0 - s).powi(4)).collect();
                let top = raw.iter().cloned().fold(0.0, f64::max);
                raw.iter().map(|v| v / top).collect()
            }
        }
    }

    /// First-difference operator `A_x` on the interior points.
    pub fn first_difference(&self) -> CsrMatrix {
        let m = self.unknowns();
        let c = 1.0 / (2.0 * self.dx());
        let mut t = Vec::with_capacity(2 * m);
        for i in 0..m {
            if i > 0 {
                t.push((i, i - 1, -c));
            }
            if i + 1 < m {
                t.push((i, i + 1, c));
            }
        }
        CsrMatrix::from_triplets(m, m, &t)
    }

    /// Second-difference operator `A_xx` on the interior points.
    pub fn second_difference(&self) -> CsrMatrix {
        let m = self.unknowns();
        let c = 1.0 / (self.dx() * self.dx());
        let mut t = Vec::with_capacity(3 * m);
        for i in 0..m {
            if i > 0 {
                t.push((i, i - 1, c));
            }
            t.push((i, i, -2.0 * c));
            if i + 1 < m {
                t.push((i, i + 1, c));
            }
        }
        CsrMatrix::from_triplets(m, m, &t)
    }

    pub fn build(&self) -> Result<FullModel> {
        self.validate()?;
        let m = self.unknowns();
        let mut linear = self.second_difference();
        for v in linear.values_mut() {
            *v *= self.mu;
        }
        let operator = QuadraticOperator::new(
            linear,
            vec![BilinearTerm {
                alpha: vec![-1.0; m],
                left: CsrMatrix::identity(m),
                right: self.first_difference(),
            }],
        )?;
        Ok(FullModel {
            id: "burgers".into(),
            config_hash: crate::fnv1a64(format!("{self:?}").as_bytes()),
            dt: self.dt(),
            n_t: self.n_t,
            theta: self.dt(),
            stages: vec![Stage {
                name: "implicit",
                operator,
            }],
            x0: self.initial_state(),
            newton: self.newton,
            variable_blocks: vec![0..m],
        })
    }
}

/// Backward Euler residual `u - u_prev - dt (-u ⊙ A_x u + mu A_xx u)`, evaluated
/// directly from the three-point stencils.
pub fn burgers_residual(cfg: &BurgersConfig, u: &[f64], u_prev: &[f64], dt: f64) -> Vec<f64> {
    let m = u.len();
    let dx = cfg.dx();
    let at = |i: isize| if i < 0 || i as usize >= m { 0.0 } else { u[i as usize] };
    (0..m)
        .map(|i| {
            let k = i as isize;
            let ux = (at(k + 1) - at(k - 1)) / (2.0 * dx);
            let uxx = (at(k + 1) - 2.0 * u[i] + at(k - 1)) / (dx * dx);
            u[i] - u_prev[i] - dt * (-u[i] * ux + cfg.mu * uxx)
        })
        .collect()
}

/// Residual Jacobian `I - dt (-diag(A_x u) - diag(u) A_x + mu A_xx)` from the stencils.
pub fn burgers_jacobian(cfg: &BurgersConfig, u: &[f64], dt: f64) -> CsrMatrix {
    let m = u.len();
    let dx = cfg.dx();
    let (cx, cxx) = (1.0 / (2.0 * dx), 1.0 / (dx * dx));
    let at = |i: isize| if i < 0 || i as usize >= m { 0.0 } else { u[i as usize] };
    let mut t = Vec::with_capacity(3 * m);
    for i in 0..m {
        let k = i as isize;
        let ux = (at(k + 1) - at(k - 1)) * cx;
        if i > 0 {
            t.push((i, i - 1, -dt * (u[i] * cx + cfg.mu * cxx)));
        }
        t.push((i, i, 1.0 - dt * (-ux - 2.0 * cfg.mu * cxx)));
        if i + 1 < m {
            t.push((i, i + 1, -dt * (-u[i] * cx + cfg.mu * cxx)));
        }
    }
    CsrMatrix::from_triplets(m, m, &t)
}
