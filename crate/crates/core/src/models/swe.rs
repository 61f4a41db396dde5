//! Shallow water equations on a beta-plane channel, periodic in x, walls in y,
//! in the `(u, v, φ = 2 sqrt(g h))` form, advanced by a two-stage
//! alternating-direction implicit scheme.
//!
//! The state stacks `[u; v; φ]` over the `(N_x - 2) x (N_y - 2)` interior
//! points with x varying fastest. The x-direction is a ring of `N_x - 2`
//! columns; in y, `u` and `φ` have zero normal derivative at the walls and `v`
//! vanishes there.

use super::{BilinearTerm, FullModel, NewtonOutcome, NewtonSettings, QuadraticOperator, Stage};
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SweConfig {
    pub nx: usize,
    pub ny: usize,
    /// Channel length in x, meters.
    pub length: f64,
    /// Channel width in y, meters.
    pub width: f64,
    pub f_hat: f64,
    pub beta: f64,
    pub g: f64,
    pub h0: f64,
    pub h1: f64,
    pub h2: f64,
    pub dt: f64,
    pub n_t: usize,
    pub newton: NewtonSettings,
}

impl Default for SweConfig {
    fn default() -> Self {
        Self {
            nx: 21,
            ny: 15,
            length: 6.0e6,
            width: 4.4e6,
            f_hat: 1e-4,
            beta: 1.5e-11,
            g: 10.0,
            h0: 2000.0,
            h1: 220.0,
            h2: 133.0,
            dt: 240.0,
            n_t: 91,
            newton: NewtonSettings::default(),
        }
    }
}

/// Velocity and geopotential fields on the interior points, x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SweState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub phi: Vec<f64>,
}

impl SweState {
    pub fn to_vector(&self) -> Vec<f64> {
        let mut w = self.u.clone();
        w.extend_from_slice(&self.v);
        w.extend_from_slice(&self.phi);
        w
    }

    pub fn from_vector(w: &[f64]) -> Self {
        let p = w.len() / 3;
        Self {
            u: w[..p].to_vec(),
            v: w[p..2 * p].to_vec(),
            phi: w[2 * p..].to_vec(),
        }
    }
}

#[derive(Clone, Copy)]
enum Var {
    U = 0,
    V = 1,
    Phi = 2,
}

#[derive(Clone, Copy)]
enum Deriv {
    X,
    YNeumann,
    YDirichlet,
}

impl SweConfig {
    /// Columns of the periodic ring.
    pub fn mx(&self) -> usize {
        self.nx - 2
    }

    /// Interior rows between the walls.
    pub fn my(&self) -> usize {
        self.ny - 2
    }

    pub fn points(&self) -> usize {
        self.mx() * self.my()
    }

    pub fn dx(&self) -> f64 {
        self.length / self.mx() as f64
    }

    pub fn dy(&self) -> f64 {
        self.width / (self.ny - 1) as f64
    }

    pub fn x_at(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn y_at(&self, j: usize) -> f64 {
        (j + 1) as f64 * self.dy()
    }

    pub fn coriolis(&self, y: f64) -> f64 {
        self.f_hat + self.beta * (y - 0.5 * self.width)
    }

    /// Fluid depth of the initial condition.
    pub fn initial_height(&self, x: f64, y: f64) -> f64 {
        let s = 9.0 * (0.5 * self.width - y) / (2.0 * self.width);
        let sech = 1.0 / s.cosh();
        self.h0
            + self.h1 * s.tanh()
            + self.h2 * sech * sech * (2.0 * std::f64::consts::PI * x / self.length).sin()
    }

    fn validate(&self) -> Result<()> {
        if self.nx < 5 || self.ny < 3 {
            return Err(Error::InvalidArgument(format!(
                "shallow water mesh needs N_x >= 5 and N_y >= 3, got {}x{}",
                self.nx, self.ny
            )));
        }
        if !(self.dt > 0.0) || self.n_t == 0 || !(self.g > 0.0) {
            return Err(Error::InvalidArgument("shallow water requires dt > 0, g > 0, N_t >= 1".into()));
        }
        Ok(())
    }

    fn index(&self, var: Var, i: usize, j: usize) -> usize {
        var as usize * self.points() + j * self.mx() + i
    }

    /// Central-difference stencil at point `(i, j)`: `(neighbor point index, weight)`.
    fn stencil(&self, d: Deriv, i: usize, j: usize) -> Vec<((usize, usize), f64)> {
        let (mx, my) = (self.mx(), self.my());
        match d {
            Deriv::X => {
                let c = 1.0 / (2.0 * self.dx());
                vec![(((i + 1) % mx, j), c), (((i + mx - 1) % mx, j), -c)]
            }
            Deriv::YNeumann | Deriv::YDirichlet => {
                let c = 1.0 / (2.0 * self.dy());
                let neumann = matches!(d, Deriv::YNeumann);
                let mut out = Vec::with_capacity(2);
                if j + 1 < my {
                    out.push(((i, j + 1), c));
                } else if neumann {
                    out.push(((i, j), c));
                }
                if j > 0 {
                    out.push(((i, j - 1), -c));
                } else if neumann {
                    out.push(((i, j), -c));
                }
                out
            }
        }
    }

    /// Assembles `Σ alpha ⊙ (w_left)(D w_right)` over row blocks.
    fn term(&self, blocks: &[(Var, f64, Var, Deriv, Var)]) -> BilinearTerm {
        let n = 3 * self.points();
        let mut alpha = vec![0.0; n];
        let mut left = Vec::new();
        let mut right = Vec::new();
        for &(row_var, a, left_var, d, right_var) in blocks {
            for j in 0..self.my() {
                for i in 0..self.mx() {
                    let row = self.index(row_var, i, j);
                    alpha[row] = a;
                    left.push((row, self.index(left_var, i, j), 1.0));
                    for ((pi, pj), w) in self.stencil(d, i, j) {
                        right.push((row, self.index(right_var, pi, pj), w));
                    }
                }
            }
        }
        BilinearTerm {
            alpha,
            left: CsrMatrix::from_triplets(n, n, &left),
            right: CsrMatrix::from_triplets(n, n, &right),
        }
    }

    /// `sign * f(y) * source` placed in the rows of `row_var`.
    fn coriolis_operator(&self, row_var: Var, source: Var, sign: f64) -> CsrMatrix {
        let n = 3 * self.points();
        let mut t = Vec::with_capacity(self.points());
        for j in 0..self.my() {
            let f = self.coriolis(self.y_at(j));
            for i in 0..self.mx() {
                t.push((self.index(row_var, i, j), self.index(source, i, j), sign * f));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    /// Right-hand side carrying the x-derivatives and `-f u` in the v rows.
    pub fn x_operator(&self) -> Result<QuadraticOperator> {
        use Deriv::X;
        use Var::*;
        QuadraticOperator::new(
            self.coriolis_operator(V, U, -1.0),
            vec![
                self.term(&[(U, -1.0, U, X, U), (V, -1.0, U, X, V), (Phi, -0.5, Phi, X, U)]),
                self.term(&[(U, -0.5, Phi, X, Phi), (Phi, -1.0, U, X, Phi)]),
            ],
        )
    }

    /// Right-hand side carrying the y-derivatives and `+f v` in the u rows.
    pub fn y_operator(&self) -> Result<QuadraticOperator> {
        use Deriv::{YDirichlet, YNeumann};
        use Var::*;
        QuadraticOperator::new(
            self.coriolis_operator(U, V, 1.0),
            vec![
                self.term(&[
                    (U, -1.0, V, YNeumann, U),
                    (V, -1.0, V, YDirichlet, V),
                    (Phi, -0.5, Phi, YDirichlet, V),
                ]),
                self.term(&[(V, -0.5, Phi, YNeumann, Phi), (Phi, -1.0, V, YNeumann, Phi)]),
            ],
        )
    }

    pub fn build(&self) -> Result<FullModel> {
        self.validate()?;
        let p = self.points();
        Ok(FullModel {
            id: "swe".into(),
            config_hash: crate::fnv1a64(format!("{self:?}").as_bytes()),
            dt: self.dt,
            n_t: self.n_t,
            theta: 0.5 * self.dt,
            stages: vec![
                Stage {
                    name: "x-stage",
                    operator: self.x_operator()?,
                },
                Stage {
                    name: "y-stage",
                    operator: self.y_operator()?,
                },
            ],
            x0: swe_initialize(self)?.to_vector(),
            newton: self.newton,
            variable_blocks: vec![0..p, p..2 * p, 2 * p..3 * p],
        })
    }
}

/// Height field from the channel initial condition with geostrophic winds.
pub fn swe_initialize(cfg: &SweConfig) -> Result<SweState> {
    cfg.validate()?;
    let (dx, dy) = (cfg.dx(), cfg.dy());
    let mut state = SweState {
        u: Vec::with_capacity(cfg.points()),
        v: Vec::with_capacity(cfg.points()),
        phi: Vec::with_capacity(cfg.points()),
    };
    for j in 0..cfg.my() {
        let y = cfg.y_at(j);
        let f = cfg.coriolis(y);
        if f == 0.0 {
            return Err(Error::Degenerate(format!(
                "Coriolis parameter vanishes at y = {y}; geostrophic winds are undefined"
            )));
        }
        for i in 0..cfg.mx() {
            let x = cfg.x_at(i);
            let h = cfg.initial_height(x, y);
            let h_y = (cfg.initial_height(x, y + dy) - cfg.initial_height(x, y - dy)) / (2.0 * dy);
            let h_x = (cfg.initial_height(x + dx, y) - cfg.initial_height(x - dx, y)) / (2.0 * dx);
            state.u.push(-cfg.g / f * h_y);
            state.v.push(cfg.g / f * h_x);
            state.phi.push(2.0 * (cfg.g * h).sqrt());
        }
    }
    Ok(state)
}

/// One ADI time step: x-stage then y-stage, each solved by Newton.
pub fn swe_step_adi(model: &FullModel, state: &SweState) -> Result<(SweState, [NewtonOutcome; 2])> {
    let outputs = model.step(&state.to_vector())?;
    if outputs.len() != 2 {
        return Err(Error::InvalidArgument("ADI step requires a two-stage model".into()));
    }
    for (s, (_, outcome)) in outputs.iter().enumerate() {
        if !outcome.converged {
            return Err(Error::NewtonFailure {
                step: 1,
                stage: model.stages[s].name.to_string(),
                iterations: outcome.iterations,
                residual: outcome.residual_norm,
            });
        }
    }
    let w = SweState::from_vector(&outputs[1].0);
    let mut it = outputs.into_iter().map(|(_, o)| o);
    Ok((w, [it.next().unwrap(), it.next().unwrap()]))
}
