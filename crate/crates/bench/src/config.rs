//! Experiment configuration: flat `key=value` lines, `#` comments, dotted
//! keys and comma-separated lists.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use smdeim::models::{BurgersConfig, ModelConfig, NewtonSettings, SweConfig};
use smdeim::rom::Strategy;

/// Grid of one model: Burgers grid points, or SWE interior points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grid {
    Line(usize),
    Plane(usize, usize),
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Line(n) => write!(f, "{n}"),
            Self::Plane(x, y) => write!(f, "{x}x{y}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub burgers: Option<BurgersConfig>,
    pub swe: Option<SweConfig>,
    pub grids: Vec<Grid>,
    pub k: Vec<usize>,
    pub m: Vec<usize>,
    pub strategies: Vec<Strategy>,
    pub gamma: f64,
    pub h: f64,
    pub seeds: Vec<u64>,
    pub centered: bool,
    pub continue_on_failure: bool,
    /// Snapshot columns drawn per seed for the Jacobian error metrics.
    pub eval_columns: usize,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn model_id(&self) -> &'static str {
        if self.swe.is_some() {
            "swe"
        } else {
            "burgers"
        }
    }

    /// Model configuration at one grid.
    pub fn model_at(&self, grid: Grid) -> ModelConfig {
        match (grid, &self.burgers, &self.swe) {
            (Grid::Line(n), Some(b), _) => ModelConfig::Burgers(BurgersConfig { n, ..b.clone() }),
            (Grid::Plane(nx, ny), _, Some(s)) => ModelConfig::Swe(SweConfig { nx, ny, ..s.clone() }),
            _ => unreachable!("grids are validated against the model"),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        text.parse().with_context(|| format!("in config {}", path.display()))
    }
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| anyhow!("{key}: cannot parse {s:?}: {e}")))
        .collect()
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| anyhow!("{key}: cannot parse {value:?}: {e}"))
}

fn grid(key: &str, s: &str) -> Result<Grid> {
    match s.split_once('x') {
        Some((x, y)) => Ok(Grid::Plane(scalar(key, x.trim())?, scalar(key, y.trim())?)),
        None => Ok(Grid::Line(scalar(key, s)?)),
    }
}

impl FromStr for ExperimentConfig {
    type Err = anyhow::Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value, got {line:?}", line_no + 1))?;
            let key = key.trim();
            if pairs.iter().any(|(k, _): &(&str, &str)| *k == key) {
                bail!("line {}: duplicate key {key}", line_no + 1);
            }
            pairs.push((key, value.trim()));
        }
        let model = pairs
            .iter()
            .find(|(k, _)| *k == "model")
            .map(|(_, v)| *v)
            .ok_or_else(|| anyhow!("missing key: model"))?;
        let mut burgers = None;
        let mut swe = None;
        match model {
            "burgers" => burgers = Some(BurgersConfig::default()),
            "swe" => swe = Some(SweConfig::default()),
            other => bail!("model: expected burgers or swe, got {other:?}"),
        }
        let mut newton = NewtonSettings::default();
        let mut cfg = ExperimentConfig {
            burgers: None,
            swe: None,
            grids: Vec::new(),
            k: vec![20],
            m: vec![30],
            strategies: vec![Strategy::Smdeim],
            gamma: 1.0,
            h: smdeim::rom::DEFAULT_FD_STEP,
            seeds: vec![0],
            centered: false,
            continue_on_failure: true,
            eval_columns: 5,
            out: PathBuf::from("results"),
        };
        for &(key, value) in &pairs {
            match (key, burgers.as_mut(), swe.as_mut()) {
                ("model", _, _) => {}
                ("n", _, _) => cfg.grids = list::<String>(key, value)?.iter().map(|s| grid(key, s)).collect::<Result<_>>()?,
                ("k", _, _) => cfg.k = list(key, value)?,
                ("m", _, _) => cfg.m = list(key, value)?,
                ("strategies", _, _) => cfg.strategies = list(key, value)?,
                ("gamma", _, _) => cfg.gamma = scalar(key, value)?,
                ("h", _, _) => cfg.h = scalar(key, value)?,
                ("seeds", _, _) => cfg.seeds = list(key, value)?,
                ("centered", _, _) => cfg.centered = scalar(key, value)?,
                ("continue_on_failure", _, _) => cfg.continue_on_failure = scalar(key, value)?,
                ("eval.columns", _, _) => cfg.eval_columns = scalar(key, value)?,
                ("out", _, _) => cfg.out = PathBuf::from(value),
                ("newton.tol", _, _) => newton.tol = scalar(key, value)?,
                ("newton.max_iter", _, _) => newton.max_iter = scalar(key, value)?,
                ("burgers.length", Some(b), _) => b.length = scalar(key, value)?,
                ("burgers.mu", Some(b), _) => b.mu = scalar(key, value)?,
                ("burgers.t_final", Some(b), _) => b.t_final = scalar(key, value)?,
                ("burgers.n_t", Some(b), _) => b.n_t = scalar(key, value)?,
                ("burgers.ic", Some(b), _) => b.ic_coefficients = Some(list(key, value)?),
                ("swe.length", _, Some(s)) => s.length = scalar(key, value)?,
                ("swe.width", _, Some(s)) => s.width = scalar(key, value)?,
                ("swe.f_hat", _, Some(s)) => s.f_hat = scalar(key, value)?,
                ("swe.beta", _, Some(s)) => s.beta = scalar(key, value)?,
                ("swe.g", _, Some(s)) => s.g = scalar(key, value)?,
                ("swe.h0", _, Some(s)) => s.h0 = scalar(key, value)?,
                ("swe.h1", _, Some(s)) => s.h1 = scalar(key, value)?,
                ("swe.h2", _, Some(s)) => s.h2 = scalar(key, value)?,
                ("swe.dt", _, Some(s)) => s.dt = scalar(key, value)?,
                ("swe.n_t", _, Some(s)) => s.n_t = scalar(key, value)?,
                _ if key.starts_with("burgers.") || key.starts_with("swe.") => {
                    bail!("key {key} is unknown or does not apply to model {model}")
                }
                _ => bail!("unknown key: {key}"),
            }
        }
        if let Some(b) = burgers.as_mut() {
            b.newton = newton;
        }
        if let Some(s) = swe.as_mut() {
            s.newton = newton;
        }
        if cfg.grids.is_empty() {
            cfg.grids = vec![match (&burgers, &swe) {
                (Some(b), _) => Grid::Line(b.n),
                (_, Some(s)) => Grid::Plane(s.nx, s.ny),
                _ => unreachable!(),
            }];
        }
        cfg.burgers = burgers;
        cfg.swe = swe;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, empty) in [
            ("n", self.grids.is_empty()),
            ("k", self.k.is_empty()),
            ("m", self.m.is_empty()),
            ("strategies", self.strategies.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ] {
            if empty {
                bail!("{name}: list must not be empty");
            }
        }
        for g in &self.grids {
            match (g, self.swe.is_some()) {
                (Grid::Line(_), false) | (Grid::Plane(..), true) => {}
                _ => bail!("n: grid {g} does not fit model {}", self.model_id()),
            }
        }
        if self.k.contains(&0) || self.m.contains(&0) {
            bail!("k and m entries must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            bail!("gamma must lie in (0, 1], got {}", self.gamma);
        }
        if !(self.h > 0.0) {
            bail!("h must be positive, got {}", self.h);
        }
        if self.eval_columns == 0 {
            bail!("eval.columns must be positive");
        }
        Ok(())
    }
}
