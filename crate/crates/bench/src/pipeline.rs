//! The four commands over the experiment grid.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use smdeim::deim::{deim_interpolant, DeimInterpolant};
use smdeim::fnv1a64;
use smdeim::jacobian_approx::{build_mdeim_reference_with_guard, build_smdeim_stage, guard_from_env, MatrixInterpolant};
use smdeim::linalg::{economy_svd, DenseMatrix};
use smdeim::models::{full_solve, FullModel};
use smdeim::persist::{Artifact, ReducedPayload};
use smdeim::pod::{block_pod_basis, pod_basis, PodBasis};
use smdeim::rom::{reduce_model, rom_solve, ReducedModel, Strategy, StrategyInputs};
use smdeim::snapshots::SnapshotSet;

use crate::config::{ExperimentConfig, Grid};
use crate::metrics::{eval_columns, jacobian_metrics, trajectory_errors};
use crate::results::{float, hash_hex, Metrics, ResultRow, ResultsFile, HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Offline,
    Online,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Offline => "offline",
            Self::Online => "online",
            Self::Sweep => "sweep",
        }
    }
}

pub struct Options {
    pub out: PathBuf,
    pub jobs: usize,
}

/// Counts reported at the end of a command.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub written: usize,
    pub skipped: usize,
    pub failed: usize,
}

fn uses_m(s: Strategy) -> bool {
    matches!(s, Strategy::Deim | Strategy::MdeimReference | Strategy::Smdeim)
}

/// One reduced model of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq)]
struct BuildPoint {
    grid: usize,
    k: usize,
    m: Option<usize>,
    strategy: Strategy,
}

/// Full-order data of one grid.
struct GridData {
    grid: Grid,
    model: FullModel,
    snapshots: SnapshotSet,
    trajectory: DenseMatrix,
}

struct Built {
    basis: PodBasis,
    function_interpolant: Option<DeimInterpolant>,
    matrix_interpolants: Vec<MatrixInterpolant>,
    rm: ReducedModel,
}

pub struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    opts: &'a Options,
}

fn grid_label(cfg: &ExperimentConfig, g: Grid) -> String {
    format!("{}-{g}", cfg.model_id())
}

pub fn snapshot_file(cfg: &ExperimentConfig, out: &Path, g: Grid) -> PathBuf {
    out.join(format!("snapshots-{}.smdm", grid_label(cfg, g)))
}

fn m_label(m: Option<usize>) -> String {
    m.map(|m| m.to_string()).unwrap_or_else(|| "NA".into())
}

impl<'a> Runner<'a> {
    pub fn new(cfg: &'a ExperimentConfig, opts: &'a Options) -> Self {
        Self { cfg, opts }
    }

    fn build_points(&self) -> Vec<BuildPoint> {
        let mut points = Vec::new();
        for grid in 0..self.cfg.grids.len() {
            for &k in &self.cfg.k {
                for &strategy in &self.cfg.strategies {
                    let ms: Vec<Option<usize>> = if uses_m(strategy) {
                        self.cfg.m.iter().map(|&m| Some(m)).collect()
                    } else {
                        vec![None]
                    };
                    for m in ms {
                        let p = BuildPoint { grid, k, m, strategy };
                        if !points.contains(&p) {
                            points.push(p);
                        }
                    }
                }
            }
        }
        points
    }

    fn rom_file(&self, p: &BuildPoint) -> PathBuf {
        self.opts.out.join(format!(
            "rom-{}-{}-k{}-m{}.smdm",
            grid_label(self.cfg, self.cfg.grids[p.grid]),
            p.strategy,
            p.k,
            m_label(p.m)
        ))
    }

    fn h_of(&self, s: Strategy) -> Option<f64> {
        (s == Strategy::DirectionalDerivative).then_some(self.cfg.h)
    }

    fn model_key(&self, g: Grid) -> String {
        format!("{:?}", self.cfg.model_at(g))
    }

    /// Identity of a reduced model: model, basis and interpolant settings.
    fn build_key(&self, p: &BuildPoint) -> String {
        format!(
            "{}|k={}|m={}|strategy={}|gamma={}|centered={}|h={:?}",
            self.model_key(self.cfg.grids[p.grid]),
            p.k,
            m_label(p.m),
            p.strategy,
            float(self.cfg.gamma),
            self.cfg.centered,
            self.h_of(p.strategy).map(float)
        )
    }

    fn row_hash(&self, command: Command, body: &str, seed: Option<u64>) -> u64 {
        let key = format!(
            "{}|{body}|seed={seed:?}|eval={}|continue={}",
            command.name(),
            self.cfg.eval_columns,
            self.cfg.continue_on_failure
        );
        fnv1a64(key.as_bytes())
    }

    fn row(&self, command: Command, hash: u64, g: Grid, p: Option<&BuildPoint>, seed: Option<u64>) -> ResultRow {
        ResultRow {
            command: command.name(),
            row_hash: hash,
            model: self.cfg.model_id().into(),
            grid: g.to_string(),
            strategy: p.map(|p| p.strategy.to_string()).unwrap_or_else(|| "full".into()),
            k: p.map(|p| p.k),
            m: p.and_then(|p| p.m),
            seed,
            gamma: self.cfg.gamma,
            h: p.and_then(|p| self.h_of(p.strategy)),
            status: "ok".into(),
            metrics: Metrics::default(),
        }
    }

    fn prepare_out(&self) -> Result<()> {
        std::fs::create_dir_all(self.opts.out.join("plotdata"))
            .with_context(|| format!("creating {}", self.opts.out.display()))
    }

    fn write_plot(&self, name: &str, header: &str, body: String) -> Result<()> {
        let path = self.opts.out.join("plotdata").join(name);
        std::fs::write(&path, format!("{header}\n{body}")).with_context(|| format!("writing {}", path.display()))
    }

    fn write_spectra(&self, g: Grid, snap: &SnapshotSet) -> Result<()> {
        let mut series = vec![
            ("states".to_string(), economy_svd(&snap.states)?.singulars),
            ("nonlinear".to_string(), economy_svd(&snap.nonlinear)?.singulars),
        ];
        for (s, st) in snap.stages.iter().enumerate() {
            series.push((format!("jacobian_stage{s}"), economy_svd(&st.values)?.singulars));
        }
        let header = std::iter::once("index".to_string()).chain(series.iter().map(|s| s.0.clone())).collect::<Vec<_>>();
        let len = series.iter().map(|s| s.1.len()).max().unwrap_or(0);
        let mut body = String::new();
        for i in 0..len {
            let cells: Vec<String> = std::iter::once((i + 1).to_string())
                .chain(series.iter().map(|s| s.1.get(i).map(|&v| float(v)).unwrap_or_else(|| "NA".into())))
                .collect();
            writeln!(body, "{}", cells.join("\t"))?;
        }
        self.write_plot(&format!("{}-singular-values.tsv", grid_label(self.cfg, g)), &header.join("\t"), body)
    }

    /// Loads the snapshot artifact of `g` if it matches the configuration,
    /// otherwise runs the full model (when `compute` is set) and saves one.
    fn grid_data(&self, g: Grid, compute: bool) -> Result<GridData> {
        let model = self.cfg.model_at(g).build()?;
        let path = snapshot_file(self.cfg, &self.opts.out, g);
        let cached = if path.exists() {
            let art = Artifact::load(&path).with_context(|| format!("loading {}", path.display()))?;
            art.snapshots.filter(|s| s.config_hash == model.config_hash)
        } else {
            None
        };
        let snapshots = match cached {
            Some(s) => s,
            None if compute => {
                let run = full_solve(&model)?;
                Artifact::from_snapshots(run.snapshots.clone()).save(&path)?;
                self.write_spectra(g, &run.snapshots)?;
                run.snapshots
            }
            None if path.exists() => bail!(
                "snapshot artifact {} was built from a different model configuration; rerun `simulate`",
                path.display()
            ),
            None => bail!("missing snapshot artifact {}; run `simulate` or `offline` first", path.display()),
        };
        let trajectory = snapshots.time_levels(&model.x0)?;
        Ok(GridData {
            grid: g,
            model,
            snapshots,
            trajectory,
        })
    }

    fn build(&self, data: &GridData, p: &BuildPoint) -> Result<Built> {
        let started = Instant::now();
        let snap = &data.snapshots;
        let model = &data.model;
        let basis = if model.variable_blocks.len() > 1 {
            block_pod_basis(&snap.states, &model.variable_blocks, self.cfg.gamma, p.k, self.cfg.centered)?
        } else {
            pod_basis(&snap.states, self.cfg.gamma, p.k, self.cfg.centered)?
        };
        let m = p.m.unwrap_or(0);
        let mut inputs = StrategyInputs {
            h: self.h_of(p.strategy),
            ..StrategyInputs::default()
        };
        match p.strategy {
            Strategy::Deim => {
                inputs.function_interpolant = Some(deim_interpolant(&economy_svd(&snap.nonlinear)?.u, m)?);
            }
            Strategy::Smdeim => {
                inputs.matrix_interpolants =
                    snap.stages.iter().map(|s| build_smdeim_stage(s, m)).collect::<smdeim::Result<_>>()?;
            }
            Strategy::MdeimReference => {
                let guard = guard_from_env();
                inputs.matrix_interpolants = snap
                    .stages
                    .iter()
                    .map(|s| build_mdeim_reference_with_guard(s, m, guard))
                    .collect::<smdeim::Result<_>>()?;
            }
            _ => {}
        }
        let mut rm = reduce_model(model, basis.clone(), p.strategy, &inputs)?;
        rm.offline_seconds = started.elapsed().as_secs_f64();
        rm.continue_on_failure = self.cfg.continue_on_failure;
        Ok(Built {
            basis,
            function_interpolant: inputs.function_interpolant,
            matrix_interpolants: inputs.matrix_interpolants,
            rm,
        })
    }

    fn save_built(&self, data: &GridData, p: &BuildPoint, b: &Built) -> Result<()> {
        let art = Artifact {
            model_id: data.model.id.clone(),
            n: data.model.n(),
            dt: data.model.dt,
            snapshots: None,
            config_hash: Some(fnv1a64(self.build_key(p).as_bytes())),
            basis: Some(b.basis.clone()),
            function_interpolant: b.function_interpolant.clone(),
            matrix_interpolants: b.matrix_interpolants.clone(),
            reduced: Some(ReducedPayload {
                strategy: b.rm.strategy,
                basis: b.rm.basis.clone(),
                stages: b.rm.stages.clone(),
                offline_seconds: b.rm.offline_seconds,
            }),
        };
        art.save(&self.rom_file(p))?;
        Ok(())
    }

    fn load_built(&self, data: &GridData, p: &BuildPoint) -> Result<Built> {
        let path = self.rom_file(p);
        let art = Artifact::load(&path).with_context(|| format!("loading {}", path.display()))?;
        if art.config_hash != Some(fnv1a64(self.build_key(p).as_bytes())) {
            bail!("reduced-model artifact {} does not match the configuration; rerun `offline`", path.display());
        }
        let payload = art.reduced.ok_or_else(|| anyhow!("{} holds no reduced model", path.display()))?;
        let mut rm = ReducedModel::from_parts(&data.model, payload.basis, payload.strategy, payload.stages)?;
        rm.offline_seconds = payload.offline_seconds;
        rm.continue_on_failure = self.cfg.continue_on_failure;
        Ok(Built {
            basis: art.basis.ok_or_else(|| anyhow!("{} holds no basis", path.display()))?,
            function_interpolant: art.function_interpolant,
            matrix_interpolants: art.matrix_interpolants,
            rm,
        })
    }

    /// Online run of a reduced model plus all metrics for one seed.
    fn evaluate(&self, data: &GridData, b: &Built, seed: u64, label: &str) -> Result<Metrics> {
        let x0 = b.basis.project(&data.model.x0);
        let run = rom_solve(&b.rm, &x0, data.model.n_t)?;
        let (per_level, total) = trajectory_errors(&data.trajectory, &b.basis, &run);
        let cols = eval_columns(data.snapshots.columns(), self.cfg.eval_columns, seed);
        let jm = jacobian_metrics(
            &data.model,
            &b.rm,
            &b.basis,
            &data.snapshots.states,
            &cols,
            b.function_interpolant.as_ref(),
            &b.matrix_interpolants,
        )?;
        let mut body = String::new();
        for (i, it) in run.stats.iterations.iter().enumerate() {
            writeln!(body, "{}\t{it}", i + 1)?;
        }
        self.write_plot(&format!("{label}-iterations.tsv"), "solve\titerations", body)?;
        let mut body = String::new();
        for (t, e) in per_level.iter().enumerate() {
            writeln!(body, "{}\t{}", float(t as f64 * data.model.dt), float(*e))?;
        }
        self.write_plot(&format!("{label}-error.tsv"), "time\trelative_error", body)?;
        Ok(Metrics {
            reduced_dim: Some(b.basis.k),
            jacobian_error: jm.jacobian_error,
            reduced_jacobian_error: Some(jm.reduced_jacobian_error),
            sigma_error: jm.sigma_error,
            trajectory_error: Some(total),
            mean_iterations: Some(run.stats.mean_iterations()),
            newton_failures: Some(run.stats.failures.len()),
            offline_seconds: Some(b.rm.offline_seconds),
            online_seconds: Some(run.stats.online_seconds),
        })
    }

    pub fn run(&self, command: Command) -> Result<Summary> {
        self.prepare_out()?;
        let (file, done) = ResultsFile::open(&self.opts.out.join("results.csv"))?;
        let summary = match command {
            Command::Simulate => self.simulate(file, &done)?,
            _ => self.reduced(command, file, &done)?,
        };
        if matches!(command, Command::Online | Command::Sweep) {
            self.write_sweeps(command)?;
        }
        Ok(summary)
    }

    fn simulate(&self, mut file: ResultsFile, done: &HashSet<String>) -> Result<Summary> {
        let mut summary = Summary::default();
        for &g in &self.cfg.grids {
            let hash = self.row_hash(Command::Simulate, &self.model_key(g), None);
            if done.contains(&hash_hex(hash)) && snapshot_file(self.cfg, &self.opts.out, g).exists() {
                summary.skipped += 1;
                continue;
            }
            let mut row = self.row(Command::Simulate, hash, g, None, None);
            match self.cfg.model_at(g).build().and_then(|model| full_solve(&model)) {
                Ok(run) => {
                    Artifact::from_snapshots(run.snapshots.clone()).save(&snapshot_file(self.cfg, &self.opts.out, g))?;
                    self.write_spectra(g, &run.snapshots)?;
                    let mut body = String::new();
                    for (i, it) in run.stats.iterations.iter().enumerate() {
                        writeln!(body, "{}\t{it}", i + 1)?;
                    }
                    self.write_plot(&format!("{}-full-iterations.tsv", grid_label(self.cfg, g)), "solve\titerations", body)?;
                    row.metrics = Metrics {
                        reduced_dim: Some(run.snapshots.n()),
                        mean_iterations: Some(run.stats.mean_iterations()),
                        newton_failures: Some(run.stats.failures.len()),
                        online_seconds: Some(run.stats.online_seconds),
                        ..Metrics::default()
                    };
                }
                Err(e) => {
                    row.status = format!("failed: {e}");
                    summary.failed += 1;
                }
            }
            file.append(&row)?;
            summary.written += 1;
        }
        Ok(summary)
    }

    fn reduced(&self, command: Command, file: ResultsFile, done: &HashSet<String>) -> Result<Summary> {
        let points = self.build_points();
        let seeds: Vec<Option<u64>> = match command {
            Command::Offline => vec![None],
            _ => self.cfg.seeds.iter().map(|&s| Some(s)).collect(),
        };
        if command == Command::Online {
            for g in &self.cfg.grids {
                let path = snapshot_file(self.cfg, &self.opts.out, *g);
                if !path.exists() {
                    bail!("missing snapshot artifact {}; run `simulate` first", path.display());
                }
            }
            for p in &points {
                let path = self.rom_file(p);
                if !path.exists() {
                    bail!("missing reduced-model artifact {}; run `offline` first", path.display());
                }
            }
        }
        let data: Vec<GridData> = self
            .cfg
            .grids
            .iter()
            .map(|&g| self.grid_data(g, command != Command::Online))
            .collect::<Result<_>>()?;
        // one task per reduced model; each covers every seed
        let mut tasks = Vec::new();
        let mut skipped = 0;
        for p in &points {
            let body = self.build_key(p);
            let todo: Vec<(Option<u64>, u64)> = seeds
                .iter()
                .map(|&s| (s, self.row_hash(command, &body, s)))
                .filter(|(_, h)| {
                    let fresh = !done.contains(&hash_hex(*h))
                        || (command == Command::Offline && !self.rom_file(p).exists());
                    if !fresh {
                        skipped += 1;
                    }
                    fresh
                })
                .collect();
            if !todo.is_empty() {
                tasks.push((*p, todo));
            }
        }
        let sink = Mutex::new(OrderedSink {
            file,
            next: 0,
            pending: BTreeMap::new(),
            error: None,
        });
        let failed = Mutex::new(0usize);
        let next_task = Mutex::new(0usize);
        let jobs = self.opts.jobs.max(1).min(tasks.len().max(1));
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let i = {
                        let mut n = next_task.lock().unwrap();
                        let i = *n;
                        *n += 1;
                        i
                    };
                    let Some((p, todo)) = tasks.get(i) else { break };
                    let rows = self.run_task(command, &data[p.grid], p, todo);
                    *failed.lock().unwrap() += rows.iter().filter(|r| r.status != "ok").count();
                    sink.lock().unwrap().push(i, rows);
                });
            }
        });
        let sink = sink.into_inner().unwrap();
        if let Some(e) = sink.error {
            return Err(e);
        }
        Ok(Summary {
            written: tasks.iter().map(|t| t.1.len()).sum(),
            skipped,
            failed: failed.into_inner().unwrap(),
        })
    }

    fn run_task(&self, command: Command, data: &GridData, p: &BuildPoint, todo: &[(Option<u64>, u64)]) -> Vec<ResultRow> {
        let fail = |e: anyhow::Error| -> Vec<ResultRow> {
            todo.iter()
                .map(|&(seed, h)| {
                    let mut row = self.row(command, h, data.grid, Some(p), seed);
                    row.status = format!("failed: {e:#}");
                    row
                })
                .collect()
        };
        let built = match command {
            Command::Online => self.load_built(data, p),
            _ => self.build(data, p),
        };
        let built = match built {
            Ok(b) => b,
            Err(e) => return fail(e),
        };
        if command == Command::Offline {
            if let Err(e) = self.save_built(data, p, &built) {
                return fail(e);
            }
            let (seed, h) = todo[0];
            let mut row = self.row(command, h, data.grid, Some(p), seed);
            row.metrics = Metrics {
                reduced_dim: Some(built.basis.k),
                offline_seconds: Some(built.rm.offline_seconds),
                ..Metrics::default()
            };
            return vec![row];
        }
        todo.iter()
            .map(|&(seed, h)| {
                let mut row = self.row(command, h, data.grid, Some(p), seed);
                let seed = seed.unwrap_or(0);
                let label = format!(
                    "{}-{}-k{}-m{}-s{seed}",
                    grid_label(self.cfg, data.grid),
                    p.strategy,
                    p.k,
                    m_label(p.m)
                );
                match self.evaluate(data, &built, seed, &label) {
                    Ok(m) => row.metrics = m,
                    Err(e) => row.status = format!("failed: {e:#}"),
                }
                row
            })
            .collect()
    }

    /// Metric-versus-`m` series for every (grid, strategy, k, seed) of this
    /// command, read back from `results.csv` so resumed runs are included.
    fn write_sweeps(&self, command: Command) -> Result<()> {
        let path = self.opts.out.join("results.csv");
        let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(&path)?;
        let col = |name: &str| HEADER.iter().position(|h| *h == name).unwrap();
        let mut series: BTreeMap<(String, String, String, String), BTreeMap<usize, Vec<String>>> = BTreeMap::new();
        for record in reader.records() {
            let Ok(r) = record else { continue };
            if r.len() != HEADER.len()
                || &r[col("command")] != command.name()
                || &r[col("model")] != self.cfg.model_id()
                || &r[col("status")] != "ok"
            {
                continue;
            }
            let Ok(m) = r[col("m")].parse::<usize>() else { continue };
            let key = (
                r[col("grid")].to_string(),
                r[col("strategy")].to_string(),
                r[col("k")].to_string(),
                r[col("seed")].to_string(),
            );
            let values = ["jacobian_error", "reduced_jacobian_error", "sigma_error", "trajectory_error", "mean_iterations"]
                .iter()
                .map(|c| r[col(c)].to_string())
                .collect();
            series.entry(key).or_default().insert(m, values);
        }
        for ((grid, strategy, k, seed), rows) in series {
            let mut body = String::new();
            for (m, v) in rows {
                writeln!(body, "{m}\t{}", v.join("\t"))?;
            }
            self.write_plot(
                &format!("{}-{grid}-{strategy}-k{k}-s{seed}-vs-m.tsv", self.cfg.model_id()),
                "m\tjacobian_error\treduced_jacobian_error\tsigma_error\ttrajectory_error\tmean_iterations",
                body,
            )?;
        }
        Ok(())
    }
}

/// Writes task results in task order as they complete.
struct OrderedSink {
    file: ResultsFile,
    next: usize,
    pending: BTreeMap<usize, Vec<ResultRow>>,
    error: Option<anyhow::Error>,
}

impl OrderedSink {
    fn push(&mut self, i: usize, rows: Vec<ResultRow>) {
        self.pending.insert(i, rows);
        while let Some(rows) = self.pending.remove(&self.next) {
            for row in &rows {
                if self.error.is_none() {
                    if let Err(e) = self.file.append(row) {
                        self.error = Some(e);
                    }
                }
            }
            self.next += 1;
        }
    }
}
