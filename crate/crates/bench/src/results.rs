//! Versioned `results.csv`: one row per experiment point, appended atomically.

use std::collections::HashSet;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub const SCHEMA: &str = "smdeim-results-v1";

pub const HEADER: [&str; 22] = [
    "schema",
    "command",
    "row_hash",
    "model",
    "grid",
    "strategy",
    "k",
    "reduced_dim",
    "m",
    "seed",
    "gamma",
    "h",
    "status",
    "jacobian_error",
    "reduced_jacobian_error",
    "sigma_error",
    "trajectory_error",
    "mean_iterations",
    "newton_failures",
    "offline_seconds",
    "online_seconds",
    "timestamp",
];

/// Metric values of one point; `None` prints as `NA`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    pub reduced_dim: Option<usize>,
    pub jacobian_error: Option<f64>,
    pub reduced_jacobian_error: Option<f64>,
    pub sigma_error: Option<f64>,
    pub trajectory_error: Option<f64>,
    pub mean_iterations: Option<f64>,
    pub newton_failures: Option<usize>,
    pub offline_seconds: Option<f64>,
    pub online_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub command: &'static str,
    pub row_hash: u64,
    pub model: String,
    pub grid: String,
    pub strategy: String,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub seed: Option<u64>,
    pub gamma: f64,
    pub h: Option<f64>,
    /// `ok`, or `failed: <reason>`.
    pub status: String,
    pub metrics: Metrics,
}

/// Float with 17 significant digits, enough to round-trip.
pub fn float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_else(|| "NA".into())
}

pub fn hash_hex(h: u64) -> String {
    format!("{h:016x}")
}

impl ResultRow {
    pub fn fields(&self, timestamp: u64) -> Vec<String> {
        let m = &self.metrics;
        vec![
            SCHEMA.into(),
            self.command.into(),
            hash_hex(self.row_hash),
            self.model.clone(),
            self.grid.clone(),
            self.strategy.clone(),
            opt(self.k, |v| v.to_string()),
            opt(m.reduced_dim, |v| v.to_string()),
            opt(self.m, |v| v.to_string()),
            opt(self.seed, |v| v.to_string()),
            float(self.gamma),
            opt(self.h, float),
            self.status.replace(['\n', '\r'], " "),
            opt(m.jacobian_error, float),
            opt(m.reduced_jacobian_error, float),
            opt(m.sigma_error, float),
            opt(m.trajectory_error, float),
            opt(m.mean_iterations, float),
            opt(m.newton_failures, |v| v.to_string()),
            opt(m.offline_seconds, float),
            opt(m.online_seconds, float),
            timestamp.to_string(),
        ]
    }
}

fn encode(record: &[String]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(record)?;
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Append-only results file.
pub struct ResultsFile {
    file: std::fs::File,
}

impl ResultsFile {
    /// Opens `path`, writing the header if the file is new, and returns the
    /// row hashes already present.
    pub fn open(path: &Path) -> Result<(Self, HashSet<String>)> {
        let mut done = HashSet::new();
        let exists = path.exists() && std::fs::metadata(path)?.len() > 0;
        if exists {
            let mut reader = csv::ReaderBuilder::new()
                .flexible(true)
                .from_path(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let header = reader.headers()?.clone();
            if header.iter().ne(HEADER.iter().copied()) {
                bail!("{} has a different schema; move it away or pick another --out", path.display());
            }
            for record in reader.records() {
                // a torn last line from an interrupted run is ignored
                let Ok(record) = record else { continue };
                if record.len() == HEADER.len() {
                    done.insert(record[2].to_string());
                }
            }
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("opening {}", path.display()))?;
        if !exists {
            let header: Vec<String> = HEADER.iter().map(|s| s.to_string()).collect();
            file.write_all(&encode(&header)?)?;
        }
        Ok((Self { file }, done))
    }

    /// Appends one row with a single write.
    pub fn append(&mut self, row: &ResultRow) -> Result<()> {
        let stamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        self.file.write_all(&encode(&row.fields(stamp))?)?;
        self.file.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ResultRow {
        ResultRow {
            command: "sweep",
            row_hash: 0xabc,
            model: "burgers".into(),
            grid: "51".into(),
            strategy: "smdeim".into(),
            k: Some(5),
            m: None,
            seed: Some(1),
            gamma: 1.0,
            h: None,
            status: "failed: a, b\nc".into(),
            metrics: Metrics {
                jacobian_error: Some(0.1),
                ..Metrics::default()
            },
        }
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2.5e-300, -7.0, 0.0, f64::MAX] {
            assert_eq!(float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn rows_quote_and_resume() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        let (mut file, done) = ResultsFile::open(&path).unwrap();
        assert!(done.is_empty());
        file.append(&row()).unwrap();
        drop(file);
        let (_, done) = ResultsFile::open(&path).unwrap();
        assert!(done.contains(&hash_hex(0xabc)));
        let fields = row().fields(0);
        assert_eq!(fields.len(), HEADER.len());
        assert_eq!(fields[8], "NA");
        assert_eq!(fields[12], "failed: a, b c");
    }

    #[test]
    fn foreign_schema_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(ResultsFile::open(&path).is_err());
    }
}
