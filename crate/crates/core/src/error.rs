use thiserror::Error;

/// Errors raised by the numerical kernels, model evaluators and the reduced solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("singular matrix: pivot {index} has magnitude {magnitude:e}")]
    Singular { index: usize, magnitude: f64 },

    #[error("SVD failed to converge for column block {first}..{last}")]
    SvdNoConvergence { first: usize, last: usize },

    #[error("thin SVD requires rows >= cols, got {rows}x{cols}")]
    WideMatrix { rows: usize, cols: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("input basis is rank deficient at column {column} (residual norm {residual:e})")]
    RankDeficient { column: usize, residual: f64 },

    #[error("requested {requested} interpolation indexes but the snapshot rank is {rank}")]
    RankExceeded { requested: usize, rank: usize },

    #[error("matrix entry ({row}, {col}) lies outside the sparsity pattern")]
    PatternViolation { row: usize, col: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dense matrix reference needs n <= {limit}, got n = {n}; the n^2-row snapshot matrix is too large to materialize")]
    MemoryGuard { n: usize, limit: usize },

    #[error("Newton iteration failed at step {step} ({stage}): residual norm {residual:e} after {iterations} iterations")]
    NewtonFailure {
        step: usize,
        stage: String,
        iterations: usize,
        residual: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("missing payload for strategy {strategy}: {what}")]
    MissingPayload { strategy: &'static str, what: &'static str },

    #[error("malformed artifact: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
