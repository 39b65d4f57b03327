use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("lag {lag} is not below the number of periods {periods}")]
    InvalidLag { lag: usize, periods: usize },

    #[error("series too short: need at least {needed} observations, got {got}")]
    InsufficientLength { needed: usize, got: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("{what} did not converge within {iterations} iterations")]
    Convergence { what: &'static str, iterations: usize },

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("rank {rank} is not valid for dimension {dim}")]
    Rank { rank: usize, dim: usize },

    #[error("rank budget exceeded: r1 + r2 = {total} must be below P = {dim}")]
    RankBudget { total: usize, dim: usize },

    #[error("degenerate spectrum: leading eigenvalue is zero")]
    DegenerateSpectrum,

    #[error("invalid R = {r_max}: need R >= 1 and R + 1 <= {available} eigenvalues")]
    InvalidR { r_max: usize, available: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid lag set: {0}")]
    InvalidLagSet(String),

    #[error("invalid ARIMA order ({p},{d},{q}): {reason}")]
    InvalidOrder {
        p: usize,
        d: usize,
        q: usize,
        reason: &'static str,
    },

    #[error("ARIMA fit failed for factor {index}: {source}")]
    FactorModel {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no ARIMA model in the grid could be fitted")]
    Selection,

    #[error("invalid horizon {0}; must be at least 1")]
    InvalidHorizon(usize),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),

    #[error("mortality surface does not cover {0}")]
    Coverage(String),

    #[error("death rate {value} at age {age}, year {year} exceeds 1")]
    RateAboveOne { age: usize, year: i64, value: f64 },

    #[error("invalid mortality surface: {0}")]
    InvalidSurface(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("preprocessing: {0}")]
    Preprocess(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by numerics rather than by inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Convergence { .. }
            | Error::DegenerateSpectrum
            | Error::NonFinite(_)
            | Error::Selection => true,
            Error::FactorModel { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
