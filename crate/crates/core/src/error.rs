use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Domain,
    Numerical,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Usage => 2,
            ErrorCategory::Domain => 3,
            ErrorCategory::Numerical => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Usage => "usage",
            ErrorCategory::Domain => "domain",
            ErrorCategory::Numerical => "numerical",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{field} must be positive (got {value})")]
    NonPositive { field: &'static str, value: f64 },
    #[error("{field} must be nonnegative (got {value})")]
    Negative { field: &'static str, value: f64 },
    #[error("beta must be nonnegative (got {0})")]
    NegativeBeta(f64),
    #[error("basis size must be at least 2 (got {0})")]
    BasisTooSmall(usize),
    #[error("return coordinate {r} lies outside the well [-{half_width}, {half_width}]")]
    OutOfWell { r: f64, half_width: f64 },
    #[error("level {n} outside the allowed range {min}..={max}")]
    LevelOutOfRange { n: usize, min: usize, max: usize },
    #[error("grid needs at least {min} points (got {got})")]
    GridTooSmall { got: usize, min: usize },
    #[error("test state length {got} does not match grid size {expected}")]
    StateLength { got: usize, expected: usize },
    #[error("beta0 must be positive for the uncertainty boundary (got {0})")]
    NonPositiveBeta0(f64),
    #[error("no real boundary branch: dp^2 = {dp_sq} is below (1 + zeta) * beta0 = {floor}")]
    NoRealBranch { dp_sq: f64, floor: f64 },
    #[error("annual volatility must be nonnegative (got {0})")]
    NegativeVolatility(f64),
    #[error("volatility must be positive to define a mass (got {0})")]
    ZeroVolatility(f64),
    #[error("price series needs at least 2 prices (got {0})")]
    SeriesTooShort(usize),
    #[error("price at position {index} is not strictly positive ({value})")]
    NonPositivePrice { index: usize, value: f64 },
    #[error("limit fraction must lie in (0, 1) (got {0})")]
    InvalidLimitFraction(f64),
    #[error("invalid scan: {0}")]
    InvalidScan(String),
    #[error("invalid sampling: {0}")]
    InvalidSampling(String),
    #[error("quadrature did not reach tolerance {tolerance:e} on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64, tolerance: f64 },
    #[error("step control failed on [{t0}, {t1}]: error {error:e} with {substeps} substeps")]
    StepFailure {
        t0: f64,
        t1: f64,
        error: f64,
        substeps: usize,
    },
    #[error("norm drift {drift:e} exceeds {bound:e}")]
    UnitarityViolation { drift: f64, bound: f64 },
    #[error("line {line}: {message}")]
    Ingest { line: u64, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            InvalidScan(_) | InvalidSampling(_) | Config(_) | Json(_) | Io(_) | Ingest { .. }
            | Csv(_) => {
                ErrorCategory::Usage
            }
            QuadratureFailure { .. } | StepFailure { .. } | UnitarityViolation { .. } => {
                ErrorCategory::Numerical
            }
            _ => ErrorCategory::Domain,
        }
    }

    /// Variant name, stable across releases; used in machine-readable reports.
    pub fn kind(&self) -> &'static str {
        use Error::*;
        match self {
            NonPositive { .. } => "NonPositive",
            Negative { .. } => "Negative",
            NegativeBeta(_) => "NegativeBeta",
            BasisTooSmall(_) => "BasisTooSmall",
            OutOfWell { .. } => "OutOfWell",
            LevelOutOfRange { .. } => "LevelOutOfRange",
            GridTooSmall { .. } => "GridTooSmall",
            StateLength { .. } => "StateLength",
            NonPositiveBeta0(_) => "NonPositiveBeta0",
            NoRealBranch { .. } => "NoRealBranch",
            NegativeVolatility(_) => "NegativeVolatility",
            ZeroVolatility(_) => "ZeroVolatility",
            SeriesTooShort(_) => "SeriesTooShort",
            NonPositivePrice { .. } => "NonPositivePrice",
            InvalidLimitFraction(_) => "InvalidLimitFraction",
            InvalidScan(_) => "InvalidScan",
            InvalidSampling(_) => "InvalidSampling",
            QuadratureFailure { .. } => "QuadratureFailure",
            StepFailure { .. } => "StepFailure",
            UnitarityViolation { .. } => "UnitarityViolation",
            Ingest { .. } => "Ingest",
            Config(_) => "Config",
            Io(_) => "Io",
            Json(_) => "Json",
            Csv(_) => "Csv",
        }
    }
}
