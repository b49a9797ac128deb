use thiserror::Error;

/// Errors raised across the crate. Variants follow the failure modes of the
/// individual operations (resolution, domains, smallness thresholds, ...).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("smallness threshold violated: {0}")]
    Threshold(String),
    #[error("inversion failed: {0}")]
    Inversion(String),
    #[error("trajectory escaped the domain: {0}")]
    Escape(String),
    #[error("section and map are not compatible: {0}")]
    Incompatible(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("degree out of range: {0}")]
    Degree(String),
    #[error("not a fixed point: {0}")]
    NotAFixedPoint(String),
    #[error("form is not closed: {0}")]
    NotClosed(String),
    #[error("input outside the admissible neighborhood: {0}")]
    Neighborhood(String),
    /// Carries the CSV ledger of the run up to the failure.
    #[error("iteration diverged: {message}")]
    Divergence { message: String, ledger: String },
    #[error("degenerate spectrum: {0}")]
    Degenerate(String),
    #[error("type arity mismatch: {0}")]
    Type(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("H^2 does not vanish (dim H^2 = {betti})")]
    NonVanishingH2 { betti: usize },
    #[error("inadmissible schedule: {0}")]
    Schedule(String),
    #[error("step rejected: {0}")]
    Step(String),
    #[error("parse: {0}")]
    Parse(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
