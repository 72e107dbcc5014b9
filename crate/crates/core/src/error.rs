use thiserror::Error;

/// Errors raised by the gatekeeper laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid decision set index {0} (expected 1, 2 or 3)")]
    InvalidSetIndex(u8),

    #[error("invalid time scale {0} (expected 1 or 2)")]
    InvalidScale(u8),

    #[error("unknown decision: set {set_index}, position {position}, scale {scale}")]
    UnknownDecision {
        set_index: u8,
        position: u8,
        scale: u8,
    },

    #[error("parameter `{0}` is not identified by the supplied records")]
    Identification(&'static str),

    #[error("unstable queue: arrival rate {lambda} >= service rate {mu}")]
    UnstableSystem { lambda: f64, mu: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e})")]
    FixedPointDivergence { iterations: usize, residual: f64 },

    #[error(
        "incomplete decision set for subject {subject_id}, set {set_index}: {count} of 11 records"
    )]
    IncompleteSet {
        subject_id: u64,
        set_index: u8,
        count: usize,
    },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("duplicate record for subject {subject_id}, set {set_index}, position {position}")]
    DuplicateRecord {
        subject_id: u64,
        set_index: u8,
        position: u8,
    },

    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
