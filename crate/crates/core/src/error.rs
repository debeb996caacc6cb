use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("enumeration cap exceeded: {what} needs {needed} items, cap is {cap}")]
    CapExceeded { what: String, needed: f64, cap: u64 },

    #[error("entropy unavailable for {0} measures")]
    EntropyUnavailable(&'static str),

    #[error("invalid measure: field `{field}`: {reason}")]
    InvalidMeasure { field: String, reason: String },

    #[error("reducible transition matrix: states {unreachable:?} are not mutually reachable with state 0")]
    Reducible { unreachable: Vec<usize> },

    #[error("variant mismatch: {0}")]
    VariantMismatch(String),

    #[error("degenerate measure: {0}")]
    Degenerate(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used in CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::AlphabetMismatch(_) => "alphabet_mismatch",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::CapExceeded { .. } => "cap_exceeded",
            Error::EntropyUnavailable(_) => "entropy_unavailable",
            Error::InvalidMeasure { .. } => "invalid_measure",
            Error::Reducible { .. } => "reducible",
            Error::VariantMismatch(_) => "variant_mismatch",
            Error::Degenerate(_) => "degenerate",
            Error::Invariant(_) => "invariant",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidMeasure {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
