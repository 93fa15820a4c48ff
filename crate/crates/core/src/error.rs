use thiserror::Error;

/// Errors produced anywhere in the encode/decode/simulate stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("unsupported sequence length {len}: not a perfect square d^2 and not d^(2h+1) with h >= 1")]
    UnsupportedLength { len: usize },

    #[error(
        "infeasible power allocation: block {block} needs {required:.6} per section ({:.6} for its {size} sections) but only {remaining:.6} remains",
        required * *size as f64
    )]
    InfeasibleAllocation {
        block: usize,
        size: usize,
        required: f64,
        remaining: f64,
    },

    #[error("AMP diverged at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("posterior not normalized: sums to {0}")]
    NotNormalized(f64),

    #[error("operator too large for dense storage: {entries} entries exceeds cap {cap}")]
    TooLarge { entries: usize, cap: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::Dimension { what, expected, actual });
    }
    Ok(())
}
