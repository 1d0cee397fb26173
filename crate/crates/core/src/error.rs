use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is rank deficient (rank {rank} < {needed})")]
    RankDeficient { rank: usize, needed: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("enumeration of {count} vectors exceeds the cap of {cap}; {hint}")]
    CapExceeded { count: u128, cap: u128, hint: String },

    #[error("unknown code '{name}'; valid names: {valid}")]
    UnknownCode { name: String, valid: String },

    #[error("multiplexing gain {r} exceeds the code rate {rate}: a rate-p scheme cannot carry r > p (capacity ceiling p log SNR)")]
    RateTooHigh { r: f64, rate: f64 },

    #[error("not enough usable points for a slope estimate: have {have}, need {need}")]
    InsufficientData { have: usize, need: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("serialization: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
