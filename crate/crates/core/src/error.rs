use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    Alphabet(String),
    #[error("invalid language: {0}")]
    Language(String),
    #[error("alphabet mismatch: {0} vs {1}")]
    AlphabetMismatch(String, String),
    #[error("regex syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("{what} cap exceeded: {count} > {cap}")]
    CapExceeded { what: &'static str, count: usize, cap: usize },
    #[error("language mismatch: expected {expected}, regex denotes {actual}")]
    LanguageMismatch { expected: String, actual: String },
    #[error("{0}")]
    Format(String),
    #[error("calibration failed: {0}")]
    Calibration(String),
}

impl Error {
    /// Whether the error came from a configured size or iteration limit.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
