use thiserror::Error;

/// Errors produced by game construction, oracle evaluation and estimation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShapleyError {
    #[error("player {player} out of range for a game with {n} players")]
    PlayerOutOfRange { player: usize, n: usize },

    #[error("player {0} is already a member of the coalition")]
    PlayerInCoalition(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("stratum size {size} out of range (0..={max})")]
    StratumOutOfRange { size: usize, max: usize },

    #[error(
        "{n} players exceeds the exact-computation cap of {cap}; use sampling estimation instead"
    )]
    TooManyPlayers { n: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}, field `{field}`: {message}")]
    Parse {
        line: u64,
        field: String,
        message: String,
    },

    #[error("line {line}, field `{field}`: {message}")]
    Validation {
        line: u64,
        field: String,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ShapleyError {
    fn from(e: std::io::Error) -> Self {
        ShapleyError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ShapleyError>;
