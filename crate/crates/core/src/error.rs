use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("grid of {entries} entries exceeds the cap of {cap}")]
    GridTooLarge { entries: u128, cap: usize },

    #[error("coordinate {value} out of range for p = {p}")]
    CoordinateOutOfRange { value: u64, p: u64 },

    #[error("index {index} out of range for a grid of {len} entries")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("operands live on different grids (p = {p_left}, n = {n_left} vs p = {p_right}, n = {n_right})")]
    GridMismatch {
        p_left: u64,
        n_left: usize,
        p_right: u64,
        n_right: usize,
    },

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("input function is identically zero")]
    ZeroInput,

    #[error("measure has empty support")]
    EmptySupport,

    #[error("measure carries no cube metadata")]
    MissingCubeMetadata,

    #[error("not enough primes in [{lo}, {hi}]: wanted {wanted}, found {found}")]
    NotEnoughPrimes {
        lo: u64,
        hi: u64,
        wanted: usize,
        found: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the CLI: 1 for configuration problems,
    /// 2 for invariant failures, 1 for everything else the user can fix.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
