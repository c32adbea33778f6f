use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("variable x{index} at byte {pos} is outside x1..x{n}")]
    VariableOutOfRange { index: usize, n: usize, pos: usize },

    #[error("exponent or degree overflow at byte {pos}")]
    DegreeOverflow { pos: usize },

    #[error("dimension mismatch: expected {expected} variables, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("basis of size {size} exceeds the configured cap {cap}")]
    BasisTooLarge { size: u128, cap: usize },

    #[error("polynomial has odd degree {0}")]
    OddDegree(u32),

    #[error("polynomial has empty support")]
    EmptySupport,

    #[error("the zero polynomial cannot be relaxed")]
    ZeroPolynomial,

    #[error("relaxation order {d_hat} is below the minimum order {d}")]
    RelaxationOrderTooLow { d_hat: u32, d: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The relaxation cannot be built, e.g. an objective moment never appears
    /// in any PSD block.
    #[error("structurally infeasible relaxation: {0}")]
    Structure(String),

    #[error("integer program infeasible: {0}")]
    IpInfeasible(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("timed out after {0:.1} s")]
    Timeout(f64),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
