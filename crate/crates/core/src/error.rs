use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument {value} outside the trusted domain [0, {cap}]")]
    Domain { value: f64, cap: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid is not aligned with the unit lattice: {0}")]
    Alignment(String),

    #[error("condition failure: {0}")]
    ConditionFailure(String),

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error("lattice exceeds grid extent: {0}")]
    LatticeExtent(String),

    #[error("frequency {xi} outside the dual grid range (|xi| < {limit})")]
    FrequencyRange { xi: f64, limit: f64 },

    #[error("{0} of the associated-function nodes are cap-limited; increase P_max")]
    CapLimited(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed container: {0}")]
    Format(String),
}
