use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rectangle: {0}")]
    InvalidRect(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// The rectangle is longer than the field allows.
    #[error("rectangle length {len} exceeds the admissible length cap {cap}")]
    LengthCap { len: f64, cap: f64 },

    #[error("point ({x}, {y}) lies outside the field domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("the field has no finite length cap; set one explicitly")]
    UnboundedLength,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
