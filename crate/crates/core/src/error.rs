use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph parameters: {0}")]
    InvalidSpec(String),

    #[error("argument out of range: {0}")]
    Domain(String),

    #[error("dense operator of dimension {dim} exceeds the cap of {cap}")]
    SizeCap { dim: u128, cap: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("root {index} at {root} is within {margin:e} of the pole {pole}")]
    PoleProximity {
        index: usize,
        root: String,
        pole: String,
        margin: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
