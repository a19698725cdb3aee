use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KerrError {
    #[error("direction vector must have unit length (|omega| = {norm})")]
    NonUnitDirection { norm: f64 },

    #[error("invalid material parameter {name} = {value}")]
    InvalidMaterial { name: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A root-find that is guaranteed to have a solution failed to converge.
    /// This indicates a numerics bug, not bad input data.
    #[error("{what}: root-find did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("states violate the Rankine-Hugoniot relations (relative residual {residual:e})")]
    NotRankineHugoniot { residual: f64 },

    #[error("non-finite value in cell {cell} at t = {time:e} s")]
    BlowUp { cell: usize, time: f64 },

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for KerrError {
    fn from(e: std::io::Error) -> Self {
        KerrError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, KerrError>;
