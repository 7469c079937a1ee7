use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
///
/// Variants are grouped by how a driver should react: `Invalid*`, `Parse`
/// and `Infeasible` are validation failures, while `Resolution`,
/// `NonConvergence` and `Ambiguous` are numerical guards.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point {x} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("vector length {got} does not match expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("sublevel set {{q^2 <= {delta}}} is disconnected on the grid; lower delta")]
    DisconnectedSublevel { delta: f64 },

    #[error("grid too coarse: n = {n} but at least {required} interior nodes are needed")]
    Resolution { n: usize, required: usize },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("ambiguous eigenvalue selection: {0}")]
    Ambiguous(String),

    #[error("dimension {dim} exceeds the dense solver cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("infeasible geometry: {0}")]
    Infeasible(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors that come from a numerical guard rather than bad input.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            Error::Resolution { .. } | Error::NonConvergence { .. } | Error::Ambiguous(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
