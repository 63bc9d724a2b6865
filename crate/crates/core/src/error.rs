use thiserror::Error;

/// Errors raised anywhere in the simulation and inference pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("numerical consistency violated: {0}")]
    NumericalConsistency(String),

    /// The Bessel-sum form of the grating coefficient needs a negative base
    /// raised to a half-integer power.
    #[error("talbot coefficient formula undefined for order {order}: base {base} with exponent {exponent}")]
    FormulaDomain { order: i64, base: f64, exponent: f64 },

    #[error("divergence is infinite: posterior has mass at node {node} where the prior vanishes")]
    InfiniteDivergence { node: usize },

    #[error("degenerate design objective: {0}")]
    DegenerateObjective(String),

    #[error(
        "could not bracket the exclusion strength: mass {mass_low:.4} at {strength_low:e}, {mass_high:.4} at {strength_high:e}"
    )]
    Bracketing {
        strength_low: f64,
        mass_low: f64,
        strength_high: f64,
        mass_high: f64,
    },

    #[error("value {value:e} outside range [{min:e}, {max:e}]")]
    Range { value: f64, min: f64, max: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_)
            | Error::InvalidMaterial(_)
            | Error::Parse(_)
            | Error::Range { .. }
            | Error::DegenerateObjective(_) => 2,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

pub(crate) fn numerical(msg: impl Into<String>) -> Error {
    Error::NumericalFailure(msg.into())
}
