use thiserror::Error;

use crate::schemes::SchemeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two points of different variants, dimensions or grid geometries.
    #[error("structural mismatch: {left} vs {right}")]
    Structural { left: String, right: String },

    #[error("weight {0} is outside [0, 1]")]
    WeightOutOfRange(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("scheme {0} has a dedicated step function")]
    Routing(SchemeId),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("control sequence {name} emitted {value} at n = {n}, outside [0, 1]")]
    ControlOutOfRange { name: &'static str, n: usize, value: f64 },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("conditions failed: {}", .0.join(", "))]
    ConditionsFailed(Vec<String>),
}
