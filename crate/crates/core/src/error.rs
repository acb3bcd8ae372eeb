use thiserror::Error;

/// Errors produced by the library and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration value is outside its admissible range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// An objective evaluation produced a non-finite number.
    #[error("non-finite value encountered while evaluating {what}")]
    Evaluation { what: String },

    /// A first-order method was asked for a gradient the objective does not expose.
    #[error("objective does not provide a gradient")]
    GradientUnavailable,

    /// Advertised smoothness constants were violated on sampled points.
    #[error("smoothness constant {constant} violated: observed ratio {ratio:.6} exceeds tolerance")]
    Metadata { constant: String, ratio: f64 },

    /// An implicit inner solve failed to reach its tolerance.
    #[error("inner solver did not converge after {iterations} iterations (residual {residual:e})")]
    InnerSolver { iterations: usize, residual: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

pub(crate) fn check_finite(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Evaluation { what: what.to_string() })
    }
}
