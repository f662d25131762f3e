use num_complex::Complex64;
use thiserror::Error;

use crate::model::ValidationIssue;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameters: {}", join_issues(.0))]
    InvalidParams(Vec<ValidationIssue>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no convergence after {iterations} iterations (last iterate {last}, residual {residual:.3e})")]
    Convergence {
        iterations: usize,
        last: Complex64,
        residual: f64,
    },

    #[error("root escaped to the upper half-plane: {0}")]
    Instability(Complex64),

    #[error("quadrature did not converge: estimate {estimate:.6e}, error bound {error_bound:.3e}")]
    Quadrature { estimate: f64, error_bound: f64 },

    #[error("no power law in window: rms log residual {residual:.3e} exceeds {threshold:.3e}")]
    NoPowerLaw { residual: f64, threshold: f64 },

    #[error("soft-mode sweep failed at y = {y}: {source}")]
    Sweep { y: f64, source: Box<Error> },

    #[error("population failed at epsilon = {epsilon:.6e}: {source}")]
    Population { epsilon: f64, source: Box<Error> },
}

fn join_issues(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
