use num_complex::Complex64;
use thiserror::Error;

/// Failures raised by the solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("reflection coefficient evaluated at a pole (omega = {omega})")]
    Pole { omega: Complex64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("pole at omega = {omega} is not simple")]
    HigherOrderPole { omega: f64 },

    #[error("branch {branch} lost at k = {k}")]
    BranchLost { branch: usize, k: f64 },

    #[error("target {target} outside attainable range [{lo}, {hi}]")]
    OutOfRange { target: f64, lo: f64, hi: f64 },

    #[error("contour passes too close to a zero or pole near {at}")]
    BoundaryTooClose { at: Complex64 },

    #[error(
        "mode certification failed at (kx = {kx}, ky = {ky}): found {found}, winding count {counted}"
    )]
    CertificationFailed {
        kx: f64,
        ky: f64,
        found: usize,
        counted: i64,
    },

    #[error(
        "instability support truncated by the grid: lambda = {lambda} at (kx = {kx}, ky = {ky})"
    )]
    SupportTruncation { kx: f64, ky: f64, lambda: f64 },

    #[error("iteration did not converge: residual {residual:e} exceeds {tolerance:e}")]
    NonConvergence { residual: f64, tolerance: f64 },

    #[error("time series saturated: 2*lambda*t = {exponent} exceeds 700")]
    Saturation { exponent: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Pole { .. } => "pole",
            Error::Degenerate(_) => "degenerate",
            Error::HigherOrderPole { .. } => "higher_order_pole",
            Error::BranchLost { .. } => "branch_lost",
            Error::OutOfRange { .. } => "out_of_range",
            Error::BoundaryTooClose { .. } => "boundary_too_close",
            Error::CertificationFailed { .. } => "certification_failed",
            Error::SupportTruncation { .. } => "support_truncation",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Saturation { .. } => "saturation",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_are_snake_case() {
        let e = Error::Saturation { exponent: 701.0 };
        assert_eq!(e.kind(), "saturation");
        assert!(e.to_string().contains("701"));
        assert_eq!(Error::InvalidInput("x".into()).kind(), "invalid_input");
    }
}
