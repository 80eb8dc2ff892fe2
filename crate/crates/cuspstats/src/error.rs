use thiserror::Error;

/// Crate-wide error type.
///
/// The CLI maps these onto exit codes: domain errors exit 1, precision
/// errors exit 2, usage errors exit 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("solver did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("boundary evaluation failed at E = {energy} (smallest eta reached {eta_min:.3e}): {message}")]
    BoundaryEvaluation {
        energy: f64,
        eta_min: f64,
        message: String,
    },

    #[error("density grid failed: {0}")]
    Grid(String),

    #[error("singular saturated self-energy operator: {0}")]
    SingularF(String),

    #[error("ambiguous stability branch: overlap-selected |beta| = {overlap_beta:.3e}, min-modulus |beta| = {min_beta:.3e}")]
    AmbiguousBranch { overlap_beta: f64, min_beta: f64 },

    #[error("degenerate eigenvector normalization: |<b_left, b_right>| = {0:.3e}")]
    DegenerateNormalization(f64),

    #[error("ill-conditioned (1-F) system: estimated condition {0:.3e}")]
    SingularPsi(f64),

    #[error("classification failed at E = {0}: {1}")]
    Classification(f64, String),

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("invalid kernel/shape specification: {0}")]
    Spec(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature error estimate {estimate:.3e} exceeds tolerance {tolerance:.3e} (partial value {value:.6e})")]
    Precision {
        value: f64,
        estimate: f64,
        tolerance: f64,
    },

    #[error("near-singular kernel: estimated condition {0:.3e}")]
    NearSingularKernel(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code category. 1 = domain, 2 = precision, 3 = usage.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Precision { .. } => 2,
            Error::Usage(_) | Error::Config(_) => 3,
            _ => 1,
        }
    }
}
