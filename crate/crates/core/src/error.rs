use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("gamma function pole at {0}")]
    GammaPole(String),
    #[error("matrix is singular (pivot {pivot:e} below threshold {threshold:e})")]
    SingularMatrix { pivot: f64, threshold: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid decimal number {0:?}")]
    Parse(String),
    #[error("invalid order p = {p} for {kernel}: {reason}")]
    InvalidOrder { kernel: String, p: u32, reason: &'static str },
    #[error("invalid multi-index ({a}, {b}) for {kernel}")]
    InvalidIndex { kernel: String, a: u32, b: u32 },
    #[error("singularity exponent alpha = {0} outside (0, 2)")]
    InvalidAlpha(String),
    #[error("kernel evaluated at the origin")]
    Origin,
    #[error("regularizer exponent k = {0} must be an even integer >= 2")]
    InvalidRegularizer(u32),
    #[error("non-positive gamma argument {0} in moment integral")]
    MomentDomain(String),
    #[error("mesh size must be a power of two 2^-m, got {0}")]
    InvalidMesh(String),
    #[error("truncation radius {radius} is smaller than the integrand support {support}")]
    TruncatedSupport { radius: f64, support: f64 },
    #[error("richardson extrapolation: {0}")]
    Richardson(String),
    #[error("table mismatch: {0}")]
    TableMismatch(String),
    #[error("integrand {0} has no extended-precision evaluation")]
    NoExtendedEval(String),
    #[error("no convergence after {subdivisions} subdivisions (best estimate {estimate}, error {error:e})")]
    NoConvergence { subdivisions: usize, estimate: String, error: f64 },
    #[error("unknown integrand {0:?}")]
    UnknownIntegrand(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
