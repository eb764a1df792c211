use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),

    #[error("unknown map `{0}`")]
    UnknownMap(String),

    #[error("invalid dimension {0}: must be at least {1}")]
    InvalidDimension(usize, usize),

    #[error("point has dimension {found}, domain expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty domain: no interior witness found (best defining value {best:.3e})")]
    EmptyDomain { best: f64 },

    #[error("point is not interior (defining value {rho:.3e})")]
    NotInterior { rho: f64 },

    #[error("point lies on the boundary (|defining value| = {rho:.3e})")]
    OnBoundary { rho: f64 },

    #[error("point is not on the boundary (defining value {rho:.3e})")]
    NotOnBoundary { rho: f64 },

    #[error("direction is not a unit vector (norm {norm})")]
    NonUnitDirection { norm: f64 },

    #[error("zero direction")]
    ZeroDirection,

    #[error("no sign change along ray: {0}")]
    Bracket(String),

    #[error("{what} did not converge (residual {residual:.3e})")]
    NoConvergence { what: String, residual: f64 },

    #[error("operation requires a convex domain, `{0}` is not flagged convex")]
    NotConvex(String),

    #[error("operation requires a Reinhardt domain in C^2, got `{0}`")]
    NotReinhardt(String),

    #[error("boundary data is not rotation invariant (defect {0:.3e})")]
    NonInvariantData(f64),

    #[error("certificate check failed: {0}")]
    Certificate(String),

    #[error("malformed modulus of continuity: {0}")]
    MalformedModulus(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
