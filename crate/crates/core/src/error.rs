use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("n must be >= 3 (got {0})")]
    InvalidDimension(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("orbit left the half-plane v > 0 at t = {t} (v = {v})")]
    OrbitEscape { t: f64, v: f64 },

    #[error("degenerate orbit: epsilon = {epsilon} is the equilibrium value, no period")]
    DegenerateOrbit { epsilon: f64 },

    #[error("trajectory spans {span} in t but one period is {period}")]
    InsufficientSpan { span: f64, period: f64 },

    #[error("factor is not rotationally symmetric (relative mismatch {mismatch:e})")]
    NotRotationallySymmetric { mismatch: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("point coincides with the inversion center")]
    SingularPoint,

    #[error("ill-conditioned fit: {0}")]
    Conditioning(String),

    #[error("no height up to {ceiling} with w_lambda > 0 on the grid (min w = {min_w:e})")]
    NoStart { ceiling: f64, min_w: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
