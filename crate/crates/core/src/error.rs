use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not antisymmetric (max |Q + Q^T| = {defect:.3e})")]
    NotAntisymmetric { defect: f64 },

    #[error("generator is not admissible: smallest eigenvalue of I + Q^2 is {min_eigenvalue:.3e}")]
    Inadmissible { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point is not on the unit sphere (|x| = {norm})")]
    NotOnSphere { norm: f64 },

    #[error("vector is not tangent at its base point (<x, y> = {dot:.3e})")]
    NotTangent { dot: f64 },

    #[error("degenerate gradient (|du|_h = {norm:.3e}) at a critical or focal point")]
    DegenerateGradient { norm: f64 },

    #[error("value {value} lies outside [-1, 1]")]
    OutOfRange { value: f64 },

    #[error("root is not bracketed on [{lo}, {hi}] (f = {flo:.3e}, {fhi:.3e})")]
    NotBracketed { lo: f64, hi: f64, flo: f64, fhi: f64 },

    #[error("quadrature did not converge (estimated error {estimate:.3e})")]
    Quadrature { estimate: f64 },

    #[error("level sampling failed: accepted {accepted} of {draws} draws")]
    SamplingFailed { accepted: usize, draws: usize },

    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
