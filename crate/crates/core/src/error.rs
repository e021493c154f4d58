use thiserror::Error;

#[derive(Debug, Error)]
pub enum QhaError {
    #[error("invalid Fock spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("product dimension {dim} exceeds cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("rotation parameter is not unimodular: |θ| = {0}")]
    NotUnimodular(f64),

    #[error("rotation matrix is not diagonal (off-diagonal mass {0:e})")]
    NotDiagonal(f64),

    #[error("coherent-state tail {tail:e} at |z| = {radius} exceeds tolerance {tol:e}")]
    TailBound { radius: f64, tail: f64, tol: f64 },

    #[error("quadrature did not converge: refinement changed entries by {change:e} (tolerance {tol:e})")]
    QuadratureNonConvergence { change: f64, tol: f64 },

    #[error("operator is not banded: best bandwidths ({lower}, {upper}) leave residual {residual:e}")]
    NotBanded { lower: usize, upper: usize, residual: f64 },

    #[error("ill-conditioned: singular value {sigma:e} lies within a decade of the rank threshold {threshold:e}")]
    IllConditioned { sigma: f64, threshold: f64 },

    #[error("Berezin curve passes too close to zero (min |Ã| = {min_modulus:e}, residual {residual:e})")]
    CurveThroughZero { min_modulus: f64, residual: f64 },

    #[error("symbol does not decay at the grid boundary (boundary/peak = {0:e})")]
    BoundaryDecay(f64),

    #[error("extrapolation did not converge (spread {0:e})")]
    Extrapolation(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("no consistent convention found: {0}")]
    NoConsistentConvention(String),

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = QhaError> = std::result::Result<T, E>;
