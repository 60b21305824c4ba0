use thiserror::Error;

/// Failures raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix asymmetry {residual:.3e} exceeds admission bound {bound:.3e}")]
    AsymmetryTooLarge { residual: f64, bound: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },

    #[error("empty matrix")]
    Empty,

    #[error("quadratic form has imaginary part {imag:.3e} above bound {bound:.3e}")]
    NonRealForm { imag: f64, bound: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    ConvergenceFailure { what: &'static str, iterations: usize },

    #[error("shift {re:+.6e}{im:+.6e}i is numerically in the spectrum")]
    SingularShift { re: f64, im: f64 },

    #[error("operator is not positive definite: {0}")]
    NotPositive(String),

    #[error("spectrum has negative eigenvalue {min:.6e}")]
    NegativeSpectrum { min: f64 },

    #[error("invalid contour bounds: c = {c}, norm = {norm}")]
    InvalidBounds { c: f64, norm: f64 },

    #[error("contour (center {center}, radius {radius}) leaves the right half-plane")]
    InvalidContour { center: f64, radius: f64 },

    #[error("node count {0} must be even and at least 4")]
    BadNodeCount(usize),

    #[error("quadrature did not converge within {max_nodes} nodes (last delta {last_delta:.3e})")]
    NoConvergence { max_nodes: usize, last_delta: f64 },

    #[error("{0} is outside the open right half-plane")]
    OutsideDomain(num_complex::Complex64),

    #[error("quadrature output anti-Hermitian residue {residue:.3e} exceeds {bound:.3e}")]
    AsymmetricResult { residue: f64, bound: f64 },

    #[error("property violated: {0}")]
    PropertyViolation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
