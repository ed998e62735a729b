use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular matrix: pivot {pivot} has magnitude {magnitude:e}")]
    Singular { pivot: usize, magnitude: f64 },

    #[error("QR iteration stalled after {iterations} iterations with {found} of {n} eigenvalues deflated")]
    NoConvergence {
        iterations: usize,
        found: usize,
        n: usize,
        /// Eigenvalues deflated before the stall.
        partial: Vec<Complex64>,
    },

    #[error("matrix is not Hermitian: max |H - H*| = {0:e}")]
    NotHermitian(f64),

    #[error("degenerate eigenvalue: gap {gap:e} below {tol:e}")]
    Degenerate { gap: f64, tol: f64 },

    #[error("stability operator is near critical: |T1^-1| = {0:e}")]
    NearCritical(f64),

    #[error("no root with positive imaginary part")]
    NoRoot,

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("integral does not converge: {0}")]
    Divergence(String),

    #[error("effective sample size {ess:.1} is below {min}")]
    LowEss { ess: f64, min: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
