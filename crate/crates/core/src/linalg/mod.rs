//! Dense complex linear algebra: matrices, reflectors, eigenvalues, Hermitian
//! eigen-decomposition, SVD and LU solves.

pub mod cmat;
pub mod eig;
pub mod eigh;
pub mod householder;
pub mod lu;
pub mod matrix;
pub mod svd;

pub use cmat::{parse_cmat, read_cmat, write_cmat, write_cmat_string};
pub use eig::{eigenvalues_complex, eigenvalues_only, schur_decomposition, SchurDecomposition, SpectrumResult};
pub use eigh::{eigh, eigvalsh, HermitianEigen};
pub use householder::HouseholderReflector;
pub use lu::{det, inverse, log_abs_det, solve_shifted, Lu};
pub use matrix::{dotc, norm2, normalize, ComplexMatrix, C64, I, ONE, ZERO};
pub use svd::{operator_norm, orthonormal_complement, singular_values, svd_via_hermitisation, Svd};
