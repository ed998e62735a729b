//! Numerical toolkit for local eigenvalue statistics of `A + √t·B` with `B` complex
//! Ginibre: Hermitised resolvent diagnostics, the 2x2 deterministic equivalents, partial
//! Schur chains, contour-integral identities and a Monte Carlo universality lab.

pub mod error;
pub mod generator;
pub mod integrals;
pub mod lab;
pub mod linalg;
pub mod quadrature;
pub mod resolvent;
pub mod rng;
pub mod schur;
pub mod selfconsistent;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
