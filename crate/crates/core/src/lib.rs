//! Functions of Hermitian positive-definite matrices through resolvent
//! contour quadrature, with the principal square root as the main use.
//!
//! `f(L) = −(1/2πi) ∮_Γ f(λ)(L − λI)⁻¹ dλ` is evaluated on a circle `Γ` in
//! the right half-plane that encloses the spectrum. The crate also carries
//! the tooling to check the structural facts around the square-root map:
//! convexity and openness of the positive cone, spectral inclusion under
//! perturbation and an explicit continuity modulus.

pub mod contour;
pub mod error;
pub mod matrix;
pub mod random;
pub mod spectral;
pub mod sqrt;
pub mod topology;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, HermitianOperator};
pub use num_complex::Complex64;
