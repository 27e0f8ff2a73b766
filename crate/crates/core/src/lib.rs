//! Normal-form calculus on the quantum disk (the Toeplitz algebra generated by
//! the unilateral shift `U` with `U*U = I`), its invariant and covariant
//! derivations, invariant states and GNS spaces, implementation operators, and
//! spectral diagnostics for the compact-parametrix question on truncations.

pub mod budget;
pub mod derivations;
pub mod linalg;
pub mod random;
pub mod error;
pub mod fourier_spectral;
pub mod implementations;
pub mod algebra;
pub mod sequences;
pub mod states;

pub use error::{Error, Result};
pub use sequences::CoefficientSequence;
