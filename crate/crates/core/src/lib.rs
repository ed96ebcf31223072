//! Numerical correction of almost-representations.
//!
//! Given unitary matrices that satisfy the relations of a group presentation
//! only approximately (measured in the normalized Hilbert–Schmidt norm), the
//! correctors in [`stabilize`] return nearby matrices satisfying them exactly,
//! for the two families of one-relator groups with nontrivial center. The
//! [`characters`] module holds the finite-dimensional trace constructions that
//! accompany the stability results.

pub mod characters;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod presentation;
pub mod projection;
pub mod stabilize;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use num_bigint::BigInt;
pub use num_complex::Complex64;
pub use num_rational::BigRational;
