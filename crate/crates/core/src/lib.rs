//! Finite-dimensional machinery for maps `F = l + c` between Euclidean models
//! of Hilbert spaces: Clifford algebras with the positive sign convention,
//! sampled Bott elements and pullbacks, subspace distances and
//! asymptotic-unitarity diagnostics, constructive finite approximation of
//! metrically proper maps, and Brouwer degree with machine-checkable
//! certificates.
//!
//! The crate is `no_std` (with `alloc`); IO, CLI and file formats live in the
//! companion `bottdeg-cli` crate.

#![no_std]
#![warn(missing_docs)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod approx;
pub mod bott;
pub mod clifford;
pub mod degree;
pub mod euclid;
pub mod models;

pub use nalgebra;
pub use num_complex::Complex64;
