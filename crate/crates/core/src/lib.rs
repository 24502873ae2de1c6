//! Time evolution of matrix-product states with interchangeable two-site
//! truncation schemes.
//!
//! The crate is layered bottom-up:
//!
//! - [`linalg`]: a dense row-major complex tensor plus the QR, LQ, SVD,
//!   Hermitian eigen and matrix-exponential kernels the schemes are built from.
//! - [`mps`]: uniform (infinite, unit-cell) and finite matrix-product states in
//!   right-isometric form, gauge checks and observables.
//! - [`tebd`]: Trotter gates and the SVD, EIG, QR and QR with controlled bond
//!   expansion updates, together with the even/odd sweep driver.
//! - [`clock`]: the `d`-state quantum clock chain and an exact-diagonalization
//!   reference used for verification.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clock;
pub mod error;
pub mod linalg;
pub mod mps;
pub mod random;
pub mod tebd;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use linalg::{ComplexTensor, C64};
