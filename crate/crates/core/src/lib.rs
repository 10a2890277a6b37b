//! Numerical laboratory for Fourier multipliers on Hardy spaces.
//!
//! Functions on `R^n` (`n` = 1 or 2) are discretized on periodic grids with a
//! continuum-normalized discrete Fourier transform. On top of that the crate
//! provides decreasing rearrangements and Lorentz quasi-norms, the
//! inhomogeneous fractional Laplacian and Bessel potentials, a smooth
//! Littlewood-Paley partition, Hardy-space quasi-norms with `L^inf` atoms,
//! the `sigma^(t,gamma)` counterexample family with its bound integrals, and
//! randomized checkers for the Lorentz-space inequalities used along the way.

// `!(x > 0.0)` is the NaN-rejecting form used for every precondition.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod counterexample;
pub mod error;
pub mod grid;
pub mod hardy;
pub mod inequality;
pub mod littlewood_paley;
pub mod quadrature;
pub mod random;
pub mod rearrangement;
pub mod symbol;

pub use error::{LabError, Result};
pub use grid::{Field, GridSpec, SpectralField};
pub use num_complex::Complex64;
