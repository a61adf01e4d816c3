//! Darboux transformations for difference operators over a matrix-valued
//! lattice ring, the dressing chains they generate, and two worked
//! reductions: the nonabelian Hirota lattice system and the Nahm equations.
//!
//! The ring is realized as `dim x dim` complex matrices on a periodic
//! one-dimensional lattice, with the cyclic shift as the automorphism `T`.
//! Every identity is checked numerically against a dense eigendecomposition
//! of the flattened operator.

// `!(x <= tol)` is used on purpose so NaN defects fail.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bell;
pub mod chains;
pub mod cli;
pub mod darboux;
pub mod error;
pub mod hirota;
pub mod nahm;
pub mod ring;
pub mod rng;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use ring::{DifferenceOperator, RingContext, RingElement};

/// Dense complex matrix used for pointwise ring values.
pub type CMat = nalgebra::DMatrix<C64>;
