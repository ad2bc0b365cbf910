//! Spectral calculus for differential operators with polynomial
//! coefficients on R^n, realized in a truncated tensor Hermite basis.
//!
//! The crate builds such operators symbolically (`operators`), assembles
//! and diagonalizes their truncated matrices (`hermite`, `spectral`), and
//! classifies the regularity of functions from the decay of their
//! eigen-coefficients against weight-sequence envelopes (`weights`,
//! `analysis`).
//!
//! The data-parallel kernels run on rayon when the default `parallel`
//! feature is enabled and fall back to identical sequential loops without
//! it; either way results are bitwise deterministic.

pub mod analysis;
pub mod error;
pub mod hermite;
pub mod mat;
pub mod operators;
mod par;
pub mod spectral;
pub mod weights;

pub use error::{Error, Result};
