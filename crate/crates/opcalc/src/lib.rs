//! Numerical functional calculus for sectorial matrices and a
//! generalized-diffusion solver built on it, with machinery to certify the
//! operator-theoretic estimates (sector angles, imaginary-power growth,
//! Fourier multiplier bounds) at finite-dimensional scale.

pub mod certify;
pub mod contour;
pub mod error;
pub mod grid;
pub mod matrix;
pub mod operators;
pub mod resolvent;

pub use error::{Error, Result};
