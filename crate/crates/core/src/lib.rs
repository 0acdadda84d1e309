//! Numerical toolkit for complete conformally flat metrics of constant scalar
//! curvature `n(n-1)` on punctured balls.
//!
//! * [`fowler`] integrates the cylinder ODE and produces Fowler solutions.
//! * [`conformal`] evaluates conformal factors, curvature residuals and mean
//!   curvature of round spheres.
//! * [`kelvin`] implements sphere inversions and the Kelvin transform.
//! * [`moving_planes`] computes reflection differences, the critical height
//!   and far-field fits.
//! * [`convexity`] builds Fowler-based instances and scans interior balls for
//!   convexity.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod conformal;
pub mod convexity;
pub mod dimension;
pub mod error;
pub mod export;
pub mod fixtures;
pub mod fowler;
pub mod geometry;
pub mod kelvin;
pub mod moving_planes;
pub mod sampling;

pub use dimension::Dimension;
pub use error::{Error, Result};
