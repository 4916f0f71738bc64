//! High-order corrected trapezoidal rules for the weakly singular integrals
//! `∫ φ(x) x_i x_j / |x|^(2+α) dx` in two dimensions.

pub mod cli;
pub mod coeffmat;
pub mod convergence;
pub mod error;
pub mod kernels;
pub mod quadrature;
pub mod refint;
pub mod stencil;
pub mod weightgen;
pub mod xprec;

pub use error::{Error, Result};
