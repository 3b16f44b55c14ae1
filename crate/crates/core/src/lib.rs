//! Hermite interpolation of functions from a parameter box into a Riemannian
//! manifold, from samples of the function and its partial derivatives.
//!
//! Two interpolants are provided: [`bhi`] (weighted Riemannian barycenters
//! with Hermite weight functions) and [`thi`] (Hermite interpolation in a
//! single tangent space). Scalar weight and coefficient functions are
//! gradient-enhanced Kriging models from [`gek`].

// `!(x < y)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bhi;
pub mod checks;
pub mod cli;
pub mod error;
pub mod gek;
pub mod harness;
pub mod manifold;
pub mod manifolds;
pub mod thi;
pub mod vecops;

pub use error::{Error, Result};
