//! Quadrirational Yang-Baxter maps with the independence property, the
//! generalized beta families they act on, and the transform calculus used to
//! characterize them.

// NaN has to fail every parameter check, hence the negated comparisons
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// reference constants keep the digits they were computed with
#![allow(clippy::excessive_precision)]

pub mod distributions;
pub mod error;
pub mod hde;
pub mod maps;
pub mod quadrature;
pub mod rng;
pub mod specfun;
pub mod statcheck;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
