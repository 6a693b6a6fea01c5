//! Heat content of two-media transmission problems.
//!
//! Modules are layered bottom-up: `specfun` and `geometry` have no internal
//! dependencies, `green` builds kernels on `specfun`, `asymptotics` combines kernels
//! and boundary data into closed-form short-time laws, `solver` integrates the
//! full problem numerically, and `experiment` puts both side by side.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod green;
pub mod sausage;
pub mod series;
pub mod solver;
pub mod specfun;

pub use error::{Error, Result};
