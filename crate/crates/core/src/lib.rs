//! Variable-exponent Lebesgue and Besov quasi-norms on periodic grids.
// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod besov;
pub mod calderon;
pub mod error;
pub mod exponent;
pub mod grid;
pub mod harness;
pub mod lemmas;
pub mod modular_norms;

pub use error::{Error, Result};
