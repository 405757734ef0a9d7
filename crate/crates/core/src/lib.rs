#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Sharp coefficient constants `C(k, p)` for the Hardy spaces `H^p`, `0 < p < 1`.

pub mod bounds;
pub mod candidates;
pub mod error;
pub mod exponent;
pub mod fejer_riesz;
pub mod hardy;
pub mod nelder_mead;
pub mod roots;
pub mod search;
pub mod series;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
