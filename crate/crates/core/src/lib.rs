// Negated float comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod inversion;
pub mod matrix_special;
pub mod models;
pub mod numerics;
pub mod simulate;
pub mod suite;
pub mod symmat;

pub use error::{Error, Result};
