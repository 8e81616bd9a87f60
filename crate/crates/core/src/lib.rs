// `!(x > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod formats;
pub mod models;
pub mod numerics;
pub mod planar;
pub mod rng;
pub mod samplers;
pub mod validation;

pub use error::{Error, Result};
