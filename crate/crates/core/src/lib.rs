#![no_std]
// `!(x > 0.0)` guards deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod driver;
pub mod error;
pub mod expander;
pub mod flow;
pub mod functionals;
pub mod geometry;
pub mod math;
pub mod profiles;
pub mod scenarios;
pub mod stencil;

pub use error::{Error, Result};
