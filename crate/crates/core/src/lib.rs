// NaN-rejecting checks are written as `!(x > y)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod biortho;
pub mod error;
pub mod fidelity;
pub mod hunt;
pub mod io;
pub mod linalg;
pub mod metric;
pub mod models;
pub mod verify;

pub use error::{Error, Result};
