#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codes;
pub mod error;
pub mod engine;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod pauli;
pub mod protocols;
pub mod runner;

pub use error::{Error, Result};
