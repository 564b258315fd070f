//! Jain, modified Jain-Baskakov and King-type Jain-Baskakov operators.
//!
//! The crate evaluates the three operator families numerically
//! ([`operators`]), provides closed-form raw and central moments to check them
//! against ([`moments`]), and measures error bounds and Voronovskaja-type
//! asymptotics empirically ([`analysis`]).

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod functions;
pub mod kernels;
pub mod moments;
pub mod operators;
pub mod params;
pub mod special;

pub use error::{Error, Result};
pub use functions::TestFunction;
pub use operators::{EvalResult, Evaluator, OperatorKind};
pub use params::{EvalConfig, OperatorParams};
