//! Shared fixtures for the criterion benches.

use jbk_core::functions::lookup;
use jbk_core::{OperatorParams, TestFunction};

pub fn params(n: f64, c: f64, beta: f64) -> OperatorParams {
    OperatorParams::new(n, c, beta).expect("bench parameters are valid")
}

pub fn function(name: &str) -> TestFunction {
    lookup(name).expect("registry function")
}

/// `count` points spread evenly over `[0, end]`.
pub fn grid(end: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| end * i as f64 / (count - 1) as f64)
        .collect()
}
