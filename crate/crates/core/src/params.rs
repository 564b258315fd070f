use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest β accepted by [`OperatorParams::new`].
///
/// The raw-moment formulas carry factors up to `(1-β)^-7`, so values close to 1
/// amplify rounding badly. Use [`OperatorParams::with_beta_limit`] to move the guard.
pub const DEFAULT_BETA_LIMIT: f64 = 0.95;

/// The operator parameters `(n, c, β)`.
///
/// `n` is stored as a real number. Nothing in the evaluation needs it to be an
/// integer; the sweeps in [`crate::analysis`] use integral values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    n: f64,
    c: f64,
    beta: f64,
}

impl OperatorParams {
    pub fn new(n: f64, c: f64, beta: f64) -> Result<Self> {
        Self::with_beta_limit(n, c, beta, DEFAULT_BETA_LIMIT)
    }

    pub fn with_beta_limit(n: f64, c: f64, beta: f64, beta_limit: f64) -> Result<Self> {
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::domain(format!(
                "n must be positive and finite, got {n}"
            )));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::domain(format!(
                "c must be positive and finite, got {c}"
            )));
        }
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::domain(format!(
                "beta must lie in [0, 1), got {beta}"
            )));
        }
        if beta > beta_limit {
            return Err(Error::domain(format!(
                "beta = {beta} exceeds the configured limit {beta_limit}"
            )));
        }
        Ok(Self { n, c, beta })
    }

    #[inline]
    pub fn n(&self) -> f64 {
        self.n
    }

    #[inline]
    pub fn c(&self) -> f64 {
        self.c
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Same `(n, c)` with a different β, still subject to the default guard.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.n, self.c, beta)
    }

    /// `n > factor * c`
    pub fn exceeds(&self, factor: u32) -> bool {
        self.n > f64::from(factor) * self.c
    }

    /// Checks `n > factor * c`, naming the formula that needs it.
    pub fn require(&self, factor: u32, what: &'static str) -> Result<()> {
        if self.exceeds(factor) {
            Ok(())
        } else {
            Err(Error::Threshold {
                what,
                factor,
                n: self.n,
                c: self.c,
            })
        }
    }
}

/// Numerical tolerances shared by the evaluators and the analysis harness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    /// Basis mass left unaccounted when the v-series stops.
    pub tail_eps: f64,
    /// Relative tolerance for each kernel integral.
    pub quad_rel_tol: f64,
    /// Largest Gauss rule (or Kronrod panel count) tried before giving up.
    pub quad_max_nodes: usize,
    /// Samples used for moduli of continuity and grid suprema.
    pub grid_points: usize,
    /// Right end of the window standing in for `[0, ∞)`.
    pub domain_cap: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            tail_eps: 1e-13,
            quad_rel_tol: 1e-12,
            quad_max_nodes: 256,
            grid_points: 401,
            domain_cap: 20.0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tail_eps > 0.0 && self.tail_eps < 1.0) {
            return Err(Error::domain(format!(
                "tail_eps must lie in (0, 1), got {}",
                self.tail_eps
            )));
        }
        if !(self.quad_rel_tol > 0.0) {
            return Err(Error::domain("quad_rel_tol must be positive"));
        }
        if self.quad_max_nodes < 2 {
            return Err(Error::domain("quad_max_nodes must be at least 2"));
        }
        if self.grid_points < 2 {
            return Err(Error::domain("grid_points must be at least 2"));
        }
        if !(self.domain_cap > 0.0 && self.domain_cap.is_finite()) {
            return Err(Error::domain("domain_cap must be positive and finite"));
        }
        Ok(())
    }

    /// Tolerances tightened for a sweep at size `n`, where errors get multiplied by `n`.
    pub fn scaled_for_sweep(&self, n: f64) -> Self {
        Self {
            tail_eps: self.tail_eps / (n * n),
            quad_rel_tol: (self.quad_rel_tol / n).max(crate::kernels::quadrature::NOISE_FLOOR),
            ..*self
        }
    }
}
