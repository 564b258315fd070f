//! Evaluation of the Jain operator `P_n^β`, the modified Jain-Baskakov operator
//! `D_{n,c}^β` and its King-type variant `D*_{n,c}^β`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::RwLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::TestFunction;
use crate::kernels::{self, sum_basis_series};
use crate::params::{EvalConfig, OperatorParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    Jain,
    JainBaskakov,
    #[serde(rename = "king")]
    KingJainBaskakov,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 3] = [
        OperatorKind::Jain,
        OperatorKind::JainBaskakov,
        OperatorKind::KingJainBaskakov,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            OperatorKind::Jain => "jain",
            OperatorKind::JainBaskakov => "jain-baskakov",
            OperatorKind::KingJainBaskakov => "king",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OperatorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::Domain(format!(
                    "unknown operator `{s}` (jain, jain-baskakov, king)"
                ))
            })
    }
}

/// Value of an operator at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub x: f64,
    pub value: f64,
    pub v_terms_used: u64,
    pub est_tail_bound: f64,
    pub quad_error_est: f64,
}

impl EvalResult {
    fn at_origin(f: &TestFunction) -> Self {
        EvalResult {
            x: 0.0,
            value: f.eval(0.0),
            v_terms_used: 1,
            est_tail_bound: 0.0,
            quad_error_est: 0.0,
        }
    }
}

/// `r_n(x) = (n - 2c)(1 - β) x / n`, the point at which the King-type operator
/// evaluates the basis.
pub fn king_transform(params: &OperatorParams, x: f64) -> Result<f64> {
    params.require(2, "King transform")?;
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Domain(format!(
            "evaluation point must be finite and >= 0, got {x}"
        )));
    }
    let (n, c) = (params.n(), params.c());
    Ok((n - 2.0 * c) * (1.0 - params.beta()) * x / n)
}

/// An operator bound to a parameter set and a test function.
///
/// The kernel integrals `∫ p_{n,v-1,c} f` do not depend on `x`, so they are
/// cached per `v` and shared by every point evaluated through this value.
/// The cache tolerates concurrent readers; a missing entry may be computed
/// twice by racing threads, which is harmless since the result is deterministic.
pub struct Evaluator {
    kind: OperatorKind,
    params: OperatorParams,
    f: TestFunction,
    cfg: EvalConfig,
    cache: RwLock<HashMap<u64, (f64, f64)>>,
}

impl fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Evaluator")
            .field("kind", &self.kind)
            .field("params", &self.params)
            .field("f", &self.f.name())
            .finish_non_exhaustive()
    }
}

impl Evaluator {
    pub fn new(
        kind: OperatorKind,
        params: OperatorParams,
        f: TestFunction,
        cfg: EvalConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        f.validate(&cfg)?;
        match kind {
            OperatorKind::Jain => {}
            OperatorKind::JainBaskakov => kernels::check_integrable(&params, &f)?,
            OperatorKind::KingJainBaskakov => {
                params.require(3, "King-type operator")?;
                kernels::check_integrable(&params, &f)?;
            }
        }
        Ok(Self {
            kind,
            params,
            f,
            cfg,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn params(&self) -> &OperatorParams {
        &self.params
    }

    pub fn function(&self) -> &TestFunction {
        &self.f
    }

    pub fn config(&self) -> &EvalConfig {
        &self.cfg
    }

    /// Number of cached kernel integrals.
    pub fn cached_terms(&self) -> usize {
        self.cache.read().map(|c| c.len()).unwrap_or(0)
    }

    fn kernel_term(&self, v: u64) -> Result<(f64, f64)> {
        if v == 0 {
            return Ok((self.f.eval(0.0), 0.0));
        }
        if let Some(&hit) = self.cache.read().expect("kernel cache poisoned").get(&v) {
            return Ok(hit);
        }
        let q = kernels::kernel_expectation(&self.params, v, &self.f, &self.cfg)?;
        let entry = (q.value, q.error);
        self.cache
            .write()
            .expect("kernel cache poisoned")
            .entry(v)
            .or_insert(entry);
        Ok(entry)
    }

    /// Bound on the normalised kernel mean of `|f|` for index `v`.
    fn kernel_growth(&self, v: u64) -> f64 {
        if let Some(s) = self.f.sup_bound() {
            return s;
        }
        let (n, c) = (self.params.n(), self.params.c());
        let d = self.f.growth_degree();
        // E[t^d] = v(v+1)…(v+d-1) / ((n-2c)…(n-(d+1)c))
        let mut moment = 1.0;
        for i in 0..d {
            moment *= (v as f64 + f64::from(i)) / (n - f64::from(i + 2) * c);
        }
        self.f.growth_const() * (1.0 + moment)
    }

    pub fn eval(&self, x: f64) -> Result<EvalResult> {
        if !(x.is_finite() && x >= 0.0) {
            return Err(Error::Domain(format!(
                "evaluation point must be finite and >= 0, got {x}"
            )));
        }
        if x == 0.0 {
            return Ok(EvalResult::at_origin(&self.f));
        }
        let n = self.params.n();
        let sum = match self.kind {
            OperatorKind::Jain => sum_basis_series(
                &self.params,
                x,
                &self.cfg,
                |v| Ok((self.f.eval(v as f64 / n), 0.0)),
                |v| self.f.growth_bound(v as f64 / n),
            )?,
            OperatorKind::JainBaskakov | OperatorKind::KingJainBaskakov => {
                let y = if self.kind == OperatorKind::KingJainBaskakov {
                    king_transform(&self.params, x)?
                } else {
                    x
                };
                if y == 0.0 {
                    return Ok(EvalResult {
                        x,
                        ..EvalResult::at_origin(&self.f)
                    });
                }
                sum_basis_series(
                    &self.params,
                    y,
                    &self.cfg,
                    |v| self.kernel_term(v),
                    |v| self.kernel_growth(v),
                )?
            }
        };
        Ok(EvalResult {
            x,
            value: sum.value,
            v_terms_used: sum.terms,
            est_tail_bound: sum.tail_bound,
            quad_error_est: sum.quad_error,
        })
    }

    /// Evaluates every point, in parallel. The first failing point (by index) is reported.
    pub fn eval_grid(&self, xs: &[f64]) -> Result<Vec<EvalResult>> {
        let results: Vec<Result<EvalResult>> = xs.par_iter().map(|&x| self.eval(x)).collect();
        results
            .into_iter()
            .enumerate()
            .map(|(index, r)| {
                r.map_err(|e| Error::AtPoint {
                    index,
                    x: xs[index],
                    source: Box::new(e),
                })
            })
            .collect()
    }
}

/// `P_n^β(f, x) = Σ_v ω_β(v, nx) f(v/n)`.
pub fn eval_jain(
    params: &OperatorParams,
    f: &TestFunction,
    x: f64,
    cfg: &EvalConfig,
) -> Result<EvalResult> {
    Evaluator::new(OperatorKind::Jain, *params, f.clone(), *cfg)?.eval(x)
}

/// `D_{n,c}^β(f, x) = (n-c)/c Σ_{v≥1} ω_β(v, nx) ∫ p_{n,v-1,c} f + e^{-nx} f(0)`.
pub fn eval_jain_baskakov(
    params: &OperatorParams,
    f: &TestFunction,
    x: f64,
    cfg: &EvalConfig,
) -> Result<EvalResult> {
    Evaluator::new(OperatorKind::JainBaskakov, *params, f.clone(), *cfg)?.eval(x)
}

/// `D*_{n,c}^β(f, x)`: the Jain-Baskakov operator with the basis evaluated at `r_n(x)`.
pub fn eval_king(
    params: &OperatorParams,
    f: &TestFunction,
    x: f64,
    cfg: &EvalConfig,
) -> Result<EvalResult> {
    Evaluator::new(OperatorKind::KingJainBaskakov, *params, f.clone(), *cfg)?.eval(x)
}

pub fn eval_grid(
    kind: OperatorKind,
    params: &OperatorParams,
    f: &TestFunction,
    xs: &[f64],
    cfg: &EvalConfig,
) -> Result<Vec<EvalResult>> {
    Evaluator::new(kind, *params, f.clone(), *cfg)?.eval_grid(xs)
}
