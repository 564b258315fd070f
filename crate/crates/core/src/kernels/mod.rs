//! The Jain basis `ω_β(v, nx)`, the Baskakov-type kernel `p_{n,v-1,c}(t)` and
//! the integrals of test functions against that kernel.
//!
//! Everything is evaluated in log space. The Jain weight is written as
//! `ω_β(v, y) = (y / μ) · Poisson(v; μ)` with `μ = y + vβ`, so the large powers
//! and factorials never appear explicitly.

pub mod quadrature;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::TestFunction;
use crate::params::{EvalConfig, OperatorParams};
use crate::special::{ln_gamma, ln_poisson, CompensatedSum};

use quadrature::{adaptive_gk, beta_expectation, Quad};

/// Hard cap on the number of basis terms in one series.
pub const MAX_BASIS_TERMS: u64 = 1_000_000;

/// Panels allowed to the adaptive Kronrod fallback per unit of `quad_max_nodes`.
pub const ADAPTIVE_PANEL_FACTOR: usize = 16;

/// Below this the accumulated basis mass cannot be resolved in double precision.
pub const MASS_RESOLUTION: f64 = 1e-14;

const GAUSS_START_NODES: usize = 8;
// Larger Gauss rules only pay off for polynomial-like integrands; past this
// the adaptive Kronrod path is cheaper and more robust.
const GAUSS_MAX_NODES: usize = 64;

/// One Jain basis weight, stored both as a log and as a value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisWeight {
    pub v: u64,
    pub log_weight: f64,
    pub weight: f64,
}

fn check_point(x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "evaluation point must be finite and >= 0, got {x}"
        )))
    }
}

/// `ln ω_β(v, y)` for a basis argument `y = n·x` that is already scaled.
#[inline]
pub(crate) fn ln_basis_scaled(y: f64, beta: f64, v: u64) -> f64 {
    if y == 0.0 {
        return if v == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if v == 0 {
        return -y;
    }
    let shift = v as f64 * beta;
    let mu = y + shift;
    -(shift / y).ln_1p() + ln_poisson(v, mu)
}

/// Natural log of the Jain basis weight `ω_β(v, nx)`.
pub fn jain_basis_log(params: &OperatorParams, x: f64, v: u64) -> Result<f64> {
    check_point(x)?;
    Ok(ln_basis_scaled(params.n() * x, params.beta(), v))
}

pub fn basis_weight(params: &OperatorParams, x: f64, v: u64) -> Result<BasisWeight> {
    let log_weight = jain_basis_log(params, x, v)?;
    Ok(BasisWeight {
        v,
        log_weight,
        weight: log_weight.exp(),
    })
}

/// Partial sum `Σ_{v=0}^{v_max} ω_β(v, nx)`.
pub fn basis_mass(params: &OperatorParams, x: f64, v_max: u64) -> Result<f64> {
    check_point(x)?;
    let y = params.n() * x;
    let mut acc = CompensatedSum::new();
    for v in 0..=v_max {
        acc.add(ln_basis_scaled(y, params.beta(), v).exp());
    }
    Ok(acc.value())
}

/// Basis mass collected by the adaptive truncation rule used by the
/// operators, together with the number of terms it took.
pub fn basis_mass_adaptive(
    params: &OperatorParams,
    x: f64,
    cfg: &EvalConfig,
) -> Result<(f64, u64)> {
    check_point(x)?;
    if x == 0.0 {
        return Ok((1.0, 1));
    }
    let s = sum_basis_series(params, x, cfg, |_| Ok((1.0, 0.0)), |_| 1.0)?;
    Ok((s.mass, s.terms))
}

/// Outcome of a truncated basis series `Σ_v ω_β(v, ny) T_v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SeriesSum {
    pub value: f64,
    pub mass: f64,
    pub terms: u64,
    pub tail_bound: f64,
    pub quad_error: f64,
}

/// Sums `Σ_v ω_β(v, n·y) T_v` outward from the mean of the basis.
///
/// `term(v)` yields `(T_v, error estimate)`; `growth(v)` bounds `|T_w|` for the
/// terms beyond `v`. The series stops once the collected mass is at least
/// `1 - tail_eps` and both frontier weights times their growth bounds fall
/// under `tail_eps · (1 + |running value|)`.
pub(crate) fn sum_basis_series<T, G>(
    params: &OperatorParams,
    y: f64,
    cfg: &EvalConfig,
    mut term: T,
    growth: G,
) -> Result<SeriesSum>
where
    T: FnMut(u64) -> Result<(f64, f64)>,
    G: Fn(u64) -> f64,
{
    debug_assert!(y > 0.0);
    let scaled = params.n() * y;
    let beta = params.beta();
    let eps = cfg.tail_eps.max(MASS_RESOLUTION);
    let weight = |v: u64| ln_basis_scaled(scaled, beta, v).exp();

    let start = ((scaled / (1.0 - beta)).floor() as u64).min(MAX_BASIS_TERMS);
    let mut value = CompensatedSum::new();
    let mut magnitude = CompensatedSum::new();
    let mut mass = CompensatedSum::new();
    let mut quad_error = CompensatedSum::new();
    let mut terms = 0u64;

    let mut add = |v: u64,
                   w: f64,
                   value: &mut CompensatedSum,
                   magnitude: &mut CompensatedSum,
                   mass: &mut CompensatedSum|
     -> Result<()> {
        mass.add(w);
        if w > 0.0 {
            let (t, err) = term(v)?;
            value.add(w * t);
            magnitude.add(w * t.abs());
            quad_error.add(w * err);
        }
        Ok(())
    };
    // geometric estimate of Σ_{u ≥ v} w_u growth(u)
    let upper_tail = |v: u64, w: f64| {
        let g0 = w * growth(v);
        if g0 == 0.0 {
            return 0.0;
        }
        let g1 = weight(v + 1) * growth(v + 1);
        if g1 < g0 {
            g0 / (1.0 - g1 / g0)
        } else {
            f64::INFINITY
        }
    };

    add(start, weight(start), &mut value, &mut magnitude, &mut mass)?;
    terms += 1;
    let mut lo = start.checked_sub(1);
    let mut hi = start + 1;
    let mut w_lo = lo.map_or(0.0, weight);
    let mut w_hi = weight(hi);

    loop {
        let m = mass.value();
        if m >= 1.0 - eps {
            let scale = magnitude.value();
            let limit = eps * if scale > 0.0 { scale } else { 1.0 };
            // below the mode the weights fall as v decreases and growth(v) is nondecreasing
            let lo_tail = lo.map_or(0.0, |v| (v + 1) as f64 * w_lo * growth(v));
            if lo_tail <= limit {
                let hi_tail = upper_tail(hi, w_hi);
                if hi_tail <= limit {
                    return Ok(SeriesSum {
                        value: value.value(),
                        mass: m,
                        terms,
                        tail_bound: hi_tail + lo_tail,
                        quad_error: quad_error.value(),
                    });
                }
            }
        }
        if w_hi == 0.0 && w_lo == 0.0 && hi > start + 1 {
            return Err(Error::Convergence {
                what: "basis series",
                detail: format!("weights underflowed with mass {m} short of 1 - {eps}"),
            });
        }
        if terms >= MAX_BASIS_TERMS {
            return Err(Error::Convergence {
                what: "basis series",
                detail: format!("hit the cap of {MAX_BASIS_TERMS} terms with mass {m}"),
            });
        }
        match lo {
            Some(v) if w_lo >= w_hi => {
                add(v, w_lo, &mut value, &mut magnitude, &mut mass)?;
                lo = v.checked_sub(1);
                w_lo = lo.map_or(0.0, weight);
            }
            _ => {
                add(hi, w_hi, &mut value, &mut magnitude, &mut mass)?;
                hi += 1;
                w_hi = weight(hi);
            }
        }
        terms += 1;
    }
}

/// Natural log of `p_{n,v-1,c}(t)`.
///
/// At `t = 0` the kernel is taken by continuity: `c` for `v = 1`, zero otherwise.
pub fn baskakov_kernel_log(params: &OperatorParams, v: u64, t: f64) -> Result<f64> {
    if v == 0 {
        return Err(Error::domain("kernel index v must be >= 1"));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::domain(format!(
            "kernel argument must be finite and >= 0, got {t}"
        )));
    }
    params.require(1, "Baskakov kernel")?;
    let (n, c) = (params.n(), params.c());
    let a = n / c;
    let vf = v as f64;
    if t == 0.0 {
        return Ok(if v == 1 { c.ln() } else { f64::NEG_INFINITY });
    }
    let ct = c * t;
    let norm = c.ln() + ln_gamma(a + vf - 1.0) - ln_gamma(vf) - ln_gamma(a);
    Ok(norm + (vf - 1.0) * ct.ln() - (a + vf - 1.0) * ct.ln_1p())
}

/// `∫₀^∞ t^j p_{n,v-1,c}(t) dt = c · v(v+1)…(v+j-1) / ((n-c)(n-2c)…(n-(j+1)c))`.
pub fn kernel_moment_exact(params: &OperatorParams, v: u64, j: u32) -> Result<f64> {
    if v == 0 {
        return Err(Error::domain("kernel index v must be >= 1"));
    }
    params.require(j + 1, "kernel moment")?;
    let (n, c) = (params.n(), params.c());
    let vf = v as f64;
    let mut value = c;
    for i in 0..j {
        value *= vf + f64::from(i);
    }
    for i in 1..=j + 1 {
        value /= n - f64::from(i) * c;
    }
    Ok(value)
}

/// `∫₀^∞ p_{n,v-1,c}(t) f(t) dt` with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelIntegral {
    pub value: f64,
    pub error: f64,
    pub nodes: usize,
}

/// Integrates `f` against `p_{n,v-1,c}`.
///
/// With `s = ct / (1 + ct)` the kernel becomes `c/(n-c)` times the Beta(v, n/c - 1)
/// density on `(0, 1)`. Smooth functions use Gauss-Jacobi rules for that
/// weight, with `(1-s)^d` moved from the weight onto the integrand so monomials
/// up to the growth degree `d` are integrated exactly. Functions with declared
/// kinks, and smooth ones the Gauss rules cannot resolve (fast oscillation
/// piling up at `s = 1`), go through adaptive Gauss-Kronrod split at the kinks
/// and around the bulk of the Beta density.
pub fn kernel_integral(
    params: &OperatorParams,
    v: u64,
    f: &TestFunction,
    cfg: &EvalConfig,
) -> Result<KernelIntegral> {
    let q = kernel_expectation(params, v, f, cfg)?;
    let scale = params.c() / (params.n() - params.c());
    Ok(KernelIntegral {
        value: scale * q.value,
        error: scale * q.error,
        nodes: q.nodes,
    })
}

/// `(n-c)/c · ∫ p_{n,v-1,c} f`, i.e. the mean of `f(t)` under the normalised kernel.
pub(crate) fn kernel_expectation(
    params: &OperatorParams,
    v: u64,
    f: &TestFunction,
    cfg: &EvalConfig,
) -> Result<Quad> {
    if v == 0 {
        return Err(Error::domain("kernel index v must be >= 1"));
    }
    check_integrable(params, f)?;
    if f.kinks().is_empty() {
        if let Some(q) = smooth_expectation(params, v, f, cfg) {
            return Ok(q);
        }
    }
    adaptive_expectation(params, v, f, cfg)
}

pub(crate) fn check_integrable(params: &OperatorParams, f: &TestFunction) -> Result<()> {
    let d = f.growth_degree();
    if params.exceeds(d + 1) {
        Ok(())
    } else {
        Err(Error::Integrability {
            function: f.name().to_string(),
            degree: d,
            n: params.n(),
            c: params.c(),
        })
    }
}

fn smooth_expectation(
    params: &OperatorParams,
    v: u64,
    f: &TestFunction,
    cfg: &EvalConfig,
) -> Option<Quad> {
    let c = params.c();
    let b = params.n() / c - 1.0;
    let d = f.growth_degree();
    let vf = v as f64;
    // B(v, b-d) / B(v, b)
    let mut ratio = 1.0;
    for k in 1..=d {
        let k = f64::from(k);
        ratio *= (vf + b - k) / (b - k);
    }
    let h = |s: f64, one_minus_s: f64| {
        let t = s / (c * one_minus_s);
        f.eval(t) * one_minus_s.powi(d as i32)
    };
    let q = beta_expectation(
        vf,
        b - f64::from(d),
        h,
        cfg.quad_rel_tol,
        GAUSS_START_NODES,
        cfg.quad_max_nodes.min(GAUSS_MAX_NODES),
    )?;
    Some(Quad {
        value: ratio * q.value,
        error: ratio * q.error,
        nodes: q.nodes,
    })
}

fn adaptive_expectation(
    params: &OperatorParams,
    v: u64,
    f: &TestFunction,
    cfg: &EvalConfig,
) -> Result<Quad> {
    let c = params.c();
    let p = v as f64;
    let q = params.n() / c - 1.0;
    let mean = p / (p + q);
    let sd = (p * q / ((p + q).powi(2) * (p + q + 1.0))).sqrt();
    let ln_ref = (p - 1.0) * mean.ln() + (q - 1.0) * (-mean).ln_1p();

    let mut breaks = vec![0.0, 1.0];
    for &k in f.kinks() {
        if k > 0.0 {
            breaks.push(c * k / (1.0 + c * k));
        }
    }
    for width in [1.0, 3.0, 6.0, 10.0] {
        breaks.push(mean - width * sd);
        breaks.push(mean + width * sd);
    }
    breaks.retain(|s| (0.0..=1.0).contains(s));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let integrand = |s: f64| {
        let one_minus_s = 1.0 - s;
        let dens = ((p - 1.0) * s.ln() + (q - 1.0) * one_minus_s.ln() - ln_ref).exp();
        let g = f.eval(s / (c * one_minus_s));
        [dens, dens * g, dens * g.abs()]
    };
    let err_of = |k: &[f64; 3], g: &[f64; 3]| {
        let local = if k[0] > 0.0 { k[2] / k[0] } else { 0.0 };
        (k[1] - g[1]).abs() + local * (k[0] - g[0]).abs()
    };
    let tol = cfg.quad_rel_tol.max(quadrature::NOISE_FLOOR);
    let (totals, err, nodes) = adaptive_gk(
        integrand,
        &breaks,
        err_of,
        |t| tol * t[2],
        ADAPTIVE_PANEL_FACTOR * cfg.quad_max_nodes,
    )
    .ok_or_else(|| Error::Convergence {
        what: "kernel quadrature",
        detail: format!(
            "`{}` at v = {v} not resolved to {tol} within {} panels",
            f.name(),
            ADAPTIVE_PANEL_FACTOR * cfg.quad_max_nodes
        ),
    })?;
    Ok(Quad {
        value: totals[1] / totals[0],
        error: err / totals[0],
        nodes,
    })
}
