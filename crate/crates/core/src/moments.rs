//! Closed-form raw and central moments of the three operators.
//!
//! Each displayed formula is available verbatim (`*_display`) next to an exact
//! counterpart. The exact Jain moments come from the cumulants of the
//! generalized Poisson law `ω_β(·, nx)`; the exact Jain-Baskakov moments
//! recombine them through the kernel moments
//! `∫ t^m p_{n,v-1,c} = c·v(v+1)…(v+m-1) / ((n-c)…(n-(m+1)c))`,
//! expanding the rising factorial in powers of `v`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::TestFunction;
use crate::operators::{king_transform, Evaluator, OperatorKind};
use crate::params::{EvalConfig, OperatorParams};
use crate::special::compensated_sum;

/// Coefficients of `v^k` in `v(v+1)…(v+m-1)` (unsigned Stirling numbers of the first kind).
const RISING_COEFFS: [&[f64]; 5] = [
    &[1.0],
    &[0.0, 1.0],
    &[0.0, 1.0, 1.0],
    &[0.0, 2.0, 3.0, 1.0],
    &[0.0, 6.0, 11.0, 6.0, 1.0],
];

const BINOMIAL: [[f64; 5]; 5] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0, 0.0, 0.0],
    [1.0, 2.0, 1.0, 0.0, 0.0],
    [1.0, 3.0, 3.0, 1.0, 0.0],
    [1.0, 4.0, 6.0, 4.0, 1.0],
];

fn check_order(m: u32, range: std::ops::RangeInclusive<u32>) -> Result<()> {
    if range.contains(&m) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "moment order {m} outside {}..={}",
            range.start(),
            range.end()
        )))
    }
}

fn check_point(x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "evaluation point must be finite and >= 0, got {x}"
        )))
    }
}

/// Exact `P_n^β(t^m, x)`, `m ≤ 4`.
pub fn jain_moment(params: &OperatorParams, m: u32, x: f64) -> Result<f64> {
    check_order(m, 0..=4)?;
    check_point(x)?;
    Ok(jain_moment_unchecked(params.n(), params.beta(), m, x))
}

fn jain_moment_unchecked(n: f64, b: f64, m: u32, x: f64) -> f64 {
    let q = 1.0 - b;
    match m {
        0 => 1.0,
        1 => x / q,
        2 => x * x / (q * q) + x / (n * q.powi(3)),
        3 => compensated_sum([
            x.powi(3) / q.powi(3),
            3.0 * x * x / (n * q.powi(4)),
            (1.0 + 2.0 * b) * x / (n * n * q.powi(5)),
        ]),
        4 => compensated_sum([
            x.powi(4) / q.powi(4),
            6.0 * x.powi(3) / (n * q.powi(5)),
            (7.0 + 8.0 * b) * x * x / (n * n * q.powi(6)),
            (1.0 + 8.0 * b + 6.0 * b * b) * x / (n.powi(3) * q.powi(7)),
        ]),
        _ => unreachable!(),
    }
}

/// The classical displayed forms of `P_n^β(t^3, x)` and `P_n^β(t^4, x)`.
///
/// These agree with [`jain_moment`] only at `β = 0`; they are kept for
/// comparison and reported as reference rows.
pub fn jain_moment_display(params: &OperatorParams, m: u32, x: f64) -> Result<f64> {
    check_order(m, 3..=4)?;
    check_point(x)?;
    let (n, b) = (params.n(), params.beta());
    let q = 1.0 - b;
    Ok(if m == 3 {
        x.powi(3) / q.powi(3) + 3.0 * x * x / (n * q.powi(4))
            - (6.0 * b.powi(4) - 6.0 * b.powi(3) - 2.0 * b - 1.0) * x / (n * n * q.powi(5))
    } else {
        x.powi(4) / q.powi(4) + 6.0 * x.powi(3) / (n * q.powi(5))
            - (36.0 * b.powi(4) - 72.0 * b.powi(3) + 36.0 * b * b - 8.0 * b - 7.0) * x * x
                / (n * n * q.powi(6))
            + (105.0 * b.powi(5) - 14.0 * b.powi(4) - 2.0 * b.powi(3)
                + 12.0 * b * b
                + 8.0 * b
                + 1.0)
                * x
                / (n.powi(3) * q.powi(7))
    })
}

fn d_threshold(m: u32) -> (u32, &'static str) {
    match m {
        0 => (1, "Jain-Baskakov moment of order 0"),
        1 => (2, "Jain-Baskakov moment of order 1"),
        2 => (3, "Jain-Baskakov moment of order 2"),
        3 => (4, "Jain-Baskakov moment of order 3"),
        _ => (5, "Jain-Baskakov moment of order 4"),
    }
}

/// `D(t^m)` with the basis evaluated at `y` (not checked).
fn d_moment_at(params: &OperatorParams, m: u32, y: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let (n, c, b) = (params.n(), params.c(), params.beta());
    let mut prefactor = 1.0;
    for i in 2..=m + 1 {
        prefactor *= n / (n - f64::from(i) * c);
    }
    let inner = compensated_sum(RISING_COEFFS[m as usize].iter().enumerate().skip(1).map(
        |(k, &coef)| {
            coef * jain_moment_unchecked(n, b, k as u32, y) / n.powi((m - k as u32) as i32)
        },
    ));
    prefactor * inner
}

/// Exact `D_{n,c}^β(t^m, x)` via the kernel-moment recombination. Needs `n > (m+1)c`.
pub fn d_moment_exact(params: &OperatorParams, m: u32, x: f64) -> Result<f64> {
    check_order(m, 0..=4)?;
    check_point(x)?;
    let (factor, what) = d_threshold(m);
    params.require(factor, what)?;
    Ok(d_moment_at(params, m, x))
}

/// The displayed main terms for `D(t^3, x)` and `D(t^4, x)`, without their
/// `o(1/n)` remainders. The `t^3` form is evaluated exactly as printed,
/// including its leading minus sign.
pub fn d_moment_display(params: &OperatorParams, m: u32, x: f64) -> Result<f64> {
    check_order(m, 3..=4)?;
    check_point(x)?;
    let (factor, what) = d_threshold(m);
    params.require(factor, what)?;
    let (n, c, b) = (params.n(), params.c(), params.beta());
    let q = 1.0 - b;
    let poly = b * b - 2.0 * b + 2.0;
    Ok(if m == 3 {
        n * n * x * x * (-q * x * n + 3.0 * poly)
            / (q.powi(4) * (n - 2.0 * c) * (n - 3.0 * c) * (n - 4.0 * c))
    } else {
        n.powi(3) * x.powi(3) * (q * x * n + 6.0 * poly)
            / (q.powi(5) * (n - 2.0 * c) * (n - 3.0 * c) * (n - 4.0 * c) * (n - 5.0 * c))
    })
}

/// Central moments `E[(t - x)^k]` for `k = 1, 2, 4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralMoments {
    pub mu1: f64,
    pub mu2: f64,
    pub mu4: f64,
    pub x: f64,
    pub params: OperatorParams,
}

/// `Σ_j C(k, j) (-x)^{k-j} raw(j)`, compensated.
pub fn central_from_raw<F: Fn(u32) -> f64>(raw: F, k: u32, x: f64) -> f64 {
    compensated_sum(
        (0..=k).map(|j| BINOMIAL[k as usize][j as usize] * (-x).powi((k - j) as i32) * raw(j)),
    )
}

/// `μ₁ = x(nβ + 2c(1-β)) / ((n-2c)(1-β))`
pub fn d_mu1(params: &OperatorParams, x: f64) -> Result<f64> {
    check_point(x)?;
    params.require(2, "first central moment")?;
    let (n, c, b) = (params.n(), params.c(), params.beta());
    Ok(x * (n * b + 2.0 * c * (1.0 - b)) / ((n - 2.0 * c) * (1.0 - b)))
}

/// `μ₂`, as displayed; this form is exact.
pub fn d_mu2(params: &OperatorParams, x: f64) -> Result<f64> {
    check_point(x)?;
    params.require(3, "second central moment")?;
    let (n, c, b) = (params.n(), params.c(), params.beta());
    let q = 1.0 - b;
    let den = (n - 2.0 * c) * (n - 3.0 * c);
    let quad = n * n * b * b + n * (c + 4.0 * c * b - 5.0 * c * b * b) + 6.0 * c * c
        - 12.0 * c * c * b
        + 6.0 * c * c * b * b;
    Ok(x * x * quad / (den * q * q) + n * x * (2.0 - 2.0 * b + b * b) / (den * q.powi(3)))
}

/// Exact `μ₄` by binomial expansion over [`d_moment_exact`].
pub fn d_mu4(params: &OperatorParams, x: f64) -> Result<f64> {
    check_point(x)?;
    params.require(5, "fourth central moment")?;
    Ok(central_from_raw(|j| d_moment_at(params, j, x), 4, x))
}

/// The displayed `μ₄` main term. Reference only: it vanishes at `β = 0`
/// while the true fourth moment does not.
pub fn d_mu4_display(params: &OperatorParams, x: f64) -> Result<f64> {
    check_point(x)?;
    params.require(5, "fourth central moment")?;
    let (n, c, b) = (params.n(), params.c(), params.beta());
    let q = 1.0 - b;
    let num =
        q * n.powi(3) * b * b * x.powi(4) * (2.0 * c * (3.0 + 4.0 * b - 7.0 * b * b) + b * b * n)
            + 6.0 * n.powi(3) * b * b * x * x * (b * b - 2.0 * b + 2.0);
    let den = (n - 2.0 * c) * (n - 3.0 * c) * (n - 4.0 * c) * (n - 5.0 * c) * q.powi(5);
    Ok(num / den)
}

/// `μ₁, μ₂, μ₄` of `D_{n,c}^β`. Needs `n > 5c`.
pub fn d_central_moments(params: &OperatorParams, x: f64) -> Result<CentralMoments> {
    Ok(CentralMoments {
        mu1: d_mu1(params, x)?,
        mu2: d_mu2(params, x)?,
        mu4: d_mu4(params, x)?,
        x,
        params: *params,
    })
}

fn king_threshold(m: u32) -> (u32, &'static str) {
    match m {
        0..=2 => (3, "King-type moment of order <= 2"),
        3 => (4, "King-type moment of order 3"),
        _ => (5, "King-type moment of order 4"),
    }
}

/// Exact `D*_{n,c}^β(t^m, x)`.
///
/// Orders 0 and 1 are the identities `1` and `x`; order 2 is the displayed
/// (exact) formula; orders 3 and 4 evaluate the exact Jain-Baskakov moment at
/// `r_n(x)`.
pub fn king_moments(params: &OperatorParams, m: u32, x: f64) -> Result<f64> {
    check_order(m, 0..=4)?;
    check_point(x)?;
    let (factor, what) = king_threshold(m);
    params.require(factor, what)?;
    let (n, c, b) = (params.n(), params.c(), params.beta());
    Ok(match m {
        0 => 1.0,
        1 => x,
        2 => {
            (n - 2.0 * c) / (n - 3.0 * c) * x * x
                + (2.0 - 2.0 * b + b * b) / ((n - 3.0 * c) * (1.0 - b).powi(2)) * x
        }
        _ => d_moment_at(params, m, king_transform(params, x)?),
    })
}

/// The displayed main terms for `D*(t^3, x)` and `D*(t^4, x)`, as printed.
pub fn king_moment_display(params: &OperatorParams, m: u32, x: f64) -> Result<f64> {
    check_order(m, 3..=4)?;
    check_point(x)?;
    let (factor, what) = king_threshold(m);
    params.require(factor, what)?;
    let (n, c, b) = (params.n(), params.c(), params.beta());
    let q = 1.0 - b;
    let poly = b * b - 2.0 * b + 2.0;
    Ok(if m == 3 {
        x * x * n * ((1.0 - b * b) * (n - 4.0 * c) * x + 3.0 * poly)
            / (q * q * (n - 3.0 * c) * (n - 4.0 * c))
    } else {
        n * n * x.powi(3) * (q * q * (n - 6.0 * c) * x + 6.0 * poly)
            / (q * q * (n - 3.0 * c) * (n - 4.0 * c) * (n - 5.0 * c))
    })
}

/// `μ*₂ = c x² / (n-3c) + (2 - 2β + β²) x / ((n-3c)(1-β)²)`
pub fn king_mu2(params: &OperatorParams, x: f64) -> Result<f64> {
    check_point(x)?;
    params.require(3, "King-type second central moment")?;
    let (n, c, b) = (params.n(), params.c(), params.beta());
    Ok(c * x * x / (n - 3.0 * c)
        + (2.0 - 2.0 * b + b * b) / ((n - 3.0 * c) * (1.0 - b).powi(2)) * x)
}

/// `μ*₁ = 0`, `μ*₂` as displayed, `μ*₄` exact by binomial expansion. Needs `n > 5c`.
pub fn king_central_moments(params: &OperatorParams, x: f64) -> Result<CentralMoments> {
    params.require(5, "King-type fourth central moment")?;
    let r = king_transform(params, x)?;
    let raw = |j: u32| match j {
        0 => 1.0,
        1 => x,
        _ => d_moment_at(params, j, r),
    };
    Ok(CentralMoments {
        mu1: 0.0,
        mu2: king_mu2(params, x)?,
        mu4: central_from_raw(raw, 4, x),
        x,
        params: *params,
    })
}

/// Exact raw moment of any operator kind.
pub fn raw_moment(kind: OperatorKind, params: &OperatorParams, m: u32, x: f64) -> Result<f64> {
    match kind {
        OperatorKind::Jain => jain_moment(params, m, x),
        OperatorKind::JainBaskakov => d_moment_exact(params, m, x),
        OperatorKind::KingJainBaskakov => king_moments(params, m, x),
    }
}

/// Exact central moment `E[(t-x)^k]`, `k ≤ 4`, by binomial expansion of the
/// raw moments (with `μ₁ = 0` for the King-type operator).
pub fn central_moment(kind: OperatorKind, params: &OperatorParams, k: u32, x: f64) -> Result<f64> {
    check_order(k, 0..=4)?;
    if kind == OperatorKind::KingJainBaskakov && k == 1 {
        params.require(3, "King-type moment of order <= 2")?;
        return Ok(0.0);
    }
    let raws = (0..=k)
        .map(|j| raw_moment(kind, params, j, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(central_from_raw(|j| raws[j as usize], k, x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentType {
    Raw,
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormulaClass {
    /// Closed form with no remainder.
    Exact,
    /// Main term of a formula carrying an `o(1/n)` remainder.
    Asymptotic,
    /// A displayed formula that is stated as exact but is not; kept for comparison.
    Reference,
}

/// A closed-form moment next to its numerical evaluation through the operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub kind: OperatorKind,
    pub moment: MomentType,
    pub order: u32,
    pub x: f64,
    pub closed_form: Option<f64>,
    pub numeric: Option<f64>,
    pub rel_error: Option<f64>,
    pub formula_class: FormulaClass,
    /// Set when the parameters do not satisfy the order's threshold.
    pub error: Option<String>,
}

impl MomentReport {
    fn row(
        kind: OperatorKind,
        moment: MomentType,
        order: u32,
        x: f64,
        formula_class: FormulaClass,
        closed: Result<f64>,
        numeric: impl FnOnce() -> Result<f64>,
    ) -> Result<Self> {
        let mut row = MomentReport {
            kind,
            moment,
            order,
            x,
            closed_form: None,
            numeric: None,
            rel_error: None,
            formula_class,
            error: None,
        };
        match closed {
            Ok(cf) => {
                let num = numeric()?;
                row.closed_form = Some(cf);
                row.numeric = Some(num);
                row.rel_error = Some(relative_gap(cf, num));
            }
            Err(e @ Error::Threshold { .. }) => row.error = Some(e.to_string()),
            Err(e) => return Err(e),
        }
        Ok(row)
    }

    /// True when this is an exact-class row whose gap exceeds `tol`.
    pub fn exceeds(&self, tol: f64) -> bool {
        self.formula_class == FormulaClass::Exact && self.rel_error.is_some_and(|e| e > tol)
    }
}

/// `|a - b| / max(1, |a|)`
pub fn relative_gap(closed_form: f64, numeric: f64) -> f64 {
    (closed_form - numeric).abs() / closed_form.abs().max(1.0)
}

/// Raw moments 0..=4, the displayed forms, and central moments 1, 2, 4 of one
/// operator at `x`, each against the operator evaluated numerically.
pub fn moment_report(
    kind: OperatorKind,
    params: &OperatorParams,
    x: f64,
    cfg: &EvalConfig,
) -> Result<Vec<MomentReport>> {
    check_point(x)?;
    let numeric = |f: TestFunction| -> Result<f64> {
        Ok(Evaluator::new(kind, *params, f, *cfg)?.eval(x)?.value)
    };
    let mut rows = Vec::new();
    for m in 0..=4 {
        rows.push(MomentReport::row(
            kind,
            MomentType::Raw,
            m,
            x,
            FormulaClass::Exact,
            raw_moment(kind, params, m, x),
            || numeric(TestFunction::monomial(m)),
        )?);
    }
    for m in 3..=4 {
        let (class, display) = match kind {
            OperatorKind::Jain => (FormulaClass::Reference, jain_moment_display(params, m, x)),
            OperatorKind::JainBaskakov => {
                (FormulaClass::Asymptotic, d_moment_display(params, m, x))
            }
            OperatorKind::KingJainBaskakov => {
                (FormulaClass::Asymptotic, king_moment_display(params, m, x))
            }
        };
        rows.push(MomentReport::row(
            kind,
            MomentType::Raw,
            m,
            x,
            class,
            display,
            || numeric(TestFunction::monomial(m)),
        )?);
    }
    for k in [1, 2, 4] {
        rows.push(MomentReport::row(
            kind,
            MomentType::Central,
            k,
            x,
            FormulaClass::Exact,
            central_moment(kind, params, k, x),
            || numeric(TestFunction::shifted_power(x, k)),
        )?);
    }
    if kind == OperatorKind::JainBaskakov {
        rows.push(MomentReport::row(
            kind,
            MomentType::Central,
            4,
            x,
            FormulaClass::Asymptotic,
            d_mu4_display(params, x),
            || numeric(TestFunction::shifted_power(x, 4)),
        )?);
    }
    Ok(rows)
}
