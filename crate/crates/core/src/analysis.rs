//! Numerical checks of the approximation theorems: moduli of continuity,
//! direct and rate-of-convergence bounds, weighted-norm errors and the two
//! Voronovskaja-type limits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::TestFunction;
use crate::moments::{
    d_moment_display, d_moment_exact, d_mu1, d_mu2, king_central_moments, raw_moment,
};
use crate::operators::{Evaluator, OperatorKind};
use crate::params::{EvalConfig, OperatorParams};

/// Absolute slack tolerated before a bound counts as violated.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// Default value of the absolute constant in the direct estimate.
pub const DEFAULT_DIRECT_CONSTANT: f64 = 2.0;

/// Steps tried per unit of `delta` when estimating the second-order modulus.
const MODULUS2_STEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusEstimate {
    pub delta: f64,
    pub omega1: f64,
    /// `None` when the function is not bounded.
    pub omega2: Option<f64>,
    pub a: f64,
    pub grid_points: usize,
    /// Largest jump of `f` between neighbouring grid nodes.
    pub resolution: f64,
}

/// Sampled values of `f` on `[0, a]` answering first-order modulus queries.
///
/// The grid is uniform with `grid_points` nodes, refined once at the
/// midpoints, and contains every kink of `f` inside `[0, a]`. A query also
/// evaluates `f` at the exact window ends `x ± δ`.
pub struct Modulus1Grid<'a> {
    f: &'a TestFunction,
    a: f64,
    xs: Vec<f64>,
    max_table: Vec<Vec<f64>>,
    min_table: Vec<Vec<f64>>,
    resolution: f64,
}

impl<'a> Modulus1Grid<'a> {
    pub fn new(f: &'a TestFunction, a: f64, cfg: &EvalConfig) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!(
                "interval end must be positive, got {a}"
            )));
        }
        cfg.validate()?;
        let cells = 2 * (cfg.grid_points - 1);
        let mut xs: Vec<f64> = (0..=cells).map(|i| a * i as f64 / cells as f64).collect();
        xs.extend(f.kinks().iter().copied().filter(|&k| k > 0.0 && k < a));
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let ys: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect();
        let resolution = ys
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max);
        let (max_table, min_table) = sparse_tables(&ys);
        Ok(Self {
            f,
            a,
            xs,
            max_table,
            min_table,
            resolution,
        })
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    fn range(&self, lo: usize, hi: usize) -> (f64, f64) {
        let k = usize::BITS - 1 - (hi - lo + 1).leading_zeros();
        let k = k as usize;
        let span = 1 << k;
        (
            self.max_table[k][lo].max(self.max_table[k][hi + 1 - span]),
            self.min_table[k][lo].min(self.min_table[k][hi + 1 - span]),
        )
    }

    /// `sup |f(t) - f(x)|` over grid pairs with `|t - x| ≤ δ`, plus the exact window ends.
    pub fn omega(&self, delta: f64) -> f64 {
        if delta <= 0.0 {
            return 0.0;
        }
        let last = self.xs.len() - 1;
        if delta >= self.a {
            let (hi, lo) = self.range(0, last);
            return hi - lo;
        }
        let ys = &self.max_table[0];
        (0..self.xs.len())
            .map(|i| {
                let x = self.xs[i];
                let lo = self.xs.partition_point(|&t| t < x - delta);
                let hi = self.xs.partition_point(|&t| t <= x + delta) - 1;
                let (wmax, wmin) = self.range(lo, hi);
                let mut best = (wmax - ys[i]).max(ys[i] - wmin);
                for t in [x - delta, x + delta] {
                    if (0.0..=self.a).contains(&t) {
                        best = best.max((self.f.eval(t) - ys[i]).abs());
                    }
                }
                best
            })
            .fold(0.0, f64::max)
    }
}

fn sparse_tables(ys: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut max_t = vec![ys.to_vec()];
    let mut min_t = vec![ys.to_vec()];
    let mut span = 1;
    while 2 * span <= ys.len() {
        let (pm, pn) = (max_t.last().unwrap(), min_t.last().unwrap());
        let len = ys.len() + 1 - 2 * span;
        let nm = (0..len).map(|i| pm[i].max(pm[i + span])).collect();
        let nn = (0..len).map(|i| pn[i].min(pn[i + span])).collect();
        max_t.push(nm);
        min_t.push(nn);
        span *= 2;
    }
    (max_t, min_t)
}

/// First-order modulus of continuity of `f` on `[0, a]`.
pub fn modulus1(f: &TestFunction, a: f64, delta: f64, cfg: &EvalConfig) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!(
            "delta must be positive, got {delta}"
        )));
    }
    Ok(Modulus1Grid::new(f, a, cfg)?.omega(delta))
}

/// Second-order modulus `sup_{0<h≤δ} sup_x |f(x+2h) - 2f(x+h) + f(x)|` with
/// `x` ranging over `[0, domain_cap]`.
pub fn modulus2(f: &TestFunction, delta: f64, cfg: &EvalConfig) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if !f.is_bounded() {
        return Err(Error::UnboundedFunction(f.name().to_string()));
    }
    cfg.validate()?;
    let cells = 4 * (cfg.grid_points - 1);
    let mut xs: Vec<f64> = (0..=cells)
        .map(|i| cfg.domain_cap * i as f64 / cells as f64)
        .collect();
    for &k in f.kinks() {
        xs.extend(
            [k, k - delta, k - 2.0 * delta]
                .into_iter()
                .filter(|&t| t >= 0.0 && t <= cfg.domain_cap),
        );
    }
    let value = (1..=MODULUS2_STEPS)
        .into_par_iter()
        .map(|k| {
            let h = delta * k as f64 / MODULUS2_STEPS as f64;
            xs.iter()
                .map(|&x| (f.eval(x + 2.0 * h) - 2.0 * f.eval(x + h) + f.eval(x)).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(value)
}

/// Both moduli at `delta`; `omega2` is left empty for unbounded `f`.
pub fn modulus_estimate(
    f: &TestFunction,
    a: f64,
    delta: f64,
    cfg: &EvalConfig,
) -> Result<ModulusEstimate> {
    let grid = Modulus1Grid::new(f, a, cfg)?;
    if !(delta > 0.0) {
        return Err(Error::Domain(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let omega2 = if f.is_bounded() {
        Some(modulus2(f, delta, cfg)?)
    } else {
        None
    };
    Ok(ModulusEstimate {
        delta,
        omega1: grid.omega(delta),
        omega2,
        a,
        grid_points: grid.len(),
        resolution: grid.resolution(),
    })
}

/// Moduli on an increasing ladder of `delta`s, made nondecreasing by a
/// running maximum (each value stays a lower estimate of the true modulus).
pub fn modulus_ladder(
    f: &TestFunction,
    a: f64,
    deltas: &[f64],
    cfg: &EvalConfig,
) -> Result<Vec<ModulusEstimate>> {
    if deltas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("delta ladder must be nondecreasing".into()));
    }
    let mut out: Vec<ModulusEstimate> = deltas
        .iter()
        .map(|&d| modulus_estimate(f, a, d, cfg))
        .collect::<Result<_>>()?;
    for i in 1..out.len() {
        let prev = out[i - 1];
        let cur = &mut out[i];
        cur.omega1 = cur.omega1.max(prev.omega1);
        cur.omega2 = match (cur.omega2, prev.omega2) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, _) => a,
        };
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoremId {
    /// `|D f - f| ≤ ω(f, μ₁) + M ω₂(f, (μ₁² + μ₂)^{1/2})` for bounded `f`.
    Direct,
    /// `|D f - f| ≤ 6 M_f (1 + a²) μ₂ + 2 ω_{a+1}(f, μ₂^{1/2})` on `[0, a]`.
    Rate,
}

impl TheoremId {
    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::Direct => "direct",
            TheoremId::Rate => "rate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub theorem: TheoremId,
    /// The point checked, or for an interval check the point with the least slack.
    pub x: f64,
    /// Right end of the interval for interval checks.
    pub a: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    /// The constant used on the right (`M` or `M_f`).
    pub constant: f64,
    /// Smallest `M` for which the direct estimate holds at this point.
    pub m_min: Option<f64>,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.slack >= -BOUND_TOLERANCE
    }
}

fn error_at(
    kind: OperatorKind,
    params: &OperatorParams,
    f: &TestFunction,
    xs: &[f64],
    cfg: &EvalConfig,
) -> Result<Vec<f64>> {
    let ev = Evaluator::new(kind, *params, f.clone(), *cfg)?;
    Ok(ev
        .eval_grid(xs)?
        .into_iter()
        .map(|r| (r.value - f.eval(r.x)).abs())
        .collect())
}

/// The direct estimate at `x` with the default constant `M = 2`.
pub fn check_direct_bound(
    params: &OperatorParams,
    f: &TestFunction,
    x: f64,
    cfg: &EvalConfig,
) -> Result<BoundCheck> {
    check_direct_bound_with(params, f, x, DEFAULT_DIRECT_CONSTANT, cfg)
}

/// The direct estimate at `x` for the Jain-Baskakov operator with constant `m`.
pub fn check_direct_bound_with(
    params: &OperatorParams,
    f: &TestFunction,
    x: f64,
    m: f64,
    cfg: &EvalConfig,
) -> Result<BoundCheck> {
    if !f.is_bounded() {
        return Err(Error::UnboundedFunction(f.name().to_string()));
    }
    params.require(3, "direct estimate")?;
    let lhs = error_at(OperatorKind::JainBaskakov, params, f, &[x], cfg)?[0];
    let mu1 = d_mu1(params, x)?;
    let mu2 = d_mu2(params, x)?;
    let w1 = if mu1 > 0.0 {
        Modulus1Grid::new(f, cfg.domain_cap, cfg)?.omega(mu1)
    } else {
        0.0
    };
    let step = (mu1 * mu1 + mu2).sqrt();
    let w2 = if step > 0.0 {
        modulus2(f, step, cfg)?
    } else {
        0.0
    };
    let rhs = w1 + m * w2;
    let m_min = if lhs <= w1 {
        Some(0.0)
    } else if w2 > 0.0 {
        Some((lhs - w1) / w2)
    } else {
        None
    };
    Ok(BoundCheck {
        theorem: TheoremId::Direct,
        x,
        a: None,
        lhs,
        rhs,
        slack: rhs - lhs,
        constant: m,
        m_min,
    })
}

/// Pointwise rate-of-convergence estimate at every grid point of `[0, a]`.
pub fn rate_bound_points(
    params: &OperatorParams,
    f: &TestFunction,
    a: f64,
    cfg: &EvalConfig,
) -> Result<Vec<BoundCheck>> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!(
            "interval end must be positive, got {a}"
        )));
    }
    params.require(3, "rate-of-convergence estimate")?;
    let mf = f.rho0_const().ok_or_else(|| Error::InvalidFunction {
        name: f.name().to_string(),
        detail: "needs |f(t)| <= M_f (1 + t^2)".into(),
    })?;
    let xs: Vec<f64> = (0..cfg.grid_points)
        .map(|i| a * i as f64 / (cfg.grid_points - 1) as f64)
        .collect();
    let errs = error_at(OperatorKind::JainBaskakov, params, f, &xs, cfg)?;
    let grid = Modulus1Grid::new(f, a + 1.0, cfg)?;
    xs.par_iter()
        .zip(errs.par_iter())
        .map(|(&x, &lhs)| {
            let mu2 = d_mu2(params, x)?;
            let rhs = 6.0 * mf * (1.0 + a * a) * mu2 + 2.0 * grid.omega(mu2.sqrt());
            Ok(BoundCheck {
                theorem: TheoremId::Rate,
                x,
                a: Some(a),
                lhs,
                rhs,
                slack: rhs - lhs,
                constant: mf,
                m_min: None,
            })
        })
        .collect()
}

/// Summary of [`rate_bound_points`]: `lhs` is the grid sup of the error,
/// `rhs` the grid sup of the bound, and `slack` the least pointwise slack.
pub fn check_rate_bound(
    params: &OperatorParams,
    f: &TestFunction,
    a: f64,
    cfg: &EvalConfig,
) -> Result<BoundCheck> {
    let points = rate_bound_points(params, f, a, cfg)?;
    let worst = points
        .iter()
        .min_by(|p, q| p.slack.total_cmp(&q.slack))
        .copied()
        .expect("grid has at least two points");
    Ok(BoundCheck {
        lhs: points.iter().map(|p| p.lhs).fold(0.0, f64::max),
        rhs: points.iter().map(|p| p.rhs).fold(0.0, f64::max),
        ..worst
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormEstimate {
    pub n: f64,
    pub beta: f64,
    /// Grid sup of `|D f - f| / (1 + x²)^{1+λ}` over `[0, domain_cap]`.
    pub value: f64,
    pub lambda: f64,
    pub domain_cap: f64,
    /// Upper bound for the same quotient beyond `domain_cap`.
    pub tail_bound: f64,
}

/// Weighted error of the Jain-Baskakov operator for each parameter set.
pub fn weighted_norm_error(
    schedule: &[OperatorParams],
    f: &TestFunction,
    lambda: f64,
    cfg: &EvalConfig,
) -> Result<Vec<WeightedNormEstimate>> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda must be >= 0, got {lambda}")));
    }
    let mf = f.rho0_const().ok_or_else(|| Error::InvalidFunction {
        name: f.name().to_string(),
        detail: "needs |f(t)| <= M_f (1 + t^2)".into(),
    })?;
    let cap = cfg.domain_cap;
    let xs: Vec<f64> = (0..cfg.grid_points)
        .map(|i| cap * i as f64 / (cfg.grid_points - 1) as f64)
        .collect();
    schedule
        .iter()
        .map(|p| {
            p.require(3, "weighted-norm estimate")?;
            let errs = error_at(OperatorKind::JainBaskakov, p, f, &xs, cfg)?;
            let value = xs
                .iter()
                .zip(&errs)
                .map(|(&x, &e)| e / (1.0 + x * x).powf(1.0 + lambda))
                .fold(0.0, f64::max);
            // |Df - f| <= M_f (2 + x² + D(t², x)) with D(t², x) = A x² + B x
            let (n, c, b) = (p.n(), p.c(), p.beta());
            let den = (n - 2.0 * c) * (n - 3.0 * c);
            let a2 = n * n / (den * (1.0 - b).powi(2));
            let b1 = n * (2.0 - 2.0 * b + b * b) / (den * (1.0 - b).powi(3));
            let tail_bound =
                mf * (2.0f64.max(1.0 + a2) + 0.5 * b1) / (1.0 + cap * cap).powf(lambda);
            Ok(WeightedNormEstimate {
                n,
                beta: b,
                value,
                lambda,
                domain_cap: cap,
                tail_bound,
            })
        })
        .collect()
}

/// `2c/(n-2c) + nβ/((n-2c)(1-β))`, the factor by which `D(t, x) - x` exceeds `x`.
pub fn linear_majorant(params: &OperatorParams) -> f64 {
    let (n, c, b) = (params.n(), params.c(), params.beta());
    2.0 * c / (n - 2.0 * c) + n * b / ((n - 2.0 * c) * (1.0 - b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoronovskajaRecord {
    pub n: f64,
    pub beta_n: f64,
    /// `n (L_n f(x) - f(x))`
    pub scaled_error: f64,
    pub predicted_limit: f64,
    pub gap: f64,
    /// `n` times the evaluator's own error estimate.
    pub noise: f64,
}

impl VoronovskajaRecord {
    /// Numerical noise is no longer small against the gap.
    pub fn noisy(&self) -> bool {
        self.noise > 0.1 * self.gap
    }
}

/// `β_n = l/n` for the Jain-Baskakov operator, `1/n²` for the King-type one.
pub fn beta_schedule(kind: OperatorKind, l: f64, n: f64) -> Result<f64> {
    match kind {
        OperatorKind::JainBaskakov => Ok(l / n),
        OperatorKind::KingJainBaskakov => Ok(1.0 / (n * n)),
        OperatorKind::Jain => Err(Error::Domain(
            "no Voronovskaja schedule for the Jain operator".into(),
        )),
    }
}

/// The limit of `n (L_n f(x) - f(x))`.
pub fn voronovskaja_limit(
    kind: OperatorKind,
    c: f64,
    l: f64,
    f: &TestFunction,
    x: f64,
) -> Result<f64> {
    let (d1, d2) = match (f.deriv1(x), f.deriv2(x)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::InvalidFunction {
                name: f.name().to_string(),
                detail: "first and second derivatives are required".into(),
            })
        }
    };
    let curvature = x * (2.0 + x * c) / 2.0 * d2;
    match kind {
        OperatorKind::JainBaskakov => Ok(x * (l + 2.0 * c) * d1 + curvature),
        OperatorKind::KingJainBaskakov => Ok(curvature),
        OperatorKind::Jain => Err(Error::Domain(
            "no Voronovskaja limit for the Jain operator".into(),
        )),
    }
}

/// `n (L_n f(x) - f(x))` for each `n`, against the predicted limit. Rows are sorted by `n`.
pub fn voronovskaja_sweep(
    kind: OperatorKind,
    c: f64,
    l: f64,
    f: &TestFunction,
    x: f64,
    n_values: &[f64],
    cfg: &EvalConfig,
) -> Result<Vec<VoronovskajaRecord>> {
    let predicted = voronovskaja_limit(kind, c, l, f, x)?;
    let mut ns = n_values.to_vec();
    ns.sort_by(f64::total_cmp);
    ns.par_iter()
        .map(|&n| {
            let beta_n = beta_schedule(kind, l, n)?;
            let params = OperatorParams::new(n, c, beta_n)?;
            let ev = Evaluator::new(kind, params, f.clone(), cfg.scaled_for_sweep(n))?;
            let r = ev.eval(x)?;
            let scaled_error = n * (r.value - f.eval(x));
            Ok(VoronovskajaRecord {
                n,
                beta_n,
                scaled_error,
                predicted_limit: predicted,
                gap: (scaled_error - predicted).abs(),
                noise: n * (r.est_tail_bound + r.quad_error_est),
            })
        })
        .collect()
}

/// `n (L_n p(x) - p(x))` for the polynomial `Σ coeffs[k] t^k` from closed-form moments.
pub fn exact_scaled_error(
    kind: OperatorKind,
    params: &OperatorParams,
    coeffs: &[f64],
    x: f64,
) -> Result<f64> {
    if coeffs.len() > 5 {
        return Err(Error::Domain("polynomial degree above 4".into()));
    }
    let mut diff = Vec::with_capacity(coeffs.len());
    for (k, &a) in coeffs.iter().enumerate() {
        diff.push(a * (raw_moment(kind, params, k as u32, x)? - x.powi(k as i32)));
    }
    Ok(params.n() * crate::special::compensated_sum(diff))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub n: f64,
    pub error: f64,
    pub predicted: Option<f64>,
    /// `ln(e_prev / e) / ln(n / n_prev)`; `None` for the first row.
    pub empirical_order: Option<f64>,
}

/// Fills `empirical_order` from consecutive rows.
pub fn with_orders(mut rows: Vec<SweepResult>) -> Vec<SweepResult> {
    for i in 1..rows.len() {
        let (p, q) = (rows[i - 1], rows[i]);
        rows[i].empirical_order = empirical_order(p.n, p.error, q.n, q.error);
    }
    rows
}

pub fn empirical_order(n0: f64, e0: f64, n1: f64, e1: f64) -> Option<f64> {
    (e0 > 0.0 && e1 > 0.0 && n1 > n0).then(|| (e0 / e1).ln() / (n1 / n0).ln())
}

/// Largest `|L_n f(x) - f(x)|` over `xs` for each `n` at fixed `c` and `β`.
pub fn convergence_sweep(
    kind: OperatorKind,
    c: f64,
    beta: f64,
    f: &TestFunction,
    xs: &[f64],
    n_values: &[f64],
    cfg: &EvalConfig,
) -> Result<Vec<SweepResult>> {
    let mut ns = n_values.to_vec();
    ns.sort_by(f64::total_cmp);
    let rows = ns
        .iter()
        .map(|&n| {
            let params = OperatorParams::new(n, c, beta)?;
            let error = error_at(kind, &params, f, xs, cfg)?
                .into_iter()
                .fold(0.0, f64::max);
            Ok(SweepResult {
                n,
                error,
                predicted: None,
                empirical_order: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(with_orders(rows))
}

/// Scaled distances between displayed main terms and exact moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplayGapRecord {
    pub n: f64,
    /// `n |display(t³) - D(t³)|` with the display as printed.
    pub t3_gap: f64,
    /// The same with the sign of the leading `(1-β) x n` term flipped.
    pub t3_gap_sign_flipped: f64,
    /// `n |display(t⁴) - D(t⁴)|`
    pub t4_gap: f64,
    /// `n μ*₄`
    pub king_mu4_scaled: f64,
}

pub fn display_gap_sweep(
    c: f64,
    beta: f64,
    x: f64,
    n_values: &[f64],
) -> Result<Vec<DisplayGapRecord>> {
    let mut ns = n_values.to_vec();
    ns.sort_by(f64::total_cmp);
    ns.iter()
        .map(|&n| {
            let p = OperatorParams::new(n, c, beta)?;
            let exact3 = d_moment_exact(&p, 3, x)?;
            let display3 = d_moment_display(&p, 3, x)?;
            let q = 1.0 - beta;
            // flipping the sign of -(1-β)xn adds 2(1-β)xn times the common factor
            let common =
                n * n * x * x / (q.powi(4) * (n - 2.0 * c) * (n - 3.0 * c) * (n - 4.0 * c));
            let flipped3 = display3 + 2.0 * q * x * n * common;
            Ok(DisplayGapRecord {
                n,
                t3_gap: n * (display3 - exact3).abs(),
                t3_gap_sign_flipped: n * (flipped3 - exact3).abs(),
                t4_gap: n * (d_moment_display(&p, 4, x)? - d_moment_exact(&p, 4, x)?).abs(),
                king_mu4_scaled: n * king_central_moments(&p, x)?.mu4,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{lookup, TestFunction};

    fn cfg() -> EvalConfig {
        EvalConfig::default()
    }

    #[test]
    fn modulus1_examples() {
        let c = cfg();
        assert_eq!(
            modulus1(&TestFunction::affine(3.0, 0.0), 2.0, 0.4, &c).unwrap(),
            0.0
        );
        let w = modulus1(&TestFunction::monomial(1), 2.0, 0.5, &c).unwrap();
        assert!((w - 0.5).abs() < 1e-15);
        let w = modulus1(&lookup("abs-shift").unwrap(), 2.0, 0.3, &c).unwrap();
        assert!((w - 0.3).abs() < 1e-15);
        // saturated window
        let w = modulus1(&TestFunction::monomial(2), 1.0, 5.0, &c).unwrap();
        assert!((w - 1.0).abs() < 1e-15);
    }

    #[test]
    fn modulus1_matches_brute_force() {
        let f = lookup("sin").unwrap();
        let (a, delta) = (3.0, 0.7);
        let c = EvalConfig {
            grid_points: 61,
            ..cfg()
        };
        let est = modulus1(&f, a, delta, &c).unwrap();
        let m = 3000;
        let mut brute: f64 = 0.0;
        for i in 0..=m {
            let x = a * i as f64 / m as f64;
            for j in i..=m {
                let t = a * j as f64 / m as f64;
                if t - x > delta {
                    break;
                }
                brute = brute.max((f.eval(t) - f.eval(x)).abs());
            }
        }
        // steepest stretch of sin on [0, 3] starts at 0
        let exact = delta.sin();
        assert!(
            est <= exact + 1e-15 && est > exact - 1e-6,
            "{est} vs {exact}"
        );
        assert!(brute <= exact + 1e-15 && (brute - est).abs() < 1e-5);
    }

    #[test]
    fn modulus2_examples() {
        let c = cfg();
        let sin = lookup("sin").unwrap();
        let h = 0.3;
        let w = modulus2(&sin, h, &c).unwrap();
        let exact = 4.0 * (h / 2.0).sin().powi(2);
        assert!(
            w <= exact + 1e-15 && w > exact * (1.0 - 1e-4),
            "{w} {exact}"
        );
        assert!(w <= h * h);
        let exp = lookup("exp-neg").unwrap();
        let w = modulus2(&exp, 0.1, &c).unwrap();
        assert!((w - (1.0 - (-0.1f64).exp()).powi(2)).abs() < 1e-15);
        assert!(matches!(
            modulus2(&TestFunction::monomial(1), 0.1, &c),
            Err(Error::UnboundedFunction(_))
        ));
    }

    #[test]
    fn direct_bound_sin() {
        let p = OperatorParams::new(100.0, 1.0, 0.05).unwrap();
        let chk = check_direct_bound(&p, &lookup("sin").unwrap(), 1.0, &cfg()).unwrap();
        assert!(chk.holds(), "{chk:?}");
        assert!(chk.m_min.unwrap() <= DEFAULT_DIRECT_CONSTANT);
        let konst = TestFunction::affine(2.0, 0.0).bounded(2.0);
        let chk = check_direct_bound(&p, &konst, 1.0, &cfg()).unwrap();
        assert!(chk.lhs < 1e-12 && chk.rhs == 0.0);
    }

    #[test]
    fn direct_bound_sweep_decreases() {
        let f = lookup("sin").unwrap();
        let checks: Vec<_> = [25.0, 50.0, 100.0, 200.0]
            .iter()
            .map(|&n| {
                check_direct_bound(&OperatorParams::new(n, 1.0, 0.0).unwrap(), &f, 1.0, &cfg())
                    .unwrap()
            })
            .collect();
        for w in checks.windows(2) {
            assert!(w[1].lhs < w[0].lhs && w[1].rhs < w[0].rhs);
        }
    }

    #[test]
    fn rate_bound_square() {
        let p = OperatorParams::new(50.0, 1.0, 0.0).unwrap();
        let c = EvalConfig {
            grid_points: 101,
            ..cfg()
        };
        let pts = rate_bound_points(&p, &TestFunction::monomial(2), 1.0, &c).unwrap();
        assert!(pts.iter().all(BoundCheck::holds));
        assert_eq!(pts[0].lhs, 0.0);
        let chk = check_rate_bound(&p, &TestFunction::monomial(0), 2.0, &c).unwrap();
        assert!(chk.lhs < 1e-12 && chk.holds());
    }

    #[test]
    fn weighted_linear_majorant() {
        let sched: Vec<_> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&n| OperatorParams::new(n, 1.0, 1.0 / n).unwrap())
            .collect();
        let est = weighted_norm_error(&sched, &TestFunction::monomial(1), 0.0, &cfg()).unwrap();
        for (e, p) in est.iter().zip(&sched) {
            let k = linear_majorant(p);
            assert!(
                e.value <= k && (e.value - k / 2.0).abs() < 1e-9 * k,
                "{e:?} {k}"
            );
        }
        assert!(est.windows(2).all(|w| w[1].value < w[0].value));
    }

    #[test]
    fn voronovskaja_limits() {
        let sq = TestFunction::monomial(2);
        assert_eq!(
            voronovskaja_limit(OperatorKind::JainBaskakov, 1.0, 0.0, &sq, 1.0).unwrap(),
            7.0
        );
        assert_eq!(
            voronovskaja_limit(OperatorKind::KingJainBaskakov, 1.0, 0.0, &sq, 1.0).unwrap(),
            3.0
        );
        let e = lookup("exp-neg").unwrap();
        let lim = voronovskaja_limit(OperatorKind::KingJainBaskakov, 1.0, 0.0, &e, 1.0).unwrap();
        assert!((lim - 1.5 / std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn exact_scaled_error_converges() {
        let mut prev = f64::INFINITY;
        for k in 6..=12 {
            let n = f64::from(1u32 << k);
            let p = OperatorParams::new(n, 1.0, 0.0).unwrap();
            let gap = (exact_scaled_error(OperatorKind::JainBaskakov, &p, &[0.0, 0.0, 1.0], 1.0)
                .unwrap()
                - 7.0)
                .abs();
            assert!(gap < prev / 1.9, "n = {n}");
            prev = gap;
        }
        let p = OperatorParams::new(64.0, 1.0, 1.0 / 4096.0).unwrap();
        let lin =
            exact_scaled_error(OperatorKind::KingJainBaskakov, &p, &[2.0, -3.0], 1.7).unwrap();
        assert!(lin.abs() < 1e-12);
    }

    #[test]
    fn sweep_orders() {
        let rows = with_orders(vec![
            SweepResult {
                n: 10.0,
                error: 0.4,
                predicted: None,
                empirical_order: None,
            },
            SweepResult {
                n: 20.0,
                error: 0.1,
                predicted: None,
                empirical_order: None,
            },
        ]);
        assert!(rows[0].empirical_order.is_none());
        assert!((rows[1].empirical_order.unwrap() - 2.0).abs() < 1e-12);
    }
}
