//! Test functions the operators are applied to, and the named registry the CLI exposes.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::params::EvalConfig;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function on `[0, ∞)` together with the metadata the theorems need:
/// optional derivatives, a growth bound `|f(t)| ≤ M_f (1 + t^d)`, an optional
/// sup bound, and the locations of any kinks.
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    value: RealFn,
    deriv1: Option<RealFn>,
    deriv2: Option<RealFn>,
    growth_degree: u32,
    growth_const: f64,
    sup_bound: Option<f64>,
    kinks: Vec<f64>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("growth_degree", &self.growth_degree)
            .field("growth_const", &self.growth_const)
            .field("sup_bound", &self.sup_bound)
            .field("kinks", &self.kinks)
            .finish_non_exhaustive()
    }
}

impl TestFunction {
    pub fn new<F>(name: impl Into<String>, value: F, growth_degree: u32, growth_const: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            value: Arc::new(value),
            deriv1: None,
            deriv2: None,
            growth_degree,
            growth_const,
            sup_bound: None,
            kinks: Vec::new(),
        }
    }

    pub fn with_derivatives<D1, D2>(mut self, d1: D1, d2: D2) -> Self
    where
        D1: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.deriv1 = Some(Arc::new(d1));
        self.deriv2 = Some(Arc::new(d2));
        self
    }

    /// Declares `sup |f| ≤ bound` on `[0, ∞)`.
    pub fn bounded(mut self, bound: f64) -> Self {
        self.sup_bound = Some(bound);
        self
    }

    pub fn with_kinks(mut self, kinks: Vec<f64>) -> Self {
        self.kinks = kinks;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.value)(t)
    }

    pub fn deriv1(&self, t: f64) -> Option<f64> {
        self.deriv1.as_ref().map(|d| d(t))
    }

    pub fn deriv2(&self, t: f64) -> Option<f64> {
        self.deriv2.as_ref().map(|d| d(t))
    }

    pub fn has_derivatives(&self) -> bool {
        self.deriv1.is_some() && self.deriv2.is_some()
    }

    pub fn growth_degree(&self) -> u32 {
        self.growth_degree
    }

    pub fn growth_const(&self) -> f64 {
        self.growth_const
    }

    pub fn sup_bound(&self) -> Option<f64> {
        self.sup_bound
    }

    pub fn is_bounded(&self) -> bool {
        self.sup_bound.is_some()
    }

    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    /// Upper bound for `|f(t)|` from the declared metadata.
    pub fn growth_bound(&self, t: f64) -> f64 {
        let poly = self.growth_const * (1.0 + t.abs().powi(self.growth_degree as i32));
        match self.sup_bound {
            Some(s) => s.min(poly),
            None => poly,
        }
    }

    /// Constant `M` with `|f(t)| ≤ M (1 + t²)`, when the growth degree allows one.
    pub fn rho0_const(&self) -> Option<f64> {
        // sup_t (1 + t^d) / (1 + t²) for d = 0, 1, 2
        let kappa = match self.growth_degree {
            0 | 2 => 1.0,
            1 => (1.0 + std::f64::consts::SQRT_2) / 2.0,
            _ => return None,
        };
        let from_growth = self.growth_const * kappa;
        Some(match self.sup_bound {
            Some(s) => s.min(from_growth),
            None => from_growth,
        })
    }

    /// `a·f + b·g`, with metadata combined conservatively.
    pub fn linear_combination(a: f64, f: &TestFunction, b: f64, g: &TestFunction) -> TestFunction {
        let (fv, gv) = (f.value.clone(), g.value.clone());
        let degree = f.growth_degree.max(g.growth_degree);
        let mut out = TestFunction::new(
            format!("{a}*{}+{b}*{}", f.name, g.name),
            move |t| a * fv(t) + b * gv(t),
            degree,
            a.abs() * f.growth_const + b.abs() * g.growth_const,
        );
        if let (Some(sf), Some(sg)) = (f.sup_bound, g.sup_bound) {
            out.sup_bound = Some(a.abs() * sf + b.abs() * sg);
        }
        if let (Some(f1), Some(f2), Some(g1), Some(g2)) =
            (&f.deriv1, &f.deriv2, &g.deriv1, &g.deriv2)
        {
            let (f1, g1, f2, g2) = (f1.clone(), g1.clone(), f2.clone(), g2.clone());
            out = out.with_derivatives(
                move |t| a * f1(t) + b * g1(t),
                move |t| a * f2(t) + b * g2(t),
            );
        }
        let mut kinks: Vec<f64> = f.kinks.iter().chain(&g.kinks).copied().collect();
        kinks.sort_by(f64::total_cmp);
        kinks.dedup();
        out.kinks = kinks;
        out
    }

    /// The monomial `t^k`.
    pub fn monomial(k: u32) -> TestFunction {
        let kf = f64::from(k);
        let f = TestFunction::new(format!("e{k}"), move |t: f64| t.powi(k as i32), k, 1.0)
            .with_derivatives(
                move |t: f64| {
                    if k == 0 {
                        0.0
                    } else {
                        kf * t.powi(k as i32 - 1)
                    }
                },
                move |t: f64| {
                    if k < 2 {
                        0.0
                    } else {
                        kf * (kf - 1.0) * t.powi(k as i32 - 2)
                    }
                },
            );
        if k == 0 {
            f.bounded(1.0)
        } else {
            f
        }
    }

    /// The affine function `a + b t`.
    pub fn affine(a: f64, b: f64) -> TestFunction {
        TestFunction::new(
            format!("affine({a},{b})"),
            move |t| a + b * t,
            1,
            a.abs().max(b.abs()),
        )
        .with_derivatives(move |_| b, |_| 0.0)
    }

    /// `(t - x0)^k`, used for central moments.
    pub fn shifted_power(x0: f64, k: u32) -> TestFunction {
        let kf = f64::from(k);
        // |t - x0|^k ≤ 2^{k-1} (t^k + x0^k) ≤ 2^{k-1} max(1, x0^k) (1 + t^k)
        let m = if k == 0 {
            1.0
        } else {
            2f64.powi(k as i32 - 1) * x0.abs().powi(k as i32).max(1.0)
        };
        TestFunction::new(
            format!("(t-{x0})^{k}"),
            move |t: f64| (t - x0).powi(k as i32),
            k,
            m,
        )
        .with_derivatives(
            move |t: f64| {
                if k == 0 {
                    0.0
                } else {
                    kf * (t - x0).powi(k as i32 - 1)
                }
            },
            move |t: f64| {
                if k < 2 {
                    0.0
                } else {
                    kf * (kf - 1.0) * (t - x0).powi(k as i32 - 2)
                }
            },
        )
    }

    /// Checks the declared growth bound and derivatives on a sample grid of `[0, domain_cap]`.
    pub fn validate(&self, cfg: &EvalConfig) -> Result<()> {
        let invalid = |detail: String| Error::InvalidFunction {
            name: self.name.clone(),
            detail,
        };
        let m = cfg.grid_points.max(2);
        for i in 0..m {
            let t = cfg.domain_cap * i as f64 / (m - 1) as f64;
            let v = self.eval(t);
            if !v.is_finite() {
                return Err(invalid(format!("non-finite value at t = {t}")));
            }
            let bound = self.growth_bound(t);
            if v.abs() > bound * (1.0 + 1e-12) + 1e-300 {
                return Err(invalid(format!(
                    "|f({t})| = {} exceeds declared bound {bound}",
                    v.abs()
                )));
            }
        }
        if let (Some(d1), Some(d2)) = (&self.deriv1, &self.deriv2) {
            let h = 1e-4;
            for i in 1..m {
                let t = cfg.domain_cap * i as f64 / m as f64;
                if self.kinks.iter().any(|k| (k - t).abs() < 2.0 * h) {
                    continue;
                }
                let (fm, f0, fp) = (self.eval(t - h), self.eval(t), self.eval(t + h));
                let fd1 = (fp - fm) / (2.0 * h);
                let fd2 = (fp - 2.0 * f0 + fm) / (h * h);
                let scale = 1.0 + f0.abs();
                if (fd1 - d1(t)).abs() > 1e-5 * (scale + d1(t).abs()) {
                    return Err(invalid(format!("first derivative mismatch at t = {t}")));
                }
                if (fd2 - d2(t)).abs() > 1e-5 * (scale + d2(t).abs()) {
                    return Err(invalid(format!("second derivative mismatch at t = {t}")));
                }
            }
        }
        Ok(())
    }
}

/// Names accepted by [`lookup`].
pub const REGISTRY_NAMES: [&str; 10] = [
    "e0",
    "e1",
    "e2",
    "e3",
    "e4",
    "exp-neg",
    "sin",
    "recip-sq",
    "abs-shift",
    "t-exp-neg",
];

/// The fixed function registry.
pub fn lookup(name: &str) -> Option<TestFunction> {
    let f = match name {
        "e0" => TestFunction::monomial(0),
        "e1" => TestFunction::monomial(1),
        "e2" => TestFunction::monomial(2),
        "e3" => TestFunction::monomial(3),
        "e4" => TestFunction::monomial(4),
        "exp-neg" => TestFunction::new(name, |t: f64| (-t).exp(), 0, 1.0)
            .with_derivatives(|t: f64| -(-t).exp(), |t: f64| (-t).exp())
            .bounded(1.0),
        "sin" => TestFunction::new(name, f64::sin, 0, 1.0)
            .with_derivatives(f64::cos, |t: f64| -t.sin())
            .bounded(1.0),
        "recip-sq" => TestFunction::new(name, |t: f64| 1.0 / (1.0 + t * t), 0, 1.0)
            .with_derivatives(
                |t: f64| -2.0 * t / (1.0 + t * t).powi(2),
                |t: f64| (6.0 * t * t - 2.0) / (1.0 + t * t).powi(3),
            )
            .bounded(1.0),
        "abs-shift" => {
            TestFunction::new(name, |t: f64| (t - 1.0).abs(), 1, 1.0).with_kinks(vec![1.0])
        }
        "t-exp-neg" => TestFunction::new(name, |t: f64| t * (-t).exp(), 0, 1.0)
            .with_derivatives(
                |t: f64| (1.0 - t) * (-t).exp(),
                |t: f64| (t - 2.0) * (-t).exp(),
            )
            .bounded(std::f64::consts::E.recip()),
        _ => return None,
    };
    Some(f)
}

/// Like [`lookup`] but with an error naming the known functions.
pub fn require(name: &str) -> Result<TestFunction> {
    lookup(name).ok_or_else(|| {
        Error::domain(format!(
            "unknown function `{name}`; known: {}",
            REGISTRY_NAMES.join(", ")
        ))
    })
}
