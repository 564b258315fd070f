use jbk_core::analysis::{
    self, check_direct_bound_with, convergence_sweep, linear_majorant, rate_bound_points,
    voronovskaja_sweep, weighted_norm_error, BoundCheck, SweepResult, VoronovskajaRecord,
    WeightedNormEstimate,
};
use jbk_core::moments::{moment_report, raw_moment, FormulaClass, MomentReport, MomentType};
use jbk_core::operators::eval_grid;
use jbk_core::{functions, OperatorKind, OperatorParams};
use serde::{Deserialize, Serialize};

use crate::config::{CommandName, RunConfig, Theorem};
use crate::error::{CliError, CliResult};
use crate::output::{opt_real, real, render, Rendered, Report, Row};

/// Largest rel_error tolerated on an exact moment row.
pub const MOMENT_TOLERANCE: f64 = 1e-6;

/// Gaps below this are treated as converged in the Voronovskaja trend check.
pub const GAP_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub x: f64,
    pub value: f64,
    pub f_x: f64,
    pub error: f64,
    pub v_terms_used: u64,
    pub tail_bound: f64,
    pub quad_error: f64,
}

impl Row for EvalRow {
    const HEADER: &'static [&'static str] = &[
        "x",
        "value",
        "f_x",
        "error",
        "v_terms_used",
        "tail_bound",
        "quad_error",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            real(self.x),
            real(self.value),
            real(self.f_x),
            real(self.error),
            self.v_terms_used.to_string(),
            real(self.tail_bound),
            real(self.quad_error),
        ]
    }
}

impl Row for MomentReport {
    const HEADER: &'static [&'static str] = &[
        "operator",
        "moment",
        "order",
        "x",
        "closed_form",
        "numeric",
        "rel_error",
        "formula_class",
        "error",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            self.kind.as_str().to_string(),
            match self.moment {
                MomentType::Raw => "raw",
                MomentType::Central => "central",
            }
            .to_string(),
            self.order.to_string(),
            real(self.x),
            opt_real(self.closed_form),
            opt_real(self.numeric),
            opt_real(self.rel_error),
            match self.formula_class {
                FormulaClass::Exact => "exact",
                FormulaClass::Asymptotic => "asymptotic",
                FormulaClass::Reference => "reference",
            }
            .to_string(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

impl Row for SweepResult {
    const HEADER: &'static [&'static str] = &["n", "error", "predicted", "empirical_order"];
    fn fields(&self) -> Vec<String> {
        vec![
            real(self.n),
            real(self.error),
            opt_real(self.predicted),
            opt_real(self.empirical_order),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoronovskajaRow {
    #[serde(flatten)]
    pub record: VoronovskajaRecord,
    /// Empirical order of the gap.
    pub empirical_order: Option<f64>,
}

impl Row for VoronovskajaRow {
    const HEADER: &'static [&'static str] = &[
        "n",
        "beta_n",
        "scaled_error",
        "predicted_limit",
        "gap",
        "noise",
        "empirical_order",
    ];
    fn fields(&self) -> Vec<String> {
        let r = &self.record;
        vec![
            real(r.n),
            real(r.beta_n),
            real(r.scaled_error),
            real(r.predicted_limit),
            real(r.gap),
            real(r.noise),
            opt_real(self.empirical_order),
        ]
    }
}

impl Row for BoundCheck {
    const HEADER: &'static [&'static str] = &[
        "theorem", "x", "a", "lhs", "rhs", "slack", "constant", "m_min",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            self.theorem.as_str().to_string(),
            real(self.x),
            opt_real(self.a),
            real(self.lhs),
            real(self.rhs),
            real(self.slack),
            real(self.constant),
            opt_real(self.m_min),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedRow {
    #[serde(flatten)]
    pub estimate: WeightedNormEstimate,
    /// `2c/(n-2c) + nβ/((n-2c)(1-β))`, reported for `f = t` with `λ = 0`.
    pub majorant: Option<f64>,
    pub empirical_order: Option<f64>,
}

impl Row for WeightedRow {
    const HEADER: &'static [&'static str] = &[
        "n",
        "beta",
        "value",
        "lambda",
        "domain_cap",
        "tail_bound",
        "majorant",
        "empirical_order",
    ];
    fn fields(&self) -> Vec<String> {
        let e = &self.estimate;
        vec![
            real(e.n),
            real(e.beta),
            real(e.value),
            real(e.lambda),
            real(e.domain_cap),
            real(e.tail_bound),
            opt_real(self.majorant),
            opt_real(self.empirical_order),
        ]
    }
}

fn params(cfg: &RunConfig) -> CliResult<OperatorParams> {
    Ok(OperatorParams::new(cfg.n, cfg.c, cfg.beta)?)
}

fn function(cfg: &RunConfig) -> CliResult<functions::TestFunction> {
    Ok(functions::require(&cfg.function)?)
}

fn monomial_degree(name: &str) -> Option<u32> {
    name.strip_prefix('e')
        .and_then(|d| d.parse().ok())
        .filter(|&d| d <= 4)
}

pub fn run(cfg: &RunConfig) -> CliResult<Rendered> {
    match cfg.command {
        CommandName::Eval => render(cfg, eval(cfg)?),
        CommandName::Moments => render(cfg, moments(cfg)?),
        CommandName::Converge => render(cfg, converge(cfg)?),
        CommandName::Voronovskaja => render(cfg, voronovskaja(cfg)?),
        CommandName::Bound => render(cfg, bound(cfg)?),
        CommandName::Weighted => render(cfg, weighted(cfg)?),
    }
}

pub fn eval(cfg: &RunConfig) -> CliResult<Report<EvalRow>> {
    let f = function(cfg)?;
    let xs = cfg.jittered_points();
    let rows: Vec<EvalRow> = eval_grid(cfg.operator, &params(cfg)?, &f, &xs, &cfg.eval)?
        .into_iter()
        .map(|r| {
            let f_x = f.eval(r.x);
            EvalRow {
                x: r.x,
                value: r.value,
                f_x,
                error: (r.value - f_x).abs(),
                v_terms_used: r.v_terms_used,
                tail_bound: r.est_tail_bound,
                quad_error: r.quad_error_est,
            }
        })
        .collect();
    Ok(Report {
        plot: rows.iter().map(|r| (r.x, r.value)).collect(),
        plot_columns: ("x", "value"),
        rows,
        failures: Vec::new(),
    })
}

pub fn moments(cfg: &RunConfig) -> CliResult<Report<MomentReport>> {
    let rows = moment_report(cfg.operator, &params(cfg)?, cfg.x, &cfg.eval)?;
    let failures = rows
        .iter()
        .filter(|r| r.exceeds(MOMENT_TOLERANCE))
        .map(|r| {
            format!(
                "{:?} moment of order {}: rel_error {:e} > {MOMENT_TOLERANCE:e}",
                r.moment,
                r.order,
                r.rel_error.unwrap_or(f64::NAN)
            )
        })
        .collect();
    let plot = rows
        .iter()
        .filter(|r| r.moment == MomentType::Raw && r.formula_class == FormulaClass::Exact)
        .filter_map(|r| r.numeric.map(|v| (f64::from(r.order), v)))
        .collect();
    Ok(Report {
        rows,
        plot,
        plot_columns: ("order", "numeric"),
        failures,
    })
}

fn nonincreasing(values: &[(f64, f64)], floor: f64, what: &str) -> Vec<String> {
    values
        .windows(2)
        .filter(|w| w[1].1 > floor && w[1].1 > w[0].1 * (1.0 + 1e-9))
        .map(|w| {
            format!(
                "{what} grew from {:e} at n = {} to {:e} at n = {}",
                w[0].1, w[0].0, w[1].1, w[1].0
            )
        })
        .collect()
}

pub fn converge(cfg: &RunConfig) -> CliResult<Report<SweepResult>> {
    let f = function(cfg)?;
    let xs = cfg.jittered_points();
    let mut rows = convergence_sweep(
        cfg.operator,
        cfg.c,
        cfg.beta,
        &f,
        &xs,
        &cfg.n_values,
        &cfg.eval,
    )?;
    if let Some(k) = monomial_degree(&cfg.function) {
        for row in &mut rows {
            let p = OperatorParams::new(row.n, cfg.c, cfg.beta)?;
            let mut worst: f64 = 0.0;
            for &x in &xs {
                worst = worst.max((raw_moment(cfg.operator, &p, k, x)? - x.powi(k as i32)).abs());
            }
            row.predicted = Some(worst);
        }
    }
    let plot: Vec<_> = rows.iter().map(|r| (r.n, r.error)).collect();
    Ok(Report {
        failures: nonincreasing(&plot, 0.0, "error"),
        rows,
        plot,
        plot_columns: ("n", "error"),
    })
}

pub fn voronovskaja(cfg: &RunConfig) -> CliResult<Report<VoronovskajaRow>> {
    if cfg.operator == OperatorKind::Jain {
        return Err(CliError::Config(
            "voronovskaja needs --operator jain-baskakov or king".into(),
        ));
    }
    let f = function(cfg)?;
    let records = voronovskaja_sweep(
        cfg.operator,
        cfg.c,
        cfg.l,
        &f,
        cfg.x,
        &cfg.n_values,
        &cfg.eval,
    )?;
    let mut rows: Vec<VoronovskajaRow> = records
        .iter()
        .map(|&record| VoronovskajaRow {
            record,
            empirical_order: None,
        })
        .collect();
    for i in 1..rows.len() {
        let (p, q) = (rows[i - 1].record, rows[i].record);
        rows[i].empirical_order = analysis::empirical_order(p.n, p.gap, q.n, q.gap);
    }
    let plot: Vec<_> = records.iter().map(|r| (r.n, r.gap)).collect();
    let mut failures = nonincreasing(&plot, GAP_FLOOR, "gap");
    let last = records.last().expect("validated sweep length");
    if last.gap > cfg.gap_tol {
        failures.push(format!(
            "final gap {:e} exceeds {:e}",
            last.gap, cfg.gap_tol
        ));
    }
    Ok(Report {
        rows,
        plot,
        plot_columns: ("n", "gap"),
        failures,
    })
}

pub fn bound(cfg: &RunConfig) -> CliResult<Report<BoundCheck>> {
    let f = function(cfg)?;
    let p = params(cfg)?;
    let rows = match cfg.theorem {
        Theorem::Rate => rate_bound_points(&p, &f, cfg.a, &cfg.eval)?,
        Theorem::Direct => cfg
            .jittered_points()
            .iter()
            .map(|&x| check_direct_bound_with(&p, &f, x, cfg.direct_constant, &cfg.eval))
            .collect::<Result<_, _>>()?,
    };
    let failures = rows
        .iter()
        .filter(|r| !r.holds())
        .map(|r| format!("bound violated at x = {}: slack {:e}", r.x, r.slack))
        .collect();
    Ok(Report {
        plot: rows.iter().map(|r| (r.x, r.slack)).collect(),
        plot_columns: ("x", "slack"),
        rows,
        failures,
    })
}

pub fn weighted(cfg: &RunConfig) -> CliResult<Report<WeightedRow>> {
    let f = function(cfg)?;
    let mut ns = cfg.n_values.clone();
    ns.sort_by(f64::total_cmp);
    let schedule = ns
        .iter()
        .map(|&n| OperatorParams::new(n, cfg.c, cfg.beta_scale / n))
        .collect::<Result<Vec<_>, _>>()?;
    let estimates = weighted_norm_error(&schedule, &f, cfg.lambda, &cfg.eval)?;
    let linear = cfg.function == "e1" && cfg.lambda == 0.0;
    let mut rows: Vec<WeightedRow> = estimates
        .iter()
        .zip(&schedule)
        .map(|(&estimate, p)| WeightedRow {
            estimate,
            majorant: linear.then(|| linear_majorant(p)),
            empirical_order: None,
        })
        .collect();
    for i in 1..rows.len() {
        let (p, q) = (rows[i - 1].estimate, rows[i].estimate);
        rows[i].empirical_order = analysis::empirical_order(p.n, p.value, q.n, q.value);
    }
    let plot: Vec<_> = estimates.iter().map(|e| (e.n, e.value)).collect();
    let mut failures = nonincreasing(&plot, 0.0, "weighted error");
    for r in &rows {
        if let Some(m) = r.majorant.filter(|&m| r.estimate.value > m) {
            failures.push(format!(
                "weighted error {:e} above majorant {m:e} at n = {}",
                r.estimate.value, r.estimate.n
            ));
        }
    }
    Ok(Report {
        rows,
        plot,
        plot_columns: ("n", "value"),
        failures,
    })
}
