//! Command-line flags, the optional TOML config file, and their merge into a [`RunConfig`].

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use jbk_core::analysis::TheoremId;
use jbk_core::{EvalConfig, OperatorKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "jbk",
    version,
    about = "Evaluate Jain, Jain-Baskakov and King-type operators and check their convergence"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandName,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    /// Evaluate an operator at a list of points
    Eval,
    /// Closed-form moments against numerical ones
    Moments,
    /// Error of the operator as n grows
    Converge,
    /// n (L_n f - f) against its predicted limit
    Voronovskaja,
    /// Check the direct or rate-of-convergence estimate
    Bound,
    /// Weighted-norm error along beta_n = k/n
    Weighted,
}

impl CommandName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandName::Eval => "eval",
            CommandName::Moments => "moments",
            CommandName::Converge => "converge",
            CommandName::Voronovskaja => "voronovskaja",
            CommandName::Bound => "bound",
            CommandName::Weighted => "weighted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theorem {
    Direct,
    Rate,
}

impl From<Theorem> for TheoremId {
    fn from(t: Theorem) -> Self {
        match t {
            Theorem::Direct => TheoremId::Direct,
            Theorem::Rate => TheoremId::Rate,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// TOML file with any of the options below (flags and JBK_* variables win)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// jain, jain-baskakov or king
    #[arg(long, global = true)]
    pub operator: Option<OperatorKind>,
    /// Registry function: e0..e4, exp-neg, sin, recip-sq, abs-shift, t-exp-neg
    #[arg(long, global = true)]
    pub function: Option<String>,
    #[arg(long, global = true)]
    pub n: Option<f64>,
    #[arg(long, global = true)]
    pub c: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Comma-separated evaluation points
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    pub points: Option<Vec<f64>>,
    /// Single evaluation point
    #[arg(long, global = true)]
    pub x: Option<f64>,
    /// Right end of the interval [0, a]
    #[arg(long, global = true)]
    pub a: Option<f64>,
    /// Limit of n * beta_n in the Jain-Baskakov Voronovskaja sweep
    #[arg(long, global = true)]
    pub l: Option<f64>,
    /// Exponent in the (1 + x^2)^(1 + lambda) weight
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Comma-separated values of n for sweeps
    #[arg(long = "n-values", global = true, value_delimiter = ',', num_args = 1..)]
    pub n_values: Option<Vec<f64>>,
    #[arg(long, global = true, value_enum)]
    pub theorem: Option<Theorem>,
    /// Constant M of the direct estimate
    #[arg(long = "direct-constant", global = true)]
    pub direct_constant: Option<f64>,
    /// beta_n = k / n in the weighted sweep
    #[arg(long = "beta-scale", global = true)]
    pub beta_scale: Option<f64>,
    /// Largest final gap accepted by the Voronovskaja sweep
    #[arg(long = "gap-tol", global = true)]
    pub gap_tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output prefix; writes <prefix>.csv or <prefix>.json and <prefix>.plot.dat
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Perturb each point by up to this amount (uniform, seeded)
    #[arg(long, global = true)]
    pub jitter: Option<f64>,
    #[arg(long = "tail-eps", global = true, env = "JBK_TAIL_EPS")]
    pub tail_eps: Option<f64>,
    #[arg(long = "quad-rel-tol", global = true, env = "JBK_QUAD_REL_TOL")]
    pub quad_rel_tol: Option<f64>,
    #[arg(long = "quad-max-nodes", global = true, env = "JBK_QUAD_MAX_NODES")]
    pub quad_max_nodes: Option<usize>,
    #[arg(long = "grid-points", global = true, env = "JBK_GRID_POINTS")]
    pub grid_points: Option<usize>,
    #[arg(long = "domain-cap", global = true, env = "JBK_DOMAIN_CAP")]
    pub domain_cap: Option<f64>,
}

/// Keys accepted in the `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub operator: Option<OperatorKind>,
    pub function: Option<String>,
    pub n: Option<f64>,
    pub c: Option<f64>,
    pub beta: Option<f64>,
    pub points: Option<Vec<f64>>,
    pub x: Option<f64>,
    pub a: Option<f64>,
    pub l: Option<f64>,
    pub lambda: Option<f64>,
    pub n_values: Option<Vec<f64>>,
    pub theorem: Option<Theorem>,
    pub direct_constant: Option<f64>,
    pub beta_scale: Option<f64>,
    pub gap_tol: Option<f64>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jitter: Option<f64>,
    pub tail_eps: Option<f64>,
    pub quad_rel_tol: Option<f64>,
    pub quad_max_nodes: Option<usize>,
    pub grid_points: Option<usize>,
    pub domain_cap: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandName,
    pub operator: OperatorKind,
    pub function: String,
    pub n: f64,
    pub c: f64,
    pub beta: f64,
    pub points: Vec<f64>,
    pub x: f64,
    pub a: f64,
    pub l: f64,
    pub lambda: f64,
    pub n_values: Vec<f64>,
    pub theorem: Theorem,
    pub direct_constant: f64,
    pub beta_scale: f64,
    pub gap_tol: f64,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub jitter: f64,
    pub eval: EvalConfig,
}

fn pow2(lo: u32, hi: u32) -> Vec<f64> {
    (lo..=hi).map(|k| f64::from(1u32 << k)).collect()
}

impl RunConfig {
    pub fn resolve(command: CommandName, opts: &Options) -> CliResult<Self> {
        let file = match &opts.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        macro_rules! pick {
            ($field:ident, $default:expr) => {
                opts.$field
                    .clone()
                    .or(file.$field.clone())
                    .unwrap_or_else(|| $default)
            };
        }
        let default_function = match command {
            CommandName::Bound => "sin",
            CommandName::Eval => "exp-neg",
            CommandName::Weighted => "e1",
            _ => "e2",
        };
        let default_n_values = match command {
            CommandName::Weighted => vec![10.0, 31.0, 100.0, 316.0, 1000.0],
            CommandName::Voronovskaja => pow2(6, 12),
            _ => pow2(4, 9),
        };
        let defaults = EvalConfig::default();
        let cfg = RunConfig {
            command,
            operator: pick!(operator, OperatorKind::JainBaskakov),
            function: pick!(function, default_function.to_string()),
            n: pick!(n, 50.0),
            c: pick!(c, 1.0),
            beta: pick!(beta, 0.0),
            points: pick!(points, vec![0.0, 0.5, 1.0, 2.0]),
            x: pick!(x, 1.0),
            a: pick!(a, 1.0),
            l: pick!(l, 0.0),
            lambda: pick!(lambda, 0.0),
            n_values: pick!(n_values, default_n_values),
            theorem: pick!(theorem, Theorem::Rate),
            direct_constant: pick!(direct_constant, jbk_core::analysis::DEFAULT_DIRECT_CONSTANT),
            beta_scale: pick!(beta_scale, 1.0),
            gap_tol: pick!(gap_tol, 0.05),
            format: pick!(format, Format::Csv),
            output: opts.output.clone().or(file.output.clone()),
            seed: pick!(seed, 0),
            jitter: pick!(jitter, 0.0),
            eval: EvalConfig {
                tail_eps: pick!(tail_eps, defaults.tail_eps),
                quad_rel_tol: pick!(quad_rel_tol, defaults.quad_rel_tol),
                quad_max_nodes: pick!(quad_max_nodes, defaults.quad_max_nodes),
                grid_points: pick!(grid_points, defaults.grid_points),
                domain_cap: pick!(domain_cap, defaults.domain_cap),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        self.eval
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if jbk_core::functions::lookup(&self.function).is_none() {
            return Err(CliError::Config(format!(
                "unknown function `{}`; known: {}",
                self.function,
                jbk_core::functions::REGISTRY_NAMES.join(", ")
            )));
        }
        if self.points.is_empty() {
            return Err(CliError::Config("at least one point is required".into()));
        }
        let sweep = matches!(
            self.command,
            CommandName::Converge | CommandName::Voronovskaja | CommandName::Weighted
        );
        if sweep && self.n_values.len() < 2 {
            return Err(CliError::Config(
                "a sweep needs at least two values of n".into(),
            ));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(CliError::Config("jitter must be finite and >= 0".into()));
        }
        Ok(())
    }

    /// The configured points, each moved by a seeded uniform offset in
    /// `[-jitter, jitter]` and clamped at 0.
    pub fn jittered_points(&self) -> Vec<f64> {
        if self.jitter == 0.0 {
            return self.points.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.points
            .iter()
            .map(|&x| (x + rng.gen_range(-self.jitter..=self.jitter)).max(0.0))
            .collect()
    }
}
