//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so the
//! lines always show up in `cargo test` output.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use jbk_core::analysis::{
    display_gap_sweep, linear_majorant, rate_bound_points, voronovskaja_sweep, weighted_norm_error,
    VoronovskajaRecord,
};
use jbk_core::functions::{lookup, TestFunction};
use jbk_core::kernels::basis_mass_adaptive;
use jbk_core::moments::{
    central_from_raw, central_moment, d_moment_exact, d_mu1, d_mu2, king_central_moments,
    raw_moment,
};
use jbk_core::{EvalConfig, Evaluator, OperatorKind, OperatorParams};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn cfg() -> EvalConfig {
    EvalConfig::default()
}

fn params(n: f64, c: f64, beta: f64) -> OperatorParams {
    OperatorParams::new(n, c, beta).unwrap()
}

fn eval(kind: OperatorKind, p: OperatorParams, f: &TestFunction, x: f64) -> f64 {
    Evaluator::new(kind, p, f.clone(), cfg())
        .unwrap()
        .eval(x)
        .unwrap()
        .value
}

fn pow2(lo: u32, hi: u32) -> Vec<f64> {
    (lo..=hi).map(|k| f64::from(1u32 << k)).collect()
}

fn basis_normalization() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for beta in [0.0, 0.1, 0.3, 0.6] {
        for n in [5.0, 20.0, 100.0] {
            for x in [0.1, 1.0, 5.0] {
                let (mass, _) = basis_mass_adaptive(&params(n, 1.0, beta), x, &cfg()).unwrap();
                worst = worst.max(1.0 - mass);
                if !(1.0 - 1e-10..=1.0).contains(&mass) {
                    bad.push(format!("beta={beta} n={n} x={x}: {mass}"));
                }
            }
        }
    }
    Outcome::new(
        bad.is_empty(),
        format!("36 cases, largest 1 - mass {worst:.2e}; {}", bad.join(", ")),
    )
}

/// (n, c) pairs with c in {0.5, 1, 2} and n a multiple of c up to 60.
const GRID_NC: [(f64, f64); 7] = [
    (10.0, 0.5),
    (25.0, 0.5),
    (10.0, 1.0),
    (25.0, 1.0),
    (60.0, 1.0),
    (25.0, 2.0),
    (60.0, 2.0),
];

fn moment_equivalence() -> Outcome {
    let (mut checked, mut worst) = (0, 0.0f64);
    let mut bad = Vec::new();
    for kind in OperatorKind::ALL {
        for (n, c) in GRID_NC {
            for beta in [0.0, 0.3, 0.6] {
                let p = params(n, c, beta);
                for x in [0.1, 1.0, 3.0] {
                    for m in 0..=4u32 {
                        if kind != OperatorKind::Jain && !p.exceeds(m.max(2) + 1) {
                            continue;
                        }
                        let exact = raw_moment(kind, &p, m, x).unwrap();
                        let num = eval(kind, p, &TestFunction::monomial(m), x);
                        let rel = (num - exact).abs() / exact.abs();
                        worst = worst.max(rel);
                        checked += 1;
                        if rel > 1e-7 {
                            bad.push(format!(
                                "{kind} n={n} c={c} beta={beta} x={x} m={m}: {rel:.2e}"
                            ));
                        }
                    }
                }
            }
        }
    }
    Outcome::new(
        bad.is_empty(),
        format!(
            "{checked} moments, worst relative error {worst:.2e}; {}",
            bad.join(", ")
        ),
    )
}

fn king_exactness() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut mu1_nonzero = 0;
    let xs: Vec<f64> = (0..=20).map(|i| 0.25 * f64::from(i)).collect();
    for (n, c) in GRID_NC {
        for beta in [0.0, 0.3, 0.6] {
            let p = params(n, c, beta);
            if !p.exceeds(5) {
                continue;
            }
            for (k, target) in [(0u32, None), (1, Some(()))] {
                let ev = Evaluator::new(
                    OperatorKind::KingJainBaskakov,
                    p,
                    TestFunction::monomial(k),
                    cfg(),
                )
                .unwrap();
                for r in ev.eval_grid(&xs).unwrap() {
                    let want = if target.is_some() { r.x } else { 1.0 };
                    worst = worst.max((r.value - want).abs());
                }
            }
            for &x in &xs {
                let a = king_central_moments(&p, x).unwrap().mu1;
                let b = central_moment(OperatorKind::KingJainBaskakov, &p, 1, x).unwrap();
                if a != 0.0 || b != 0.0 {
                    mu1_nonzero += 1;
                }
            }
        }
    }
    Outcome::new(
        worst <= 1e-9 && mu1_nonzero == 0,
        format!("largest |D*(e_k) - e_k| = {worst:.2e}; nonzero mu*_1 values: {mu1_nonzero}"),
    )
}

fn central_consistency() -> Outcome {
    let (mut worst_num, mut worst_disp) = (0.0f64, 0.0f64);
    for (n, c) in GRID_NC {
        for beta in [0.0, 0.3, 0.6] {
            let p = params(n, c, beta);
            if !p.exceeds(5) {
                continue;
            }
            for x in [0.1, 1.0, 3.0] {
                for k in [1u32, 2, 4] {
                    let expansion = central_moment(OperatorKind::JainBaskakov, &p, k, x).unwrap();
                    let num = eval(
                        OperatorKind::JainBaskakov,
                        p,
                        &TestFunction::shifted_power(x, k),
                        x,
                    );
                    worst_num = worst_num.max((num - expansion).abs() / expansion.abs());
                }
                let raw = |j| d_moment_exact(&p, j, x).unwrap();
                let (mu1, mu2) = (central_from_raw(raw, 1, x), central_from_raw(raw, 2, x));
                worst_disp = worst_disp.max((d_mu1(&p, x).unwrap() - mu1).abs() / mu1.abs());
                worst_disp = worst_disp.max((d_mu2(&p, x).unwrap() - mu2).abs() / mu2.abs());
            }
        }
    }
    Outcome::new(
        worst_num <= 1e-6 && worst_disp <= 1e-10,
        format!("numeric vs expansion {worst_num:.2e} (tol 1e-6); mu1/mu2 closed forms vs expansion {worst_disp:.2e} (tol 1e-10)"),
    )
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn display_gap() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (beta, x) in [(0.0, 1.0), (0.1, 1.0), (0.3, 2.0)] {
        let rows = display_gap_sweep(1.0, beta, x, &pow2(6, 13)).unwrap();
        let t4: Vec<f64> = rows.iter().map(|r| r.t4_gap).collect();
        let king: Vec<f64> = rows.iter().map(|r| r.king_mu4_scaled).collect();
        let t3: Vec<f64> = rows.iter().map(|r| r.t3_gap).collect();
        let flipped: Vec<f64> = rows.iter().map(|r| r.t3_gap_sign_flipped).collect();
        pass &= strictly_decreasing(&t4) && strictly_decreasing(&king);
        notes.push(format!(
            "beta={beta} x={x}: n|t4 gap| {:.2e}->{:.2e}, n mu*_4 {:.2e}->{:.2e}, t3 as printed {:.2e}->{:.2e} ({}), sign-flipped {:.2e}->{:.2e}",
            t4[0],
            t4[t4.len() - 1],
            king[0],
            king[king.len() - 1],
            t3[0],
            t3[t3.len() - 1],
            if strictly_decreasing(&t3) { "decreasing" } else { "persistent gap recorded" },
            flipped[0],
            flipped[flipped.len() - 1],
        ));
    }
    Outcome::new(pass, notes.join("; "))
}

/// Ratios of successive gaps over the last three doublings.
fn last_ratios(rows: &[VoronovskajaRecord]) -> Vec<f64> {
    rows[rows.len() - 4..]
        .windows(2)
        .map(|w| w[0].gap / w[1].gap)
        .collect()
}

fn voronovskaja_check(kind: OperatorKind, ls: &[f64]) -> (bool, Vec<String>) {
    let mut pass = true;
    let mut notes = Vec::new();
    for name in ["e2", "e3", "exp-neg"] {
        let f = lookup(name).unwrap();
        for &l in ls {
            let rows = voronovskaja_sweep(kind, 1.0, l, &f, 1.0, &pow2(7, 13), &cfg()).unwrap();
            let ratios = last_ratios(&rows);
            let ok = ratios.iter().all(|&r| r >= 1.7);
            pass &= ok;
            let last = rows.last().unwrap();
            notes.push(format!(
                "{name} l={l}: limit {:.6}, final gap {:.2e}, ratios {}",
                last.predicted_limit,
                last.gap,
                ratios
                    .iter()
                    .map(|r| format!("{r:.3}"))
                    .collect::<Vec<_>>()
                    .join("/")
            ));
        }
    }
    (pass, notes)
}

fn voronovskaja_d() -> Outcome {
    let (pass, notes) = voronovskaja_check(OperatorKind::JainBaskakov, &[0.0, 0.5]);
    Outcome::new(pass, notes.join("; "))
}

fn voronovskaja_king() -> Outcome {
    let (mut pass, mut notes) = voronovskaja_check(OperatorKind::KingJainBaskakov, &[0.0]);
    let affine = TestFunction::affine(2.0, -3.0);
    let rows = voronovskaja_sweep(
        OperatorKind::KingJainBaskakov,
        1.0,
        0.0,
        &affine,
        1.0,
        &pow2(6, 13),
        &cfg(),
    )
    .unwrap();
    let worst = rows
        .iter()
        .map(|r| r.scaled_error.abs() / (1e-8 * r.n))
        .fold(0.0, f64::max);
    pass &= worst <= 1.0 && rows.iter().all(|r| r.predicted_limit == 0.0);
    notes.push(format!(
        "affine: max |scaled error| / (1e-8 n) = {worst:.2e}"
    ));
    Outcome::new(pass, notes.join("; "))
}

fn rate_bound() -> Outcome {
    let (mut checks, mut violations, mut least) = (0, 0, f64::INFINITY);
    for name in ["e2", "recip-sq", "abs-shift"] {
        let f = lookup(name).unwrap();
        for a in [1.0, 2.0] {
            for n in [25.0, 50.0, 100.0] {
                for beta in [0.0, 0.1] {
                    for chk in rate_bound_points(&params(n, 1.0, beta), &f, a, &cfg()).unwrap() {
                        checks += 1;
                        least = least.min(chk.slack);
                        if chk.slack.is_nan() || chk.slack < -1e-9 {
                            violations += 1;
                        }
                    }
                }
            }
        }
    }
    Outcome::new(
        violations == 0,
        format!("{checks} pointwise checks, {violations} violations, least slack {least:.3e}"),
    )
}

fn weighted_trend() -> Outcome {
    let schedule: Vec<OperatorParams> = (0..=6)
        .map(|k| {
            let n = 10f64.powf(1.0 + 0.5 * f64::from(k)).round();
            params(n, 1.0, 1.0 / n)
        })
        .collect();
    let est = weighted_norm_error(&schedule, &TestFunction::monomial(1), 0.0, &cfg()).unwrap();
    let values: Vec<f64> = est.iter().map(|e| e.value).collect();
    let below = est
        .iter()
        .zip(&schedule)
        .all(|(e, p)| e.value <= linear_majorant(p));
    let ratio: Vec<String> = est
        .iter()
        .zip(&schedule)
        .map(|(e, p)| format!("{:.4}", e.value / linear_majorant(p)))
        .collect();
    Outcome::new(
        below && strictly_decreasing(&values),
        format!(
            "n = 10..10^4, norm {:.3e} -> {:.3e}, norm/majorant = {}",
            values[0],
            values[values.len() - 1],
            ratio.join(",")
        ),
    )
}

const GOLDEN: [(&str, &[&str]); 6] = [
    (
        "eval",
        &[
            "eval",
            "--operator",
            "jain-baskakov",
            "--function",
            "exp-neg",
            "--n",
            "100",
            "--c",
            "1",
            "--beta",
            "0.1",
            "--points",
            "0,0.5,1,2",
        ],
    ),
    (
        "moments",
        &[
            "moments",
            "--operator",
            "jain-baskakov",
            "--n",
            "10",
            "--c",
            "1",
            "--beta",
            "0",
            "--x",
            "1",
        ],
    ),
    (
        "converge",
        &[
            "converge",
            "--operator",
            "jain-baskakov",
            "--function",
            "e1",
            "--c",
            "1",
            "--beta",
            "0.1",
            "--points",
            "1",
            "--n-values",
            "16,32,64,128",
        ],
    ),
    (
        "voronovskaja",
        &[
            "voronovskaja",
            "--operator",
            "king",
            "--function",
            "e2",
            "--c",
            "1",
            "--x",
            "1",
            "--n-values",
            "64,128,256,512,1024,2048,4096",
        ],
    ),
    (
        "bound",
        &[
            "bound",
            "--theorem",
            "rate",
            "--function",
            "recip-sq",
            "--a",
            "2",
            "--n",
            "50",
            "--c",
            "1",
            "--beta",
            "0",
            "--grid-points",
            "21",
        ],
    ),
    (
        "weighted",
        &[
            "weighted",
            "--function",
            "e1",
            "--c",
            "1",
            "--lambda",
            "0",
            "--n-values",
            "10,100,1000",
            "--grid-points",
            "81",
        ],
    ),
];

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
}

fn run_cli(args: &[&str], prefix: &Path) -> (i32, Vec<u8>, Vec<u8>) {
    let status = Command::new(env!("CARGO_BIN_EXE_jbk"))
        .args(args)
        .arg("--output")
        .arg(prefix)
        .env_remove("JBK_TAIL_EPS")
        .env_remove("JBK_QUAD_REL_TOL")
        .env_remove("JBK_QUAD_MAX_NODES")
        .env_remove("JBK_GRID_POINTS")
        .env_remove("JBK_DOMAIN_CAP")
        .status()
        .unwrap();
    let mut table = prefix.as_os_str().to_owned();
    table.push(".csv");
    let mut plot = prefix.as_os_str().to_owned();
    plot.push(".plot.dat");
    (
        status.code().unwrap_or(-1),
        std::fs::read(table).unwrap_or_default(),
        std::fs::read(plot).unwrap_or_default(),
    )
}

fn determinism_and_golden() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut problems = Vec::new();
    for (name, args) in GOLDEN {
        let (code_a, csv_a, plot_a) = run_cli(args, &dir.path().join(format!("{name}-a")));
        let (code_b, csv_b, plot_b) = run_cli(args, &dir.path().join(format!("{name}-b")));
        if code_a != 0 || code_b != 0 {
            problems.push(format!("{name}: exit {code_a}/{code_b}"));
        }
        if csv_a != csv_b || plot_a != plot_b {
            problems.push(format!("{name}: repeated runs differ"));
        }
        let golden_csv =
            std::fs::read(golden_dir().join(format!("{name}.csv"))).unwrap_or_default();
        let golden_plot =
            std::fs::read(golden_dir().join(format!("{name}.plot.dat"))).unwrap_or_default();
        if csv_a != golden_csv || plot_a != golden_plot {
            problems.push(format!("{name}: differs from golden file"));
        }
    }
    Outcome::new(
        problems.is_empty(),
        format!(
            "{} subcommands run twice and compared byte for byte; {}",
            GOLDEN.len(),
            problems.join(", ")
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("basis normalization", basis_normalization),
        ("moment oracle equivalence", moment_equivalence),
        ("King-type exactness", king_exactness),
        ("central-moment consistency", central_consistency),
        ("asymptotic-display gap", display_gap),
        ("Voronovskaja limit, Jain-Baskakov", voronovskaja_d),
        ("Voronovskaja limit, King-type", voronovskaja_king),
        ("rate-of-convergence bound", rate_bound),
        ("weighted convergence trend", weighted_trend),
        ("determinism and golden files", determinism_and_golden),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Outcome::new(false, format!("panicked: {:?}", e.downcast_ref::<String>()))
        });
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name} [{:.1}s]: {}",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            outcome.detail.trim_end_matches("; ")
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
