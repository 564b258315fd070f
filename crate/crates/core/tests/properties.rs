use jbk_core::analysis::{modulus1, modulus2, modulus_ladder, Modulus1Grid};
use jbk_core::functions::{lookup, TestFunction};
use jbk_core::kernels::basis_mass_adaptive;
use jbk_core::moments::{central_from_raw, d_moment_exact, d_mu1, d_mu2, raw_moment};
use jbk_core::{EvalConfig, Evaluator, OperatorKind, OperatorParams};
use proptest::prelude::*;

fn cfg() -> EvalConfig {
    EvalConfig::default()
}

fn eval(kind: OperatorKind, p: OperatorParams, f: &TestFunction, x: f64) -> f64 {
    Evaluator::new(kind, p, f.clone(), cfg())
        .unwrap()
        .eval(x)
        .unwrap()
        .value
}

fn kind_strategy() -> impl Strategy<Value = OperatorKind> {
    prop_oneof![
        Just(OperatorKind::Jain),
        Just(OperatorKind::JainBaskakov),
        Just(OperatorKind::KingJainBaskakov),
    ]
}

/// `n > 6c` so that every operator and every moment up to order 4 is defined.
fn params_strategy() -> impl Strategy<Value = OperatorParams> {
    (0.2f64..3.0, 6.5f64..40.0, 0.0f64..0.8)
        .prop_map(|(c, k, beta)| OperatorParams::new(k * c, c, beta).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn basis_mass_is_one(beta in 0.0f64..0.9, n in 1.0f64..200.0, x in 0.0f64..10.0) {
        let p = OperatorParams::new(n, 1.0, beta).unwrap();
        let (mass, _) = basis_mass_adaptive(&p, x, &cfg()).unwrap();
        prop_assert!((1.0 - 1e-10..=1.0).contains(&mass), "mass {mass}");
    }

    #[test]
    fn positivity(kind in kind_strategy(), p in params_strategy(), x in 0.0f64..5.0) {
        for name in ["abs-shift", "exp-neg", "e2", "t-exp-neg"] {
            prop_assert!(eval(kind, p, &lookup(name).unwrap(), x) >= 0.0, "{name}");
        }
    }

    #[test]
    fn linearity(kind in kind_strategy(), p in params_strategy(), x in 0.0f64..4.0, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let f = lookup("sin").unwrap();
        let g = lookup("e2").unwrap();
        let h = TestFunction::linear_combination(a, &f, b, &g);
        let lhs = eval(kind, p, &h, x);
        let rhs = a * eval(kind, p, &f, x) + b * eval(kind, p, &g, x);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn monotone_in_f(kind in kind_strategy(), p in params_strategy(), x in 0.0f64..4.0) {
        let f = lookup("exp-neg").unwrap();
        let bump = TestFunction::new("tent-sin2", |t: f64| (1.0 - (t - 2.0).abs()).max(0.0) + t.sin().powi(2), 0, 2.0)
            .bounded(2.0)
            .with_kinks(vec![1.0, 2.0, 3.0]);
        let g = TestFunction::linear_combination(1.0, &f, 1.0, &bump).bounded(3.0);
        prop_assert!(eval(kind, p, &g, x) >= eval(kind, p, &f, x));
    }

    #[test]
    fn bounded_by_sup(kind in kind_strategy(), p in params_strategy(), x in 0.0f64..6.0) {
        for name in ["sin", "recip-sq", "t-exp-neg"] {
            let f = lookup(name).unwrap();
            let v = eval(kind, p, &f, x);
            prop_assert!(v.abs() <= f.sup_bound().unwrap() * (1.0 + 1e-12), "{name}: {v}");
        }
    }

    #[test]
    fn king_preserves_affine(p in params_strategy(), x in 0.0f64..8.0, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let v = eval(OperatorKind::KingJainBaskakov, p, &TestFunction::affine(a, b), x);
        prop_assert!((v - (a + b * x)).abs() <= 1e-9 * (1.0 + x), "{v}");
    }

    #[test]
    fn numeric_moments_match_closed_forms(kind in kind_strategy(), p in params_strategy(), x in 0.0f64..4.0) {
        for m in 0..=4 {
            let exact = raw_moment(kind, &p, m, x).unwrap();
            let num = eval(kind, p, &TestFunction::monomial(m), x);
            prop_assert!((num - exact).abs() <= 1e-7 * exact.abs().max(1e-300) + 1e-300, "m={m}: {num} vs {exact}");
        }
    }

    #[test]
    fn central_displays_are_exact(p in params_strategy(), x in 0.0f64..6.0) {
        let raw = |j| d_moment_exact(&p, j, x).unwrap();
        let mu1 = central_from_raw(raw, 1, x);
        let mu2 = central_from_raw(raw, 2, x);
        let scale = raw(2).max(1.0);
        prop_assert!((d_mu1(&p, x).unwrap() - mu1).abs() <= 1e-10 * scale);
        prop_assert!((d_mu2(&p, x).unwrap() - mu2).abs() <= 1e-10 * scale);
        prop_assert!(d_mu2(&p, x).unwrap() >= 0.0);
    }

    #[test]
    fn modulus_subadditive(name in prop::sample::select(vec!["sin", "abs-shift", "e2", "recip-sq"]), delta in 0.01f64..0.5, lambda in 0.1f64..4.0) {
        let f = lookup(name).unwrap();
        let c = EvalConfig { grid_points: 201, ..cfg() };
        let grid = Modulus1Grid::new(&f, 3.0, &c).unwrap();
        let big = grid.omega(lambda * delta);
        let small = grid.omega(delta);
        prop_assert!(big <= (1.0 + lambda.ceil()) * small + grid.resolution(), "{big} vs {small}");
    }

    #[test]
    fn modulus_monotone(name in prop::sample::select(vec!["sin", "abs-shift", "exp-neg", "t-exp-neg"]), d0 in 0.01f64..0.4, step in 0.0f64..0.4) {
        let f = lookup(name).unwrap();
        let c = EvalConfig { grid_points: 201, domain_cap: 8.0, ..cfg() };
        let grid = Modulus1Grid::new(&f, 2.0, &c).unwrap();
        prop_assert!(grid.omega(d0) <= grid.omega(d0 + step) + grid.resolution());
        let w2a = modulus2(&f, d0, &c);
        if f.is_bounded() {
            let (a, b) = (w2a.unwrap(), modulus2(&f, d0 + step, &c).unwrap());
            prop_assert!(a <= b + 1e-3 * b.max(1e-12), "{a} vs {b}");
        }
    }
}

#[test]
fn ladder_is_nondecreasing() {
    let deltas: Vec<f64> = (1..=12).map(|k| 0.05 * f64::from(k)).collect();
    for name in ["sin", "abs-shift", "exp-neg", "recip-sq", "t-exp-neg"] {
        let f = lookup(name).unwrap();
        let ladder = modulus_ladder(&f, 2.0, &deltas, &cfg()).unwrap();
        for w in ladder.windows(2) {
            assert!(w[1].omega1 >= w[0].omega1, "{name}");
            if let (Some(a), Some(b)) = (w[0].omega2, w[1].omega2) {
                assert!(b >= a, "{name}");
            }
        }
    }
}

#[test]
fn modulus_of_constant_is_zero() {
    let f = TestFunction::affine(4.0, 0.0).bounded(4.0);
    for d in [0.01, 0.3, 2.0] {
        assert_eq!(modulus1(&f, 2.0, d, &cfg()).unwrap(), 0.0);
        assert_eq!(modulus2(&f, d, &cfg()).unwrap(), 0.0);
    }
}
