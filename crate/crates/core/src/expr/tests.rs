use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;

fn s(name: &str) -> Expr {
    Expr::symbol(name)
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(7)
}

#[test]
fn derivative_of_sine_uses_chain_rule() {
    let f0 = s("f0");
    let t = s("t");
    let e = (&f0 * &t).sin();
    assert_eq!(e.differentiate("t"), &f0 * (&f0 * &t).cos());
}

#[test]
fn derivative_of_reciprocal_product() {
    let (a, h) = (s("a"), s("h"));
    let e = Expr::one() / (&a * &h);
    let expected = -(Expr::one() / (a.pow(2) * &h));
    assert_eq!(e.differentiate("a"), expected);

    // finite-difference check at a few points
    let d = e.differentiate("a");
    for (av, hv) in [(0.7, 1.3), (-1.1, 0.4), (1.9, -0.6)] {
        let at = Assignment::from([("a", av), ("h", hv)]);
        let step = 1e-6;
        let fd = (e.eval(&at.clone().with("a", av + step)).unwrap()
            - e.eval(&at.clone().with("a", av - step)).unwrap())
            / (2.0 * step);
        let exact = d.eval(&at).unwrap();
        assert!((fd - exact).abs() <= 1e-5 * (1.0 + exact.abs()));
    }
}

#[test]
fn derivative_of_constant_is_zero() {
    assert!(Expr::ratio(3, 7).differentiate("t").is_zero());
}

#[test]
fn substitution_eliminates_symbol() {
    let (h, u) = (s("h"), s("u"));
    let e = s("h_t") + &h * s("u_x") + s("h_x") * &u;
    let mut map = BTreeMap::new();
    map.insert("h_t".to_string(), -(s("h_x") * &u + &h * s("u_x")));
    let out = e.substitute(&map).unwrap();
    assert!(out.is_zero());
    assert!(!out.contains_symbol("h_t"));
}

#[test]
fn empty_substitution_is_identity() {
    let x = s("x");
    assert_eq!(x.substitute(&BTreeMap::new()).unwrap(), x);
}

#[test]
fn substitution_into_zero_denominator_is_an_error() {
    let e = Expr::one() / (s("a") * s("h"));
    let err = e.substitute_one("a", &Expr::zero()).unwrap_err();
    assert_eq!(err, ExprError::ZeroDenominator);
}

#[test]
fn evaluation_examples() {
    let e = (s("f0") * s("t")).sin();
    assert_eq!(e.eval(&Assignment::from([("f0", 2.0), ("t", 0.0)])).unwrap(), 0.0);
    let q = Expr::one() / (s("a") * s("h"));
    assert_eq!(q.eval(&Assignment::from([("a", 2.0), ("h", 0.5)])).unwrap(), 1.0);
    let err = q.eval(&Assignment::from([("a", 2.0)])).unwrap_err();
    assert_eq!(err, ExprError::UnboundSymbol("h".into()));
    let err = q.eval(&Assignment::from([("a", 0.0), ("h", 1.0)])).unwrap_err();
    assert_eq!(err, ExprError::SingularPoint);
}

#[test]
fn pythagorean_identity_evaluates_to_one() {
    let arg = s("f0") * s("eps");
    let e = arg.cos().pow(2) + arg.sin().pow(2);
    let mut r = rng();
    for _ in 0..20 {
        let at = Assignment::from([("f0", sample_coordinate(&mut r)), ("eps", sample_coordinate(&mut r))]);
        assert!((e.eval(&at).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn zero_test_examples() {
    let mut r = rng();
    assert!(is_zero_probabilistic(&Expr::zero(), 1, 1e-9, &mut r).unwrap().is_zero());
    let x = s("x");
    let ident = x.sin().pow(2) + x.cos().pow(2) - 1;
    assert!(is_zero_probabilistic(&ident, 50, 1e-9, &mut r).unwrap().is_zero());
    let generic = s("h_x") * s("u");
    match is_zero_probabilistic(&generic, 50, 1e-9, &mut r).unwrap() {
        ZeroVerdict::NonZero { witness, value, .. } => {
            assert!(witness.get("h_x").is_some() && witness.get("u").is_some());
            assert!(value.abs() > 0.0);
        }
        ZeroVerdict::Zero => panic!("h_x*u is not identically zero"),
    }
}

#[test]
fn zero_test_reports_exhaustion_on_singular_expressions() {
    // 1/(x - x) folds at construction; use something singular everywhere numerically.
    let x = s("x");
    let e = Expr::one() / (x.sin().pow(2) + x.cos().pow(2) - 1);
    let err = is_zero_probabilistic(&e, 5, 1e-9, &mut rng());
    assert!(matches!(err, Err(ExprError::SamplingExhausted(_))) || err.is_ok());
}

#[test]
fn like_terms_collect_and_constants_fold() {
    let (x, y) = (s("x"), s("y"));
    let e = &x * 2 + &y - &x * 2 + Expr::ratio(1, 2) + Expr::ratio(1, 2);
    assert_eq!(e, &y + 1);
    let p = &x * &y * &x / &x;
    assert_eq!(p, &x * &y);
    assert_eq!((&x + &y) / (&y + &x), Expr::one());
}

#[test]
fn display_is_readable() {
    let (a, h) = (s("a"), s("h"));
    let e = -(Expr::one() / (a.pow(2) * &h));
    assert_eq!(e.to_string(), "-1/(h*a^2)");
    let f = s("f0") * (s("f0") * s("t")).cos() - s("x");
    assert_eq!(f.to_string(), "-x + f0*cos(f0*t)");
}

// ---- property suites -------------------------------------------------------

const SYMS: [&str; 4] = ["t", "x", "h", "u"];

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-4i64..=4, 1i64..=3).prop_map(|(p, q)| Expr::ratio(p, q)),
        (0usize..SYMS.len()).prop_map(|i| Expr::symbol(SYMS[i])),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), 1i32..=3).prop_map(|(a, n)| a.pow(n)),
            // denominators are kept away from zero on the sample box
            (inner.clone(), 0usize..SYMS.len())
                .prop_map(|(a, i)| a / (Expr::symbol(SYMS[i]).pow(2) + 1)),
            inner.clone().prop_map(|a| a.sin()),
            inner.prop_map(|a| a.cos()),
        ]
    })
}

fn arb_point() -> impl Strategy<Value = Assignment> {
    proptest::collection::vec(-1.5f64..1.5, SYMS.len()).prop_map(|vals| {
        let mut a = Assignment::new();
        for (s, v) in SYMS.iter().zip(vals) {
            a.set(s, v);
        }
        a
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, rng_algorithm: proptest::test_runner::RngAlgorithm::ChaCha, ..ProptestConfig::default() })]

    #[test]
    fn canonicalize_is_idempotent(e in arb_expr()) {
        let once = e.canonicalize().unwrap();
        prop_assert_eq!(&once.canonicalize().unwrap(), &once);
        prop_assert_eq!(&once, &e);
    }

    #[test]
    fn differentiation_is_linear(e1 in arb_expr(), e2 in arb_expr(), a in -3i64..=3, b in -3i64..=3, i in 0usize..SYMS.len()) {
        let s = SYMS[i];
        let (alpha, beta) = (Expr::int(a), Expr::int(b));
        let lhs = (&alpha * &e1 + &beta * &e2).differentiate(s);
        let rhs = &alpha * e1.differentiate(s) + &beta * e2.differentiate(s);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn derivative_matches_central_difference(e in arb_expr(), i in 0usize..SYMS.len(), at in arb_point()) {
        let s = SYMS[i];
        let d = e.differentiate(s);
        let x0 = at.get(s).unwrap();
        let step = 1e-6;
        let (Ok(plus), Ok(minus), Ok(exact)) = (
            e.eval(&at.clone().with(s, x0 + step)),
            e.eval(&at.clone().with(s, x0 - step)),
            d.eval(&at),
        ) else { return Ok(()); };
        let fd = (plus - minus) / (2.0 * step);
        prop_assert!((fd - exact).abs() <= 1e-5 * (1.0 + exact.abs()), "fd {} exact {} for {}", fd, exact, e);
    }

    #[test]
    fn substitution_commutes_with_evaluation(e in arb_expr(), c in arb_expr(), i in 0usize..SYMS.len(), at in arb_point()) {
        let s = SYMS[i];
        let Ok(sub) = e.substitute_one(s, &c) else { return Ok(()); };
        let Ok(cv) = c.eval(&at) else { return Ok(()); };
        let (Ok(lhs), Ok(rhs)) = (sub.eval(&at), e.eval(&at.clone().with(s, cv))) else { return Ok(()); };
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs().max(lhs.abs())) * 1e3,
            "{} vs {}", lhs, rhs);
    }
}
