use std::f64::consts::TAU;

use growthlab::expr::{eval_at, parse, Expr};
use growthlab::ExtComplex;
use num_complex::Complex64;
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::Z),
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| Expr::constant(Complex64::new(re, im))),
    ]
}

/// Small trees over the entire node set (no `Div`, no `Sqrt`).
fn entire() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), 1i32..4).prop_map(|(a, n)| Expr::pow(a, n)),
            inner
                .clone()
                .prop_map(|a| Expr::exp(Expr::mul(Expr::real(0.3), a))),
            inner.clone().prop_map(Expr::cos),
            inner.prop_map(Expr::sin),
        ]
    })
}

/// Trees that may also divide, take square roots and use negative powers.
fn general() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::div(a, b)),
            (inner.clone(), -3i32..4).prop_map(|(a, n)| Expr::pow(a, n)),
            inner.clone().prop_map(Expr::sqrt),
            inner.clone().prop_map(Expr::exp),
            inner.prop_map(Expr::cos),
        ]
    })
}

fn point(max: f64) -> impl Strategy<Value = Complex64> {
    (0.0..max, 0.0..TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

/// `f'(z)` from the Cauchy integral over `|w - z| = rho` with `n` nodes,
/// accumulated in extended range, with `log2(max |f| / rho)` on the circle
/// (the scale of its rounding error).
fn cauchy_derivative(f: &Expr, z: Complex64, rho: f64, n: usize) -> Option<(ExtComplex, f64)> {
    let mut sum = ExtComplex::ZERO;
    let mut top = f64::NEG_INFINITY;
    for k in 0..n {
        let t = TAU * k as f64 / n as f64;
        let u = Complex64::from_polar(1.0, t);
        let v = eval_at(f, z + rho * u).ok()?;
        if let Ok(l) = v.log2_abs() {
            top = top.max(l);
        }
        sum = sum + v * ExtComplex::from_complex(u.conj());
    }
    let d = sum.try_div(ExtComplex::from_f64(n as f64 * rho)).ok()?;
    Some((d, top - rho.log2()))
}

/// `|a - b| / max(1, |b|, 2^floor)`.
fn scaled_error(a: ExtComplex, b: ExtComplex, floor: f64) -> f64 {
    let d = a - b;
    if d.is_zero() {
        return 0.0;
    }
    let scale = b.log2_abs().unwrap_or(0.0).max(0.0).max(floor);
    (d.log2_abs().unwrap() - scale).exp2()
}

/// Cauchy radius small enough that `f` changes by about a factor `e`.
fn radius_for(f: &Expr, z: Complex64) -> Option<f64> {
    let h = 1e-6;
    let a = eval_at(f, z).ok()?;
    let b = eval_at(f, z + h).ok()?;
    let rate = ExtComplex::rel_diff(a, b) / h;
    rate.is_finite().then(|| (1.0 / (1.0 + rate)).min(0.5))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn derivative_matches_cauchy_oracle(f in entire(), z in point(10.0)) {
        let rho = radius_for(&f, z);
        prop_assume!(rho.is_some());
        let rho = rho.unwrap();
        let (a, b) = (cauchy_derivative(&f, z, rho, 128), cauchy_derivative(&f, z, rho / 2.0, 128));
        prop_assume!(a.is_some() && b.is_some());
        let ((oracle, fa), (half, fb)) = (a.unwrap(), b.unwrap());
        let floor = fa.max(fb);
        // functions that vary too fast for the circle leave the two radii apart
        prop_assume!(scaled_error(oracle, half, floor) <= 1e-10);
        let d = eval_at(&f.diff(), z).unwrap();
        let err = scaled_error(oracle, d, floor);
        prop_assert!(err <= 1e-8, "f = {f}, z = {z}, f' = {d}, error {err:e}");
    }

    #[test]
    fn derivative_with_quotients_and_roots(f in general(), z in point(10.0)) {
        // keep the circle inside one holomorphic region: two radii must agree
        let rho = radius_for(&f, z).map(|r| r.min(0.05));
        prop_assume!(rho.is_some());
        let rho = rho.unwrap();
        let (a, b) = (cauchy_derivative(&f, z, rho, 128), cauchy_derivative(&f, z, rho / 2.0, 128));
        prop_assume!(a.is_some() && b.is_some());
        let ((a, fa), (b, fb)) = (a.unwrap(), b.unwrap());
        let floor = fa.max(fb);
        prop_assume!(scaled_error(a, b, floor) <= 1e-10);
        let d = eval_at(&f.diff(), z);
        prop_assume!(d.is_ok());
        let err = scaled_error(b, d.unwrap(), floor);
        prop_assert!(err <= 1e-8, "f = {f}, z = {z}, error {err:e}");
    }

    #[test]
    fn display_round_trips(f in general(), points in prop::collection::vec(point(10.0), 100)) {
        let text = f.to_string();
        let g = parse(&text).unwrap();
        for z in points {
            match (eval_at(&f, z), eval_at(&g, z)) {
                (Ok(a), Ok(b)) => prop_assert!(ExtComplex::rel_diff(a, b) <= 1e-15, "{text} at {z}: {a} vs {b}"),
                (Err(a), Err(b)) => prop_assert_eq!(a, b),
                (a, b) => prop_assert!(false, "{text} at {z}: {a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn evaluation_respects_sums_and_products(f in entire(), g in entire(), z in point(10.0)) {
        let (a, b) = (eval_at(&f, z), eval_at(&g, z));
        prop_assume!(a.is_ok() && b.is_ok());
        let (a, b) = (a.unwrap(), b.unwrap());
        let sum = Expr::Add(Box::new(f.clone()), Box::new(g.clone()));
        let prod = Expr::Mul(Box::new(f), Box::new(g));
        prop_assert_eq!(eval_at(&sum, z).unwrap(), a + b);
        prop_assert_eq!(eval_at(&prod, z).unwrap(), a * b);
    }
}

#[test]
fn cos_sqrt_is_continuous_across_the_cut() {
    let f = parse("cos(sqrt(z))").unwrap();
    for x in [-0.5, -3.0, -40.0] {
        let above = eval_at(&f, Complex64::new(x, 1e-12)).unwrap();
        let below = eval_at(&f, Complex64::new(x, -1e-12)).unwrap();
        assert!(ExtComplex::rel_diff(above, below) < 1e-10, "x = {x}");
    }
}
