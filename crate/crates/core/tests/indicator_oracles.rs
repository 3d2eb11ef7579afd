mod common;

use std::f64::consts::PI;

use growthlab::expr::parse;
use growthlab::indicator::{delta, lemma2_check, ExpPolyFactorization, PolyP};
use growthlab::numeric::log_grid;
use num_complex::Complex64;

use common::log_linear_root;

fn fac(v: &str, p: &[f64]) -> ExpPolyFactorization {
    let p = PolyP::new(p.iter().map(|&c| Complex64::new(c, 0.0)).collect()).unwrap();
    ExpPolyFactorization::new(parse(v).unwrap(), p).unwrap()
}

#[test]
fn z_exp_z_pass_radius_matches_root() {
    let grid = log_grid(2.0, 1e3, 30);
    let oracle = log_linear_root(1.0, 0.1);
    assert!((oracle - 35.77).abs() < 0.01);
    for theta in [0.0, PI] {
        let rep = lemma2_check(&fac("z", &[0.0, 1.0]), theta, 0.1, &grid).unwrap();
        let r = rep.pass_radius.unwrap();
        assert!(
            (r - oracle).abs() < 0.1 * oracle,
            "theta={theta}: {r} vs {oracle}"
        );
        assert!(
            (r - oracle).abs() < 1e-6 * oracle,
            "bisection should pin the root: {r}"
        );
    }
}

#[test]
fn exp_z_passes_everywhere() {
    let grid = log_grid(1.0, 1e3, 30);
    let rep = lemma2_check(&fac("1", &[0.0, 1.0]), 0.0, 0.1, &grid).unwrap();
    assert_eq!(rep.pass_radius, Some(1.0));
    assert!(rep.failures.is_empty());
}

#[test]
fn polynomial_factor_has_finite_pass_radius() {
    // ln|z^3 e^z| at theta = 0 is r + 3 ln r, inside (1 +- eps) r once 3 ln r <= eps r
    let grid = log_grid(1.5, 1e4, 40);
    for eps in [0.05, 0.1, 0.3] {
        let rep = lemma2_check(&fac("z^3", &[0.0, 1.0]), 0.0, eps, &grid).unwrap();
        let oracle = log_linear_root(3.0, eps);
        let r = rep.pass_radius.unwrap();
        assert!(
            (r - oracle).abs() < 1e-6 * oracle,
            "eps={eps}: {r} vs {oracle}"
        );
    }
}

#[test]
fn quadratic_exponent_uses_delta() {
    // P = z^2 with theta = pi/8: delta = cos(pi/4)
    let f = fac("1", &[0.0, 0.0, 1.0]);
    assert!((delta(&f.p, PI / 8.0) - (PI / 4.0).cos()).abs() < 1e-15);
    let rep = lemma2_check(&f, PI / 8.0, 0.1, &log_grid(1.0, 100.0, 20)).unwrap();
    assert_eq!(rep.pass_radius, Some(1.0));
    assert!((rep.delta - (PI / 4.0).cos()).abs() < 1e-15);
}

#[test]
fn zero_ray_is_an_error() {
    assert!(lemma2_check(&fac("1", &[0.0, 1.0]), PI / 2.0, 0.1, &[1.0, 2.0]).is_err());
}
