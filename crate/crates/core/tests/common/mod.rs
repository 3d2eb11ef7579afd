//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use proptest::prelude::*;

/// Root of `g` in `[lo, hi]` by plain bisection (`g(lo)` and `g(hi)` differ in sign).
pub fn bisect_root(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let glo = g(lo);
    assert!(glo * g(hi) < 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0) == (glo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The larger root of `ln r = eps r`.
pub fn log_linear_root(k: f64, eps: f64) -> f64 {
    // k ln r = eps r; the larger root lies beyond the maximum at r = k/eps
    bisect_root(|r| k * r.ln() - eps * r, k / eps, 1e8)
}

/// Log measure of the union of raw intervals, by checking the midpoint of
/// each elementary piece between sorted endpoints.
pub fn union_measure(families: &[&[[f64; 2]]], combine: impl Fn(&[bool]) -> bool) -> f64 {
    let mut pts: Vec<f64> = families
        .iter()
        .flat_map(|f| f.iter().flat_map(|iv| *iv))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = 0.0;
    for w in pts.windows(2) {
        let mid = (w[0] * w[1]).sqrt();
        let member: Vec<bool> = families
            .iter()
            .map(|f| f.iter().any(|&[a, b]| a <= mid && mid <= b))
            .collect();
        if combine(&member) {
            total += (w[1] / w[0]).ln();
        }
    }
    total
}

/// Up to 8 intervals in `[1, 1e6]`, possibly overlapping.
pub fn family() -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((0.0..6.0f64, 0.0..2.0f64), 0..8).prop_map(|v| {
        v.into_iter()
            .map(|(s, w)| {
                let a = 10f64.powf(s);
                [a, (a * 10f64.powf(w)).min(1e6)]
            })
            .filter(|[a, b]| b > a)
            .collect()
    })
}

/// `S = union over m <= m_max of [r_m, r_m^2]` for a sequence of radii.
pub fn squares_family(radii: &[f64]) -> Vec<[f64; 2]> {
    radii.iter().map(|&r| [r, r * r]).collect()
}
