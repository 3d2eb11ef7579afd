use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numeric::{bisect, linear_fit};

use super::characteristic;
use super::circle::max_modulus;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthComparison {
    pub radii: Vec<f64>,
    /// `ln M(r, g) - ln M(r, f)` per radius.
    pub log_ratio: Vec<f64>,
    /// Fitted `delta` in `ln M(g) - ln M(f) ~ -r^delta` over the top decade.
    pub decay_exponent: Option<f64>,
    pub confirmed: bool,
}

/// Tests `|g| = o(M(r, f))` by checking that `ln M(g) - ln M(f)` decays like
/// `-r^delta` with `delta > 0` over the top decade of the grid.
pub fn growth_compare(g: &Expr, f: &Expr, r_grid: &[f64]) -> Result<GrowthComparison> {
    if r_grid.len() < 3 || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "need at least 3 increasing radii".into(),
        ));
    }
    let log_ratio = r_grid
        .par_iter()
        .map(|&r| Ok(max_modulus(g, r, 64)?.0 - max_modulus(f, r, 64)?.0))
        .collect::<Result<Vec<f64>>>()?;
    let top = r_grid[r_grid.len() - 1] / 10.0;
    let idx: Vec<usize> = (0..r_grid.len())
        .filter(|&i| r_grid[i] >= top * (1.0 - 1e-12))
        .collect();
    let negative = idx.iter().all(|&i| log_ratio[i] < 0.0);
    let decay_exponent = (negative && idx.len() >= 3).then(|| {
        let x: Vec<f64> = idx.iter().map(|&i| r_grid[i].ln()).collect();
        let y: Vec<f64> = idx.iter().map(|&i| (-log_ratio[i]).ln()).collect();
        linear_fit(&x, &y).0
    });
    let confirmed = log_ratio.iter().all(|&d| d < 0.0) && decay_exponent.is_some_and(|d| d > 0.0);
    Ok(GrowthComparison {
        radii: r_grid.to_vec(),
        log_ratio,
        decay_exponent,
        confirmed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TLowerBound {
    pub rho: f64,
    pub epsilon: f64,
    pub window: [f64; 2],
    /// Share of the window's log measure where `T(r) >= r^{rho - eps}`.
    pub passing_fraction: f64,
    pub passed: bool,
}

/// Checks `T(r, f) >= r^{rho - eps}` over the top two decades of the grid;
/// passes when the inequality holds on at least 30% of that window by log
/// measure. Crossings between grid radii are located by bisection.
pub fn t_lower_bound_check(
    f: &Expr,
    rho: f64,
    epsilon: f64,
    r_grid: &[f64],
) -> Result<TLowerBound> {
    let hi = r_grid[r_grid.len() - 1];
    let lo = (hi / 100.0).max(r_grid[0]);
    let radii: Vec<f64> = r_grid.iter().copied().filter(|&r| r >= lo).collect();
    if radii.len() < 2 {
        return Err(Error::Precondition(
            "need at least 2 radii in the top two decades".into(),
        ));
    }
    let holds =
        |r: f64| -> Result<bool> { Ok(characteristic(f, r)?.ln() >= (rho - epsilon) * r.ln()) };
    let flags = radii
        .iter()
        .map(|&r| holds(r))
        .collect::<Result<Vec<bool>>>()?;
    let mut measure = 0.0;
    for (w, fl) in radii.windows(2).zip(flags.windows(2)) {
        let (a, b) = (w[0], w[1]);
        let width = (b / a).ln();
        measure += match (fl[0], fl[1]) {
            (true, true) => width,
            (false, false) => 0.0,
            (start, _) => {
                let mut err = None;
                let (x, y) = bisect(
                    |t| {
                        holds(t).unwrap_or_else(|e| {
                            err.get_or_insert(e);
                            false
                        })
                    },
                    a,
                    b,
                    start,
                    50,
                );
                if let Some(e) = err {
                    return Err(e);
                }
                let c = (x * y).sqrt();
                if start {
                    (c / a).ln()
                } else {
                    (b / c).ln()
                }
            }
        };
    }
    let passing_fraction = measure / (hi / radii[0]).ln();
    Ok(TLowerBound {
        rho,
        epsilon,
        window: [radii[0], hi],
        passing_fraction,
        passed: passing_fraction >= 0.3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::numeric::log_grid;

    #[test]
    fn exponential_is_small_against_gaussian() {
        let c = growth_compare(
            &parse("exp(z)").unwrap(),
            &parse("exp(z^2)").unwrap(),
            &log_grid(10.0, 1e3, 12),
        )
        .unwrap();
        assert!(c.confirmed);
        // oracle: ln-ratio is r - r^2
        for (r, d) in c.radii.iter().zip(&c.log_ratio) {
            assert!((d - (r - r * r)).abs() < 1e-9 * r * r);
        }
        assert!((c.decay_exponent.unwrap() - 2.0).abs() < 0.05);
    }

    #[test]
    fn identical_functions_are_not_separated() {
        let f = parse("exp(z^2)").unwrap();
        let c = growth_compare(&f, &f, &log_grid(10.0, 1e3, 12)).unwrap();
        assert!(!c.confirmed);
        assert!(c.log_ratio.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn polynomial_is_small_against_exponential() {
        let c = growth_compare(
            &parse("z^2").unwrap(),
            &parse("exp(z)").unwrap(),
            &log_grid(10.0, 1e3, 12),
        )
        .unwrap();
        assert!(c.confirmed);
        for (r, d) in c.radii.iter().zip(&c.log_ratio) {
            assert!((d - (2.0 * r.ln() - r)).abs() < 1e-9 * r);
        }
    }

    #[test]
    fn characteristic_lower_bound_gaussian() {
        // T = r^2/pi >= r^{1.9} exactly when r >= pi^10
        let rep = t_lower_bound_check(
            &parse("exp(z^2)").unwrap(),
            2.0,
            0.1,
            &log_grid(10.0, 1e6, 24),
        )
        .unwrap();
        let expected = (1e6 / std::f64::consts::PI.powi(10)).ln() / (1e6 / rep.window[0]).ln();
        assert!((rep.passing_fraction - expected).abs() < 1e-6, "{rep:?}");
        assert!(rep.passed);
    }
}
