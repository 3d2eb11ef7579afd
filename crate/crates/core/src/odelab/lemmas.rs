use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, EvalError, Result};
use crate::expr::{eval, Expr};
use crate::growth::{characteristic, circle_max, circle_min, max_modulus, on_circle};
use crate::numeric::bisect;
use crate::radialsets::{DensityProfile, RadialSet};

/// Parameters shared by the lemma checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheckConfig {
    /// Derivative pairs `(k, j)` with `k > j >= 0`.
    pub gamma: Vec<(usize, usize)>,
    pub alpha: f64,
    pub epsilon: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub l0: f64,
    pub zeta: f64,
    #[serde(rename = "R0")]
    pub r0: f64,
}

impl Default for LemmaCheckConfig {
    fn default() -> Self {
        LemmaCheckConfig {
            gamma: vec![(1, 0)],
            alpha: 2.0,
            epsilon: 0.1,
            c: 0.5,
            l0: 0.1,
            zeta: 0.1,
            r0: 1.0,
        }
    }
}

impl LemmaCheckConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Invalid(format!("lemma config: {what}")));
        if self.gamma.iter().any(|&(k, j)| k <= j) {
            return bad("every pair needs k > j");
        }
        if self.alpha.is_nan() || self.alpha <= 1.0 {
            return bad("alpha must exceed 1");
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad("epsilon must be positive");
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return bad("C must lie in (0, 1)");
        }
        if !(self.l0 > 0.0 && self.l0 < 0.5) {
            return bad("l0 must lie in (0, 1/2)");
        }
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            return bad("zeta must lie in (0, 1)");
        }
        if !self.r0.is_finite() {
            return bad("R0 must be finite");
        }
        Ok(())
    }
}

fn check_grid(r_grid: &[f64]) -> Result<()> {
    if r_grid.is_empty() || r_grid[0] <= 0.0 || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "radius grid must be positive and increasing".into(),
        ));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GundersenMode {
    /// `|f^(k)/f^(j)| <= r^{(k-j)(rho - 1 + eps)}`.
    FiniteOrder,
    /// `|f^(k)/f^(j)| <= c (T(alpha r)/r ln^alpha r ln T(alpha r))^(k-j)`.
    Characteristic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairReport {
    pub k: usize,
    pub j: usize,
    /// Calibrated `ln c` in characteristic mode.
    pub ln_c: Option<f64>,
    pub violations: RadialSet,
    pub log_measure: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GundersenReport {
    pub mode: GundersenMode,
    pub rho: Option<f64>,
    pub epsilon: f64,
    pub pairs: Vec<PairReport>,
    /// Union over all pairs.
    pub violations: RadialSet,
    pub log_measure: f64,
    pub note: Option<&'static str>,
}

/// Logarithmic-derivative bound along the grid.
///
/// `rho = None` means the order exceeded the estimator threshold; the check
/// then switches to the characteristic form, with `c` calibrated as the
/// largest observed ratio at the three smallest radii above 1. Maximal runs
/// of failing grid radii become violation intervals whose ends are refined
/// by bisection against the neighbouring passing radii.
pub fn gundersen_check(
    f: &Expr,
    cfg: &LemmaCheckConfig,
    rho: Option<f64>,
    r_grid: &[f64],
) -> Result<GundersenReport> {
    cfg.validate()?;
    check_grid(r_grid)?;
    if cfg.gamma.iter().any(|&(k, _)| k > 2) {
        return Err(Error::Precondition("derivative pairs need k <= 2".into()));
    }
    let radii: Vec<f64> = r_grid
        .iter()
        .copied()
        .filter(|&r| r >= 1.0 && r >= cfg.r0)
        .collect();
    let mode = if rho.is_some() {
        GundersenMode::FiniteOrder
    } else {
        GundersenMode::Characteristic
    };
    let mut pairs = Vec::new();
    for &(k, j) in &cfg.gamma {
        pairs.push(check_pair(f, cfg, rho, &radii, k, j)?);
    }
    let violations = pairs
        .iter()
        .fold(RadialSet::empty(), |acc, p| acc.union(&p.violations));
    let log_measure = violations.log_measure();
    Ok(GundersenReport {
        mode,
        rho,
        epsilon: cfg.epsilon,
        pairs,
        violations,
        log_measure,
        note: (mode == GundersenMode::Characteristic)
            .then_some("constant c calibrated from the three smallest radii above 1"),
    })
}

fn check_pair(
    f: &Expr,
    cfg: &LemmaCheckConfig,
    rho: Option<f64>,
    radii: &[f64],
    k: usize,
    j: usize,
) -> Result<PairReport> {
    let fk = f.nth_derivative(k);
    let fj = f.nth_derivative(j);
    let kj = (k - j) as f64;
    let log_ratio = |r: f64| -> Result<f64> {
        let (v, _) = circle_max(r, 64, |theta| {
            let z = on_circle(r, theta);
            let den = eval(&fj, z)?;
            if den.is_zero() {
                return Err(EvalError::DivisionByZero);
            }
            Ok(eval(&fk, z)?.ln_abs_or_neg_inf() - den.ln_abs()?)
        })?;
        Ok(v)
    };
    // log of the bound without the constant
    let base = |r: f64| -> Result<f64> {
        match rho {
            Some(rho) => Ok(kj * (rho - 1.0 + cfg.epsilon) * r.ln()),
            None => {
                let t = characteristic(f, cfg.alpha * r)?;
                if !(t > 1.0 && r > 1.0) {
                    return Ok(f64::NAN);
                }
                Ok(kj * (t.ln() - r.ln() + cfg.alpha * r.ln().ln() + t.ln().ln()))
            }
        }
    };
    let ln_c = match rho {
        Some(_) => None,
        None => {
            let mut c = f64::NEG_INFINITY;
            for &r in radii.iter().filter(|&&r| r > 1.0).take(3) {
                let b = base(r)?;
                if b.is_finite() {
                    c = c.max(log_ratio(r)? - b);
                }
            }
            if !c.is_finite() {
                return Err(Error::Precondition(
                    "cannot calibrate c: T(alpha r) <= 1 at the smallest radii".into(),
                ));
            }
            Some(c)
        }
    };
    let fails = |r: f64| -> Result<bool> {
        let b = base(r)? + ln_c.unwrap_or(0.0);
        // an undefined bound (T <= 1) counts as a violation
        Ok(b.is_nan() || log_ratio(r)? > b + 1e-12 * b.abs().max(1.0))
    };
    let flags = radii
        .par_iter()
        .map(|&r| fails(r))
        .collect::<Result<Vec<bool>>>()?;
    let mut intervals = Vec::new();
    let mut i = 0;
    while i < radii.len() {
        if !flags[i] {
            i += 1;
            continue;
        }
        let mut e = i;
        while e + 1 < radii.len() && flags[e + 1] {
            e += 1;
        }
        let lo = if i == 0 {
            radii[0]
        } else {
            edge(&fails, radii[i - 1], radii[i], false)?
        };
        let hi = if e + 1 == radii.len() {
            radii[e]
        } else {
            edge(&fails, radii[e], radii[e + 1], true)?
        };
        intervals.push([lo, hi]);
        i = e + 1;
    }
    let violations = RadialSet::from_intervals(intervals)?;
    Ok(PairReport {
        k,
        j,
        ln_c,
        log_measure: violations.log_measure(),
        violations,
    })
}

/// Transition point between `a` and `b` where `fails` changes from
/// `lo_fails`.
fn edge<F>(fails: &F, a: f64, b: f64, lo_fails: bool) -> Result<f64>
where
    F: Fn(f64) -> Result<bool>,
{
    let mut err = None;
    let (x, y) = bisect(
        |r| match fails(r) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                lo_fails
            }
        },
        a,
        b,
        lo_fails,
        50,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(0.5 * (x + y)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub r: f64,
    pub theta: f64,
    /// `ln |f/f'|` at the witness.
    pub ln_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KwonReport {
    /// Smallest grid radius from which every grid radius has a witness.
    pub pass_from: Option<f64>,
    pub witnesses: Vec<Witness>,
    /// Grid radii without a witness.
    pub missing: Vec<f64>,
}

/// Searches each circle for a point with `|f/f'| <= r`.
pub fn kwon_check(f: &Expr, r_grid: &[f64]) -> Result<KwonReport> {
    check_grid(r_grid)?;
    let df = f.diff();
    if super::vanishes(&df)? {
        return Err(Error::Precondition("f' vanishes identically".into()));
    }
    let rows = r_grid
        .par_iter()
        .map(|&r| {
            let (v, theta) = circle_min(r, 256, |theta| {
                let z = on_circle(r, theta);
                let d = eval(&df, z)?;
                if d.is_zero() {
                    return Ok(f64::INFINITY);
                }
                Ok(eval(f, z)?.ln_abs_or_neg_inf() - d.ln_abs()?)
            })?;
            if v == f64::INFINITY {
                return Err(Error::OnCircle {
                    r,
                    theta,
                    source: EvalError::DivisionByZero,
                });
            }
            let ok = v <= r.ln() + 1e-12 * r.ln().abs().max(1.0);
            Ok((
                Witness {
                    r,
                    theta,
                    ln_ratio: v,
                },
                ok,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pass_from = None;
    for (w, ok) in rows.iter().rev() {
        if !ok {
            break;
        }
        pass_from = Some(w.r);
    }
    let missing = rows
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(w, _)| w.r)
        .collect();
    let witnesses = rows
        .into_iter()
        .filter(|(_, ok)| *ok)
        .map(|(w, _)| w)
        .collect();
    Ok(KwonReport {
        pass_from,
        witnesses,
        missing,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WangLaineReport {
    #[serde(rename = "C")]
    pub c: f64,
    pub l0: f64,
    /// Runs of consecutive passing grid radii.
    pub pass_set: RadialSet,
    pub passing_radii: Vec<f64>,
    /// Share of grid radii that pass.
    pub fraction: f64,
    /// Log-density ratios of the pass set at the grid radii above 1.
    pub density: Option<DensityProfile>,
    /// Lower density estimate over the upper half of the grid (by log).
    pub lower_density_estimate: Option<f64>,
    pub zeta: f64,
}

/// Tests `ln|f(r e^{i theta})| >= -5 pi + (1 - C) ln M(r)` at 33 equispaced
/// angles in `[theta_r - l0, theta_r + l0]` for each grid radius.
pub fn wang_laine_check(
    f: &Expr,
    cfg: &LemmaCheckConfig,
    r_grid: &[f64],
) -> Result<WangLaineReport> {
    cfg.validate()?;
    check_grid(r_grid)?;
    let pass = r_grid
        .par_iter()
        .map(|&r| {
            let (log_m, theta_r) = max_modulus(f, r, 64)?;
            let bound = -5.0 * PI + (1.0 - cfg.c) * log_m;
            for i in 0..33 {
                let theta = theta_r - cfg.l0 + 2.0 * cfg.l0 * i as f64 / 32.0;
                let l = eval(f, on_circle(r, theta))
                    .map_err(|source| Error::OnCircle { r, theta, source })?
                    .ln_abs_or_neg_inf();
                if l < bound - 1e-12 * bound.abs().max(1.0) {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect::<Result<Vec<bool>>>()?;
    let mut runs = Vec::new();
    let mut i = 0;
    while i < r_grid.len() {
        if pass[i] {
            let s = i;
            while i + 1 < r_grid.len() && pass[i + 1] {
                i += 1;
            }
            runs.push([r_grid[s], r_grid[i]]);
        }
        i += 1;
    }
    let pass_set = RadialSet::from_intervals(runs)?;
    let passing_radii: Vec<f64> = r_grid
        .iter()
        .zip(&pass)
        .filter(|(_, p)| **p)
        .map(|(r, _)| *r)
        .collect();
    let above: Vec<f64> = r_grid.iter().copied().filter(|&r| r > 1.0).collect();
    let density = if above.is_empty() {
        None
    } else {
        Some(pass_set.log_density_profile(&above)?)
    };
    let lower_density_estimate = density.as_ref().and_then(|d| {
        let (lo, hi) = (above[0], above[above.len() - 1]);
        d.lower_estimate((lo * hi).sqrt())
    });
    Ok(WangLaineReport {
        c: cfg.c,
        l0: cfg.l0,
        fraction: passing_radii.len() as f64 / r_grid.len() as f64,
        pass_set,
        passing_radii,
        density,
        lower_density_estimate,
        zeta: cfg.zeta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::numeric::log_grid;

    fn cfg(gamma: Vec<(usize, usize)>) -> LemmaCheckConfig {
        LemmaCheckConfig {
            gamma,
            ..LemmaCheckConfig::default()
        }
    }

    #[test]
    fn gundersen_exponential_has_no_violations() {
        let rep = gundersen_check(
            &parse("exp(z)").unwrap(),
            &cfg(vec![(1, 0)]),
            Some(1.0),
            &log_grid(1.0, 1e4, 40),
        )
        .unwrap();
        assert!(rep.violations.is_empty(), "{rep:?}");
        assert_eq!(rep.log_measure, 0.0);
    }

    #[test]
    fn gundersen_gaussian_crossover() {
        // 2r <= r^{1.1} exactly when r >= 2^10
        let rep = gundersen_check(
            &parse("exp(z^2)").unwrap(),
            &cfg(vec![(1, 0)]),
            Some(2.0),
            &log_grid(1.0, 1e4, 40),
        )
        .unwrap();
        let expected = 1024f64.ln();
        assert!(
            (rep.log_measure - expected).abs() < 1e-6 * expected,
            "{rep:?}"
        );
    }

    #[test]
    fn gundersen_cubic_second_pair() {
        // |f''/f'| = 2/r <= r^{-0.9} exactly when r >= 2^10
        let rep = gundersen_check(
            &parse("z^3 + 1").unwrap(),
            &cfg(vec![(2, 1)]),
            Some(0.0),
            &log_grid(1.0, 1e4, 40),
        )
        .unwrap();
        let expected = 1024f64.ln();
        assert!(
            (rep.log_measure - expected).abs() < 1e-6 * expected,
            "{rep:?}"
        );
    }

    #[test]
    fn gundersen_characteristic_mode_runs() {
        let rep = gundersen_check(
            &parse("exp(exp(z))").unwrap(),
            &cfg(vec![(1, 0)]),
            None,
            &log_grid(2.0, 20.0, 12),
        )
        .unwrap();
        assert_eq!(rep.mode, GundersenMode::Characteristic);
        assert!(rep.pairs[0].ln_c.is_some());
        assert!(rep.log_measure.is_finite());
    }

    #[test]
    fn kwon_examples() {
        let grid = log_grid(1.0, 1e3, 12);
        for text in ["exp(z)", "exp(z^2)", "z"] {
            let rep = kwon_check(&parse(text).unwrap(), &grid).unwrap();
            assert_eq!(rep.pass_from, Some(1.0), "{text}");
            assert_eq!(rep.witnesses.len(), grid.len(), "{text}");
        }
    }

    #[test]
    fn kwon_gaussian_minimum() {
        // min |f/f'| = 1/(2r)
        let rep = kwon_check(&parse("exp(z^2)").unwrap(), &[3.0]).unwrap();
        assert!((rep.witnesses[0].ln_ratio + 6f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn wang_laine_examples() {
        let grid = log_grid(1.0, 1e4, 24);
        let rep = wang_laine_check(
            &parse("exp(z)").unwrap(),
            &LemmaCheckConfig::default(),
            &grid,
        )
        .unwrap();
        assert_eq!(rep.fraction, 1.0);
        assert_eq!(rep.pass_set.intervals(), &[[1.0, 1e4]]);
        let rep = wang_laine_check(&Expr::real(3.0), &LemmaCheckConfig::default(), &grid).unwrap();
        assert_eq!(rep.fraction, 1.0);
        let c = LemmaCheckConfig {
            c: 0.9,
            l0: 0.05,
            ..LemmaCheckConfig::default()
        };
        let rep = wang_laine_check(&parse("exp(z^2)").unwrap(), &c, &grid).unwrap();
        assert_eq!(rep.fraction, 1.0);
    }

    #[test]
    fn bad_config_is_rejected() {
        let c = LemmaCheckConfig {
            l0: 0.7,
            ..LemmaCheckConfig::default()
        };
        assert!(c.validate().is_err());
        assert!(cfg(vec![(1, 1)]).validate().is_err());
    }
}
