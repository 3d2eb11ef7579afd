//! The phase indicator `delta(P, theta) = Re(a_d e^{i d theta})` of a
//! polynomial and the two-sided bounds for `A = v e^P` along a ray.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::growth::{ln_abs_at, order_estimate};
use crate::numeric::{bisect, log_grid, wrap_angle};

/// Rays with `|delta|` below this count as zero rays.
pub const ZERO_RAY_TOL: f64 = 1e-12;

/// Polynomial `a_0 + a_1 z + ... + a_d z^d` with `d >= 1`, `a_d != 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyP {
    coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct Coef {
    re: f64,
    im: f64,
}

impl PolyP {
    /// Coefficients from the constant term up.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        let d = coeffs.len().saturating_sub(1);
        if d == 0 {
            return Err(Error::Invalid(
                "polynomial P needs degree at least 1".into(),
            ));
        }
        if coeffs[d] == Complex64::new(0.0, 0.0) {
            return Err(Error::Invalid("leading coefficient of P is zero".into()));
        }
        if coeffs
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::Invalid("non-finite coefficient in P".into()));
        }
        Ok(PolyP { coeffs })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[self.degree()]
    }

    /// Sum of monomials `a_k z^k`, skipping zero coefficients.
    pub fn to_expr(&self) -> Expr {
        let mut terms = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
            .map(|(k, c)| Expr::mul(Expr::constant(*c), Expr::pow(Expr::Z, k as i32)));
        let first = terms.next().unwrap();
        terms.fold(first, Expr::add)
    }
}

impl Serialize for PolyP {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<Coef> = self
            .coeffs
            .iter()
            .map(|c| Coef { re: c.re, im: c.im })
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyP {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<Coef>::deserialize(d)?;
        PolyP::new(v.into_iter().map(|c| Complex64::new(c.re, c.im)).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// `A = v e^P` with `rho(v) < deg P`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpPolyFactorization {
    pub v: Expr,
    #[serde(rename = "P")]
    pub p: PolyP,
}

impl ExpPolyFactorization {
    /// Checks `rho(v) < deg P` with the order estimator on the default grid.
    pub fn new(v: Expr, p: PolyP) -> Result<Self> {
        let est = order_estimate(&v, &log_grid(10.0, 1e6, 24))?;
        let rho = est.as_f64();
        if rho >= p.degree() as f64 {
            return Err(Error::Precondition(format!(
                "factor v has estimated order {rho}, not below deg P = {}",
                p.degree()
            )));
        }
        Ok(ExpPolyFactorization { v, p })
    }

    /// The product `v e^P` as an expression.
    pub fn to_expr(&self) -> Expr {
        Expr::mul(self.v.clone(), Expr::exp(self.p.to_expr()))
    }
}

/// `Re(a_d e^{i d theta})`.
pub fn delta(p: &PolyP, theta: f64) -> f64 {
    let d = p.degree() as f64;
    (p.leading() * Complex64::from_polar(1.0, d * theta)).re
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
}

/// Open arc `(start, end)` of constant indicator sign. `start` lies in
/// `[0, 2pi)`; `end = start + pi/d` may pass `2pi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SignArc {
    pub start: f64,
    pub end: f64,
    pub sign: Sign,
}

impl SignArc {
    /// Whether `theta` lies inside the open arc.
    pub fn contains(&self, theta: f64) -> bool {
        let t = wrap_angle(theta);
        (t > self.start && t < self.end) || (t + TAU > self.start && t + TAU < self.end)
    }
}

/// The `2d` arcs between consecutive zero rays, sorted by start angle.
pub fn sign_rays(p: &PolyP) -> Vec<SignArc> {
    let d = p.degree();
    let phase = p.leading().arg();
    let width = PI / d as f64;
    let mut arcs: Vec<SignArc> = (0..2 * d)
        .map(|k| {
            // zero rays solve d theta + phase = pi/2 + k pi
            let start = wrap_angle((PI / 2.0 - phase + k as f64 * PI) / d as f64);
            let mid = start + width / 2.0;
            let sign = if delta(p, mid) > 0.0 {
                Sign::Positive
            } else {
                Sign::Negative
            };
            SignArc {
                start,
                end: start + width,
                sign,
            }
        })
        .collect();
    arcs.sort_by(|a, b| a.start.total_cmp(&b.start));
    arcs
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma2Failure {
    pub r: f64,
    #[serde(rename = "ln_abs_A")]
    pub ln_abs_a: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma2Report {
    pub theta: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Smallest radius beyond which every check passes; `None` if the last
    /// grid radius fails.
    pub pass_radius: Option<f64>,
    /// Failing grid radii.
    pub failures: Vec<Lemma2Failure>,
}

/// Checks `lower <= ln|A(r e^{i theta})| <= upper` with
/// `(lower, upper) = ((1 - eps) delta r^n, (1 + eps) delta r^n)` for
/// `delta > 0` and the two factors swapped for `delta < 0`.
///
/// The pass radius is refined by bisection between the last failing grid
/// radius and its successor.
pub fn lemma2_check(
    fac: &ExpPolyFactorization,
    theta: f64,
    epsilon: f64,
    r_grid: &[f64],
) -> Result<Lemma2Report> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Precondition(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if r_grid.is_empty() || r_grid[0] <= 0.0 || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "radius grid must be positive and increasing".into(),
        ));
    }
    let dl = delta(&fac.p, theta);
    if dl.abs() < ZERO_RAY_TOL {
        return Err(Error::ZeroRay { theta, delta: dl });
    }
    let a = fac.to_expr();
    let n = fac.p.degree() as i32;
    let (lo_f, hi_f) = if dl > 0.0 {
        (1.0 - epsilon, 1.0 + epsilon)
    } else {
        (1.0 + epsilon, 1.0 - epsilon)
    };
    let test = |r: f64| -> Result<(bool, Lemma2Failure)> {
        let l = ln_abs_at(&a, r, theta).map_err(|source| Error::OnCircle { r, theta, source })?;
        let base = dl * r.powi(n);
        let row = Lemma2Failure {
            r,
            ln_abs_a: l,
            lower: lo_f * base,
            upper: hi_f * base,
        };
        Ok((row.lower <= l && l <= row.upper, row))
    };
    let mut failures = Vec::new();
    let mut last_fail = None;
    for (i, &r) in r_grid.iter().enumerate() {
        let (ok, row) = test(r)?;
        if !ok {
            failures.push(row);
            last_fail = Some(i);
        }
    }
    let pass_radius = match last_fail {
        None => Some(r_grid[0]),
        Some(i) if i + 1 == r_grid.len() => None,
        Some(i) => {
            let mut err = None;
            let (_, hi) = bisect(
                |r| match test(r) {
                    Ok((ok, _)) => ok,
                    Err(e) => {
                        err.get_or_insert(e);
                        true
                    }
                },
                r_grid[i],
                r_grid[i + 1],
                false,
                60,
            );
            if let Some(e) = err {
                return Err(e);
            }
            Some(hi)
        }
    };
    Ok(Lemma2Report {
        theta,
        epsilon,
        delta: dl,
        pass_radius,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn poly(c: &[(f64, f64)]) -> PolyP {
        PolyP::new(c.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap()
    }

    #[test]
    fn delta_examples() {
        assert!((delta(&poly(&[(0.0, 0.0), (1.0, 0.0)]), 0.0) - 1.0).abs() < 1e-15);
        assert!(
            (delta(&poly(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]), PI / 2.0) + 1.0).abs() < 1e-15
        );
        let p = poly(&[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 1.0)]);
        assert!((delta(&p, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sign_arcs_of_z() {
        let arcs = sign_rays(&poly(&[(0.0, 0.0), (1.0, 0.0)]));
        assert_eq!(arcs.len(), 2);
        let pos = arcs.iter().find(|a| a.sign == Sign::Positive).unwrap();
        assert!(pos.contains(0.0) && pos.contains(-1.5) && pos.contains(1.5));
        let neg = arcs.iter().find(|a| a.sign == Sign::Negative).unwrap();
        assert!((neg.start - PI / 2.0).abs() < 1e-15 && (neg.end - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn sign_arcs_of_iz_start_at_zero_rays() {
        // delta = cos(theta + pi/2) = -sin(theta): zero rays 0 and pi
        let arcs = sign_rays(&poly(&[(0.0, 0.0), (0.0, 1.0)]));
        let starts: Vec<f64> = arcs.iter().map(|a| a.start).collect();
        assert!(
            starts[0].abs() < 1e-15 && (starts[1] - PI).abs() < 1e-15,
            "{starts:?}"
        );
        assert_eq!(arcs[0].sign, Sign::Negative);
        assert_eq!(arcs[1].sign, Sign::Positive);
    }

    #[test]
    fn sign_arcs_of_z_squared() {
        let arcs = sign_rays(&poly(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]));
        assert_eq!(arcs.len(), 4);
        for a in &arcs {
            assert!((a.end - a.start - PI / 2.0).abs() < 1e-15);
            assert!((0.0..TAU).contains(&a.start));
        }
        for w in arcs.windows(2) {
            assert_ne!(w[0].sign, w[1].sign);
        }
    }

    #[test]
    fn coefficient_json() {
        let p = poly(&[(1.0, 0.0), (0.0, -2.0)]);
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, r#"[{"re":1.0,"im":0.0},{"re":0.0,"im":-2.0}]"#);
        assert_eq!(serde_json::from_str::<PolyP>(&text).unwrap(), p);
        assert!(serde_json::from_str::<PolyP>(r#"[{"re":1.0,"im":0.0}]"#).is_err());
    }

    #[test]
    fn fast_factor_is_rejected() {
        let p = poly(&[(0.0, 0.0), (1.0, 0.0)]);
        assert!(ExpPolyFactorization::new(parse("exp(z^2)").unwrap(), p).is_err());
    }

    #[test]
    fn exponential_passes_everywhere() {
        let fac =
            ExpPolyFactorization::new(Expr::real(1.0), poly(&[(0.0, 0.0), (1.0, 0.0)])).unwrap();
        let grid = log_grid(1.0, 1e4, 40);
        let rep = lemma2_check(&fac, 0.0, 0.1, &grid).unwrap();
        assert_eq!(rep.pass_radius, Some(1.0));
        assert!(rep.failures.is_empty());
        let rep = lemma2_check(&fac, PI, 0.1, &grid).unwrap();
        assert_eq!(rep.delta, -1.0);
        assert_eq!(rep.pass_radius, Some(1.0));
    }

    #[test]
    fn zero_ray_is_an_error() {
        let fac =
            ExpPolyFactorization::new(Expr::real(1.0), poly(&[(0.0, 0.0), (1.0, 0.0)])).unwrap();
        assert!(matches!(
            lemma2_check(&fac, PI / 2.0, 0.1, &[1.0, 2.0]),
            Err(Error::ZeroRay { .. })
        ));
    }
}
