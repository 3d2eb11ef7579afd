//! Zero counting by the argument principle and the integrated counting
//! function `N(r, 1/f)`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, EvalError, Result};
use crate::expr::{eval, Expr};
use crate::numeric::CompensatedSum;

use super::circle::on_circle;
use super::proximity::circle_mean_log;

const START_SEGMENTS: usize = 256;
/// Segment cap for a single contour.
pub const MAX_SEGMENTS: usize = 1 << 20;
const INTEGER_TOL: f64 = 1e-6;

/// Outcome of one successful contour integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourCount {
    pub count: usize,
    /// `(1/2 pi i) \oint f'/f dz` before rounding.
    pub raw: Complex64,
    /// Radius actually used (after a possible perturbation).
    pub radius: f64,
    pub segments: usize,
}

/// Number of zeros of `f` in `|z| <= r`.
pub fn zero_count(f: &Expr, r: f64) -> Result<usize> {
    zero_count_detailed(f, r).map(|c| c.count)
}

/// [`zero_count`] with the raw integral and contour diagnostics.
pub fn zero_count_detailed(f: &Expr, r: f64) -> Result<ContourCount> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Precondition(format!(
            "radius must be positive, got {r}"
        )));
    }
    Counter::new(f).count(r, MAX_SEGMENTS)
}

/// `f` with its derivative, reused across many radii.
pub(crate) struct Counter<'a> {
    f: &'a Expr,
    df: Expr,
}

enum Attempt {
    Done(ContourCount),
    NotInteger(f64),
    Hit(EvalError, f64),
}

impl<'a> Counter<'a> {
    pub(crate) fn new(f: &'a Expr) -> Self {
        Counter { f, df: f.diff() }
    }

    /// Counts with one automatic `1e-9` relative perturbation of `r` when a
    /// node lands exactly on a zero.
    pub(crate) fn count(&self, r: f64, cap: usize) -> Result<ContourCount> {
        let r2 = match self.attempt(r, cap) {
            Attempt::Done(c) => return Ok(c),
            Attempt::NotInteger(residual) => return Err(Error::ContourTooClose { r, residual }),
            Attempt::Hit(source @ EvalError::RangeOverflow, theta) => {
                return Err(Error::OnCircle { r, theta, source })
            }
            Attempt::Hit(..) => r * (1.0 + 1e-9),
        };
        match self.attempt(r2, cap) {
            Attempt::Done(c) => Ok(c),
            Attempt::NotInteger(residual) => Err(Error::ContourTooClose { r, residual }),
            Attempt::Hit(EvalError::RangeOverflow, theta) => Err(Error::OnCircle {
                r: r2,
                theta,
                source: EvalError::RangeOverflow,
            }),
            Attempt::Hit(..) => Err(Error::ContourTooClose { r, residual: 0.5 }),
        }
    }

    /// `z f'(z) / f(z)` at angle `theta`.
    fn integrand(&self, r: f64, theta: f64) -> std::result::Result<Complex64, EvalError> {
        let z = on_circle(r, theta);
        let fv = eval(self.f, z)?;
        let dv = eval(&self.df, z)?;
        Ok((z * dv).try_div(fv)?.to_complex())
    }

    fn attempt(&self, r: f64, cap: usize) -> Attempt {
        let mut re = CompensatedSum::default();
        let mut im = CompensatedSum::default();
        let mut n = START_SEGMENTS;
        let mut nodes: Box<dyn Iterator<Item = usize>> = Box::new(0..n);
        let mut prev: Option<Complex64> = None;
        let mut prev_delta = f64::INFINITY;
        loop {
            for k in nodes {
                let theta = TAU * k as f64 / n as f64;
                match self.integrand(r, theta) {
                    Ok(g) => {
                        re.add(g.re);
                        im.add(g.im);
                    }
                    Err(e) => return Attempt::Hit(e, theta),
                }
            }
            let mean = Complex64::new(re.value(), im.value()) / n as f64;
            if !(mean.re.is_finite() && mean.im.is_finite()) {
                return Attempt::NotInteger(0.5);
            }
            let nearest = mean.re.round();
            let residual = (mean.re - nearest).abs().max(mean.im.abs());
            if let Some(p) = prev {
                if (mean - p).norm() < INTEGER_TOL && residual < INTEGER_TOL && nearest >= 0.0 {
                    return Attempt::Done(ContourCount {
                        count: nearest as usize,
                        raw: mean,
                        radius: r,
                        segments: n,
                    });
                }
            }
            if n >= cap {
                return Attempt::NotInteger(residual);
            }
            if let Some(p) = prev {
                let delta = (mean - p).norm();
                if n >= 4096 && hopeless(delta, prev_delta, n, cap) {
                    return Attempt::NotInteger(residual);
                }
                prev_delta = delta;
            }
            prev = Some(mean);
            n *= 2;
            nodes = Box::new((1..n).step_by(2));
        }
    }
}

/// Whether the trapezoid sums cannot settle before `cap` segments.
///
/// With the nearest zero at distance `d` from the circle the error of the
/// `n`-point rule decays like `exp(-n d / r)`, so two successive level
/// differences give the rate and an extrapolated difference at `cap`.
fn hopeless(delta: f64, prev_delta: f64, n: usize, cap: usize) -> bool {
    let q = delta / prev_delta;
    if q.is_nan() || q >= 1.0 {
        // not yet resolving the nearest zero; needs roughly 8n more segments
        return n >= cap / 4;
    }
    let rate = -4.0 * q.ln() / n as f64;
    let at_cap = delta * (-rate * (cap - n) as f64 / 2.0).exp();
    at_cap > 100.0 * INTEGER_TOL
}

/// `N(r) = int_{r0}^{r} (n(t) - n(r0)) / t dt`, i.e. the sum of `ln(r/|a|)`
/// over zeros `a` with `r0 < |a| <= r`.
///
/// Evaluated through Jensen's formula as the difference of the circle means
/// of `ln |f|` at `r` and `r0`, less `n(r0) ln(r/r0)`.
pub fn integrated_counting(f: &Expr, r: f64, r0: f64) -> Result<f64> {
    if !(r0 > 0.0 && r > r0 && r.is_finite()) {
        return Err(Error::Precondition(format!(
            "need 0 < r0 < r, got r0 = {r0}, r = {r}"
        )));
    }
    let base = JensenBase::new(f, r0)?;
    base.integrated(f, r)
}

/// `n(r0)` and the circle mean at `r0`, shared by every `N(r)` from `r0`.
pub(crate) struct JensenBase {
    r0: f64,
    count: usize,
    mean: f64,
}

impl JensenBase {
    pub(crate) fn new(f: &Expr, r0: f64) -> Result<Self> {
        let counter = Counter::new(f);
        let mut last = None;
        // a zero on |z| = r0 is counted in n(r0); nudging outwards keeps that
        for nudge in [0.0, 1e-6, 1e-4, 1e-3] {
            match counter.count(r0 * (1.0 + nudge), MAX_SEGMENTS) {
                Ok(c) => {
                    return Ok(JensenBase {
                        r0,
                        count: c.count,
                        mean: circle_mean_log(f, r0)?,
                    })
                }
                Err(e @ Error::ContourTooClose { .. }) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.unwrap())
    }

    pub(crate) fn integrated(&self, f: &Expr, r: f64) -> Result<f64> {
        if r == self.r0 {
            return Ok(0.0);
        }
        Ok(circle_mean_log(f, r)? - self.mean - self.count as f64 * (r / self.r0).ln())
    }
}
