use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, EvalError, Result};
use crate::expr::{eval, Expr};
use crate::ext::ExtComplex;
use crate::numeric::{golden_max, wrap_angle};

/// The point `r e^{i theta}`.
pub fn on_circle(r: f64, theta: f64) -> ExtComplex {
    ExtComplex::from_complex(Complex64::from_polar(r, theta))
}

/// `ln |f(r e^{i theta})|`, `-inf` at an exact zero.
pub fn ln_abs_at(f: &Expr, r: f64, theta: f64) -> std::result::Result<f64, EvalError> {
    Ok(eval(f, on_circle(r, theta))?.ln_abs_or_neg_inf())
}

/// Maximizes `g` over the circle: `samples` equispaced angles, then a
/// golden-section polish around the best one. Returns `(max, argmax)`.
pub fn circle_max<F>(r: f64, samples: usize, mut g: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> std::result::Result<f64, EvalError>,
{
    let mut call = |theta: f64| g(theta).map_err(|source| Error::OnCircle { r, theta, source });
    let h = TAU / samples as f64;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..samples {
        let theta = h * k as f64;
        let v = call(theta)?;
        if v > best.0 {
            best = (v, theta);
        }
    }
    if !best.0.is_finite() {
        return Ok(best);
    }
    let (t, v) = golden_max(&mut call, best.1 - h, best.1 + h, 1e-10)?;
    if v > best.0 {
        best = (v, wrap_angle(t));
    }
    Ok(best)
}

/// Minimizes `g` over the circle; see [`circle_max`].
pub fn circle_min<F>(r: f64, samples: usize, mut g: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> std::result::Result<f64, EvalError>,
{
    let (v, t) = circle_max(r, samples, |theta| g(theta).map(|x| -x))?;
    Ok((-v, t))
}

/// `ln M(r, f)` and the angle `theta_r` where it is attained.
pub fn max_modulus(f: &Expr, r: f64, angular_samples: usize) -> Result<(f64, f64)> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Precondition(format!(
            "radius must be positive, got {r}"
        )));
    }
    if angular_samples < 64 {
        return Err(Error::Precondition(format!(
            "need at least 64 angular samples, got {angular_samples}"
        )));
    }
    circle_max(r, angular_samples, |theta| ln_abs_at(f, r, theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::PI;

    #[test]
    fn exponential_peaks_on_positive_axis() {
        let (m, t) = max_modulus(&parse("exp(z)").unwrap(), 2.0, 64).unwrap();
        assert!((m - 2.0).abs() < 1e-12);
        assert!(t.abs() < 1e-9 || (t - TAU).abs() < 1e-9);
    }

    #[test]
    fn gaussian_has_two_peaks() {
        let (m, t) = max_modulus(&parse("exp(z^2)").unwrap(), 3.0, 64).unwrap();
        assert!((m - 9.0).abs() < 1e-12);
        assert!(t.abs() < 1e-6 || (t - PI).abs() < 1e-6 || (t - TAU).abs() < 1e-6);
    }

    #[test]
    fn monomial_is_flat() {
        let (m, _) = max_modulus(&parse("z^3").unwrap(), 5.0, 64).unwrap();
        assert!((m - 3.0 * 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn off_grid_peak_is_polished() {
        // |exp(e^{-0.37 i} z)| peaks at theta = 0.37
        let f = parse("exp((0.9315-0.3616*i)*z)").unwrap();
        let (m, t) = max_modulus(&f, 100.0, 64).unwrap();
        let c = Complex64::new(0.9315, -0.3616);
        assert!((m - 100.0 * c.norm()).abs() < 1e-9);
        assert!((t - (-c.arg())).abs() < 1e-6);
    }

    #[test]
    fn pole_on_circle_reports_angle() {
        let f = parse("1/(z-1)").unwrap();
        match max_modulus(&f, 1.0, 64) {
            Err(Error::OnCircle { theta, .. }) => assert_eq!(theta, 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn too_few_samples_rejected() {
        assert!(matches!(
            max_modulus(&Expr::Z, 1.0, 32),
            Err(Error::Precondition(_))
        ));
    }
}
