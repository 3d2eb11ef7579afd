use std::f64::consts::TAU;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{eval, Expr};
use crate::ext::ExtComplex;
use crate::growth::{fmt_e, on_circle};

use super::OdeInstance;

/// `f, f', f''` evaluated together.
struct Candidate {
    f: Expr,
    d1: Expr,
    d2: Expr,
}

impl Candidate {
    fn new(f: &Expr) -> Self {
        let d1 = f.diff();
        let d2 = d1.diff();
        Candidate {
            f: f.clone(),
            d1,
            d2,
        }
    }

    /// `|f'' + A f' + B f - H| / (1 + max(|f''|, |A f'|, |B f|, |H|))`.
    fn relative(&self, inst: &OdeInstance, z: ExtComplex) -> Result<f64> {
        let terms = [
            eval(&self.d2, z)?,
            eval(&inst.a, z)? * eval(&self.d1, z)?,
            eval(&inst.b, z)? * eval(&self.f, z)?,
            eval(&inst.h, z)?,
        ];
        let total = terms[0] + terms[1] + terms[2] - terms[3];
        if total.is_zero() {
            return Ok(0.0);
        }
        let top = terms
            .iter()
            .map(ExtComplex::ln_abs_or_neg_inf)
            .fold(f64::NEG_INFINITY, f64::max);
        // ln(1 + e^top) without overflow
        let scale = if top > 40.0 { top } else { top.exp().ln_1p() };
        Ok((total.ln_abs()? - scale).exp())
    }
}

/// Largest relative residual of `f` on `|z| = r` over `angular_samples`
/// equispaced angles, with the angle where it occurs.
pub fn residual(
    inst: &OdeInstance,
    f: &Expr,
    r: f64,
    angular_samples: usize,
) -> Result<(f64, f64)> {
    if angular_samples < 32 {
        return Err(Error::Precondition(format!(
            "need at least 32 angular samples, got {angular_samples}"
        )));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Precondition(format!(
            "radius must be positive, got {r}"
        )));
    }
    circle_residual(inst, &Candidate::new(f), r, angular_samples)
}

fn circle_residual(
    inst: &OdeInstance,
    c: &Candidate,
    r: f64,
    samples: usize,
) -> Result<(f64, f64)> {
    let mut best = (0.0, 0.0);
    for k in 0..samples {
        let theta = TAU * k as f64 / samples as f64;
        let rel = c.relative(inst, on_circle(r, theta)).map_err(|e| match e {
            Error::Eval(source) => Error::OnCircle { r, theta, source },
            other => other,
        })?;
        if rel > best.0 {
            best = (rel, theta);
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualRow {
    pub r: f64,
    pub theta: f64,
    pub max_rel: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualSweep {
    pub label: String,
    pub rows: Vec<ResidualRow>,
}

impl ResidualSweep {
    pub fn max_rel(&self) -> f64 {
        self.rows.iter().map(|row| row.max_rel).fold(0.0, f64::max)
    }

    /// CSV with header `r,theta,max_rel`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,theta,max_rel\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_e(row.r),
                fmt_e(row.theta),
                fmt_e(row.max_rel)
            );
        }
        out
    }
}

/// [`residual`] of the instance's own candidate at each radius.
pub fn residual_sweep(
    inst: &OdeInstance,
    radii: &[f64],
    angular_samples: usize,
) -> Result<ResidualSweep> {
    let f = inst
        .f
        .as_ref()
        .ok_or_else(|| Error::Precondition(format!("{}: no candidate solution", inst.label)))?;
    if angular_samples < 32 {
        return Err(Error::Precondition(format!(
            "need at least 32 angular samples, got {angular_samples}"
        )));
    }
    let c = Candidate::new(f);
    let rows = radii
        .par_iter()
        .map(|&r| {
            let (max_rel, theta) = circle_residual(inst, &c, r, angular_samples)?;
            Ok(ResidualRow { r, theta, max_rel })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualSweep {
        label: inst.label.clone(),
        rows,
    })
}
