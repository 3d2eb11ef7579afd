//! Growth functionals of entire functions: maximum modulus, proximity,
//! zero counting, characteristic, and the growth exponents.

mod circle;
mod compare;
mod order;
mod proximity;
mod zeros;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;

use zeros::JensenBase;

pub use circle::{circle_max, circle_min, ln_abs_at, max_modulus, on_circle};
pub use compare::{growth_compare, t_lower_bound_check, GrowthComparison, TLowerBound};
pub use order::{
    convergence_exponent, envelope_estimate, hyper_order_estimate, order_estimate,
    order_estimate_with, OrderEstimate, OrderKind, DEFAULT_THRESHOLD, ENVELOPE_BAND,
};
pub use proximity::proximity;
pub use zeros::{integrated_counting, zero_count, zero_count_detailed, ContourCount, MAX_SEGMENTS};

/// Largest radius at which zero counts are attempted by default.
pub const ZERO_RADIUS_CAP: f64 = 1e4;

/// `T(r, f)` for entire `f`, which equals `m(r, f)`.
///
/// Any `Div` node whose denominator has a zero in `|z| <= r` makes `f`
/// meromorphic there, which is not supported.
pub fn characteristic(f: &Expr, r: f64) -> Result<f64> {
    check_poleless(f, r)?;
    proximity(f, r)
}

fn check_poleless(f: &Expr, r: f64) -> Result<()> {
    for d in f.denominators() {
        if zero_count(d, r)? > 0 {
            return Err(Error::UnsupportedMeromorphic { r });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileRow {
    pub r: f64,
    pub log_m: f64,
    pub theta_r: f64,
    pub m: f64,
    /// `None` when the zero count did not converge (or `r` is above the cap).
    pub n: Option<usize>,
    pub big_n: Option<f64>,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthProfile {
    pub rows: Vec<ProfileRow>,
}

impl GrowthProfile {
    /// Samples every growth functional of `f` at `radii` (strictly increasing).
    ///
    /// `N(r)` is integrated from the first radius.
    pub fn compute(f: &Expr, radii: &[f64], angular_samples: usize) -> Result<Self> {
        if radii.is_empty() || radii[0] <= 0.0 || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition(
                "profile radii must be positive and increasing".into(),
            ));
        }
        let mut rows = radii
            .par_iter()
            .map(|&r| {
                let (log_m, theta_r) = max_modulus(f, r, angular_samples)?;
                check_poleless(f, r)?;
                let m = proximity(f, r)?;
                let n = if r <= ZERO_RADIUS_CAP {
                    zero_count(f, r).ok()
                } else {
                    None
                };
                Ok(ProfileRow {
                    r,
                    log_m,
                    theta_r,
                    m,
                    n,
                    big_n: None,
                    t: m,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if radii[0] <= ZERO_RADIUS_CAP {
            if let Ok(base) = JensenBase::new(f, radii[0]) {
                let values: Vec<Option<f64>> = rows
                    .par_iter()
                    .map(|row| {
                        (row.r <= ZERO_RADIUS_CAP)
                            .then(|| base.integrated(f, row.r).ok())
                            .flatten()
                    })
                    .collect();
                for (row, v) in rows.iter_mut().zip(values) {
                    row.big_n = v;
                }
            }
        }
        Ok(GrowthProfile { rows })
    }

    /// CSV with header `r,logM,theta_r,m,n,N,T`; empty cells for missing
    /// counts.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,logM,theta_r,m,n,N,T\n");
        for row in &self.rows {
            let n = row.n.map(|n| n.to_string()).unwrap_or_default();
            let big_n = row.big_n.map(fmt_e).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_e(row.r),
                fmt_e(row.log_m),
                fmt_e(row.theta_r),
                fmt_e(row.m),
                n,
                big_n,
                fmt_e(row.t)
            );
        }
        out
    }

    /// Plot data `ln_r,ln_ln_M` for rows with `ln M > 0`.
    pub fn plot_csv(&self) -> String {
        let mut out = String::from("ln_r,ln_ln_M\n");
        for row in self.rows.iter().filter(|row| row.log_m > 0.0) {
            let _ = writeln!(out, "{},{}", fmt_e(row.r.ln()), fmt_e(row.log_m.ln()));
        }
        out
    }
}

/// 17 significant digits in exponent form.
pub fn fmt_e(x: f64) -> String {
    format!("{x:.16e}")
}
