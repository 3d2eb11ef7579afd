//! Growth exponents from sampled growth data.
//!
//! All three estimators reduce to the same problem: given a level `L(r)`
//! (`ln M`, `ln ln M` or `n`), estimate `limsup ln L / ln r`. The limsup is
//! approximated by fitting a line to the upper envelope of the points
//! `(ln r, ln L)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, EvalError, Result};
use crate::expr::Expr;

use super::circle::max_modulus;
use super::zeros::{Counter, MAX_SEGMENTS};

/// Slope above which an estimate is reported as exceeding the threshold.
pub const DEFAULT_THRESHOLD: f64 = 50.0;
/// Points within this distance of the running envelope take part in the fit.
pub const ENVELOPE_BAND: f64 = 0.05;
const ANGULAR_SAMPLES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderKind {
    Order,
    HyperOrder,
    ConvergenceExponent,
}

impl OrderKind {
    fn name(self) -> &'static str {
        match self {
            OrderKind::Order => "order",
            OrderKind::HyperOrder => "hyper-order",
            OrderKind::ConvergenceExponent => "convergence exponent",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderEstimate {
    pub kind: OrderKind,
    /// `None` when the estimate exceeds the threshold.
    pub value: Option<f64>,
    pub window: [f64; 2],
    pub fit_residual: f64,
    pub points_used: usize,
    pub exceeds_threshold: bool,
}

impl OrderEstimate {
    /// The value, with an exceeded threshold read as `+inf`.
    pub fn as_f64(&self) -> f64 {
        self.value.unwrap_or(f64::INFINITY)
    }
}

/// Estimated order `rho` from `ln ln M(r)`.
pub fn order_estimate(f: &Expr, r_grid: &[f64]) -> Result<OrderEstimate> {
    order_estimate_with(f, r_grid, DEFAULT_THRESHOLD)
}

pub fn order_estimate_with(f: &Expr, r_grid: &[f64], threshold: f64) -> Result<OrderEstimate> {
    check_grid(r_grid)?;
    let levels = log_max_modulus(f, r_grid)?;
    envelope_estimate(OrderKind::Order, r_grid, &levels, 1.0, threshold)
}

/// Estimated hyper-order `rho_2` from `ln ln ln M(r)`.
pub fn hyper_order_estimate(f: &Expr, r_grid: &[f64]) -> Result<OrderEstimate> {
    check_grid(r_grid)?;
    let levels: Vec<Option<f64>> = log_max_modulus(f, r_grid)?
        .into_iter()
        .map(|l| l.map(|v| if v > 0.0 { v.ln() } else { f64::NEG_INFINITY }))
        .collect();
    envelope_estimate(
        OrderKind::HyperOrder,
        r_grid,
        &levels,
        1.0,
        DEFAULT_THRESHOLD,
    )
}

/// Estimated exponent of convergence `lambda` from `ln n(r)`.
pub fn convergence_exponent(f: &Expr, r_grid: &[f64]) -> Result<OrderEstimate> {
    check_grid(r_grid)?;
    let counter = Counter::new(f);
    let levels = r_grid
        .par_iter()
        .map(|&r| counter.count(r, MAX_SEGMENTS).map(|c| Some(c.count as f64)))
        .collect::<Result<Vec<_>>>()?;
    envelope_estimate(
        OrderKind::ConvergenceExponent,
        r_grid,
        &levels,
        2.0,
        DEFAULT_THRESHOLD,
    )
}

fn check_grid(r_grid: &[f64]) -> Result<()> {
    if r_grid.len() < 8 {
        return Err(Error::Precondition(format!(
            "need at least 8 grid radii, got {}",
            r_grid.len()
        )));
    }
    if r_grid[0] <= 0.0 || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition(
            "grid radii must be positive and increasing".into(),
        ));
    }
    Ok(())
}

/// `ln M(r)` per radius; `None` where the function leaves the exponent range.
fn log_max_modulus(f: &Expr, r_grid: &[f64]) -> Result<Vec<Option<f64>>> {
    r_grid
        .par_iter()
        .map(|&r| match max_modulus(f, r, ANGULAR_SAMPLES) {
            Ok((l, _)) => Ok(Some(l)),
            Err(Error::OnCircle {
                source: EvalError::RangeOverflow,
                ..
            }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

/// Envelope slope of `(ln r, ln L)` over the radii where `L >= floor`.
///
/// `None` levels mark a range overflow and force an exceeds-threshold result.
pub fn envelope_estimate(
    kind: OrderKind,
    radii: &[f64],
    levels: &[Option<f64>],
    floor: f64,
    threshold: f64,
) -> Result<OrderEstimate> {
    let full = [radii[0], radii[radii.len() - 1]];
    if levels.iter().any(Option::is_none) {
        return Ok(OrderEstimate {
            kind,
            value: None,
            window: full,
            fit_residual: 0.0,
            points_used: radii.len(),
            exceeds_threshold: true,
        });
    }
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(levels)
        .filter_map(|(&r, l)| l.filter(|&v| v >= floor && r > 1.0).map(|v| (r, v)))
        .collect();
    let zero = |points_used: usize, window: [f64; 2]| OrderEstimate {
        kind,
        value: Some(0.0),
        window,
        fit_residual: 0.0,
        points_used,
        exceeds_threshold: false,
    };
    if pts.len() < 3 {
        // the level stays bounded below the floor
        return Ok(zero(radii.len(), full));
    }
    let window = [pts[0].0, pts[pts.len() - 1].0];
    let q: Vec<f64> = pts.iter().map(|(r, l)| l / r.ln()).collect();
    let early = q[..q.len() / 2]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if q[q.len() - 1] <= 1.1 * early {
        // L grows at most logarithmically: exponent 0
        return Ok(zero(pts.len(), window));
    }

    let x: Vec<f64> = pts.iter().map(|(r, _)| r.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|(_, l)| l.ln()).collect();
    // start from the upper hull so a few low points cannot tilt the slope
    let mut selected = upper_hull(&x, &y);
    let (mut slope, mut icept) = fit(&x, &y, &selected);
    for _ in 0..50 {
        let e: Vec<f64> = x.iter().zip(&y).map(|(a, b)| b - slope * a).collect();
        let mut run = f64::NEG_INFINITY;
        let mut next = Vec::new();
        for i in (0..e.len()).rev() {
            run = run.max(e[i]);
            if e[i] >= run - ENVELOPE_BAND {
                next.push(i);
            }
        }
        next.reverse();
        if next.len() < 3 {
            return Err(Error::TooFewPoints {
                kind: kind.name(),
                found: next.len(),
            });
        }
        if next == selected {
            break;
        }
        selected = next;
        (slope, icept) = fit(&x, &y, &selected);
    }
    if slope > threshold {
        return Ok(OrderEstimate {
            kind,
            value: None,
            window,
            fit_residual: 0.0,
            points_used: selected.len(),
            exceeds_threshold: true,
        });
    }
    let rms = (selected
        .iter()
        .map(|&i| (y[i] - slope * x[i] - icept).powi(2))
        .sum::<f64>()
        / selected.len() as f64)
        .sqrt();
    Ok(OrderEstimate {
        kind,
        value: Some(slope.max(0.0)),
        window: [pts[selected[0]].0, pts[*selected.last().unwrap()].0],
        fit_residual: rms,
        points_used: selected.len(),
        exceeds_threshold: false,
    })
}

/// Indices of the upper convex hull of the points, collinear points kept.
fn upper_hull(x: &[f64], y: &[f64]) -> Vec<usize> {
    let scale =
        y.iter().fold(1.0f64, |m, v| m.max(v.abs())) * x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..x.len() {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (x[a] - x[o]) * (y[i] - y[o]) - (y[a] - y[o]) * (x[i] - x[o]);
            if cross > 1e-12 * scale {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

fn fit(x: &[f64], y: &[f64], idx: &[usize]) -> (f64, f64) {
    let xs: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    crate::numeric::linear_fit(&xs, &ys)
}
