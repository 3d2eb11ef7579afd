//! Finite unions of closed radius intervals with logarithmic measure and
//! logarithmic density.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::fmt_e;

/// Sorted, disjoint closed intervals `[a, b]` in `(0, inf)`.
///
/// Touching or overlapping intervals are merged on construction, so two sets
/// are equal exactly when their interval lists are.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSet")]
pub struct RadialSet {
    intervals: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
struct RawSet {
    intervals: Vec<[f64; 2]>,
}

impl TryFrom<RawSet> for RadialSet {
    type Error = Error;

    fn try_from(raw: RawSet) -> Result<Self> {
        RadialSet::from_intervals(raw.intervals)
    }
}

impl RadialSet {
    pub fn empty() -> Self {
        RadialSet::default()
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::from_intervals([[a, b]])
    }

    /// Canonical form of an arbitrary list of intervals.
    pub fn from_intervals(list: impl IntoIterator<Item = [f64; 2]>) -> Result<Self> {
        let mut v: Vec<[f64; 2]> = list.into_iter().collect();
        for &[a, b] in &v {
            if !(a > 0.0 && a <= b && b.is_finite()) {
                return Err(Error::Invalid(format!("bad radius interval [{a}, {b}]")));
            }
        }
        v.sort_by(|x, y| x[0].total_cmp(&y[0]));
        let mut out: Vec<[f64; 2]> = Vec::with_capacity(v.len());
        for iv in v {
            match out.last_mut() {
                Some(last) if iv[0] <= last[1] => last[1] = last[1].max(iv[1]),
                _ => out.push(iv),
            }
        }
        Ok(RadialSet { intervals: out })
    }

    pub fn intervals(&self) -> &[[f64; 2]] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, r: f64) -> bool {
        self.intervals.iter().any(|&[a, b]| a <= r && r <= b)
    }

    pub fn union(&self, other: &RadialSet) -> RadialSet {
        let all = self.intervals.iter().chain(&other.intervals).copied();
        // both operands are already valid
        RadialSet::from_intervals(all).unwrap()
    }

    pub fn intersect(&self, other: &RadialSet) -> RadialSet {
        let (x, y) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < x.len() && j < y.len() {
            let lo = x[i][0].max(y[j][0]);
            let hi = x[i][1].min(y[j][1]);
            if lo <= hi {
                out.push([lo, hi]);
            }
            if x[i][1] < y[j][1] {
                i += 1;
            } else {
                j += 1;
            }
        }
        RadialSet { intervals: out }
    }

    /// Closure of `[lo, hi] \ self`.
    pub fn complement_within(&self, lo: f64, hi: f64) -> Result<RadialSet> {
        let window = RadialSet::interval(lo, hi)?;
        let mut out = Vec::new();
        let mut start = lo;
        for &[a, b] in window.intersect(self).intervals() {
            if a > start {
                out.push([start, a]);
            }
            start = b;
        }
        if hi > start {
            out.push([start, hi]);
        }
        RadialSet::from_intervals(out)
    }

    /// `m_l(E) = sum ln(b/a)`.
    pub fn log_measure(&self) -> f64 {
        self.intervals.iter().map(|&[a, b]| (b / a).ln()).sum()
    }

    /// `m_l(E cap [1, r]) / ln r` at each grid radius (all `> 1`, increasing).
    pub fn log_density_profile(&self, r_grid: &[f64]) -> Result<DensityProfile> {
        if r_grid.is_empty() || r_grid[0] <= 1.0 || r_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition(
                "density grid must be increasing and above 1".into(),
            ));
        }
        let ratio = r_grid
            .iter()
            .map(|&r| {
                let part = self.intersect(&RadialSet {
                    intervals: vec![[1.0, r]],
                });
                (part.log_measure() / r.ln()).clamp(0.0, 1.0)
            })
            .collect();
        Ok(DensityProfile {
            radii: r_grid.to_vec(),
            ratio,
        })
    }
}

/// Sampled logarithmic density ratios.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityProfile {
    pub radii: Vec<f64>,
    pub ratio: Vec<f64>,
}

impl DensityProfile {
    /// Largest ratio over radii `>= from`: an estimate of the upper density.
    pub fn upper_estimate(&self, from: f64) -> Option<f64> {
        self.tail(from).reduce(f64::max)
    }

    /// Smallest ratio over radii `>= from`: an estimate of the lower density.
    pub fn lower_estimate(&self, from: f64) -> Option<f64> {
        self.tail(from).reduce(f64::min)
    }

    fn tail(&self, from: f64) -> impl Iterator<Item = f64> + '_ {
        self.radii
            .iter()
            .zip(&self.ratio)
            .filter(move |(r, _)| **r >= from)
            .map(|(_, q)| *q)
    }

    /// CSV with header `r,ratio`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,ratio\n");
        for (r, q) in self.radii.iter().zip(&self.ratio) {
            let _ = writeln!(out, "{},{}", fmt_e(*r), fmt_e(*q));
        }
        out
    }
}
