//! Second-order linear equations `f'' + A f' + B f = H`: instances, residual
//! checks of candidate solutions, hypothesis classification and empirical
//! checks of the growth lemmas.

mod classify;
mod lemmas;
mod residual;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{eval_at, Expr};
use crate::ext::ExtComplex;
use crate::indicator::{ExpPolyFactorization, PolyP};
use crate::numeric::wrap_angle;

pub use classify::{
    classify, prop_ordbig_check, Flags, HypothesisReport, OrdbigReport, OrdbigVerdict, Statement,
    StatementCheck, ORDER_TOL,
};
pub use lemmas::{
    gundersen_check, kwon_check, wang_laine_check, GundersenMode, GundersenReport, KwonReport,
    LemmaCheckConfig, PairReport, WangLaineReport, Witness,
};
pub use residual::{residual, residual_sweep, ResidualRow, ResidualSweep};

/// Number of probe points for identity checks.
const PROBES: usize = 20;

/// One equation `f'' + A f' + B f = H` with an optional candidate solution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OdeInstance {
    pub label: String,
    #[serde(rename = "A")]
    pub a: Expr,
    #[serde(rename = "B")]
    pub b: Expr,
    #[serde(rename = "H")]
    pub h: Expr,
    pub f: Option<Expr>,
    pub factorization: Option<ExpPolyFactorization>,
    #[serde(skip)]
    homogeneous: bool,
}

#[derive(Deserialize)]
struct RawFactorization {
    v: Expr,
    #[serde(rename = "P")]
    p: PolyP,
}

#[derive(Deserialize)]
struct RawInstance {
    label: String,
    #[serde(rename = "A")]
    a: Expr,
    #[serde(rename = "B")]
    b: Expr,
    #[serde(rename = "H")]
    h: Expr,
    #[serde(default)]
    f: Option<Expr>,
    #[serde(default)]
    factorization: Option<RawFactorization>,
}

impl<'de> Deserialize<'de> for OdeInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawInstance::deserialize(d)?;
        let fac = raw
            .factorization
            .map(|f| ExpPolyFactorization::new(f.v, f.p))
            .transpose()
            .map_err(serde::de::Error::custom)?;
        OdeInstance::new(raw.label, raw.a, raw.b, raw.h, raw.f, fac)
            .map_err(serde::de::Error::custom)
    }
}

impl OdeInstance {
    /// Validates `B != 0` and, when given, that `A = v e^P`, both by
    /// evaluation at 20 probe points.
    pub fn new(
        label: impl Into<String>,
        a: Expr,
        b: Expr,
        h: Expr,
        f: Option<Expr>,
        factorization: Option<ExpPolyFactorization>,
    ) -> Result<Self> {
        let label = label.into();
        if vanishes(&b)? {
            return Err(Error::Invalid(format!("{label}: B vanishes identically")));
        }
        if let Some(fac) = &factorization {
            if !agree(&a, &fac.to_expr(), 1e-9)? {
                return Err(Error::Invalid(format!("{label}: A does not match v e^P")));
            }
        }
        let homogeneous = vanishes(&h)?;
        Ok(OdeInstance {
            label,
            a,
            b,
            h,
            f,
            factorization,
            homogeneous,
        })
    }

    /// Parses the JSON instance format.
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    /// The same equation with a different candidate solution.
    pub fn with_candidate(&self, f: Expr) -> Self {
        OdeInstance {
            f: Some(f),
            ..self.clone()
        }
    }
}

/// Evenly spread points in the annulus `0.5 <= |z| <= 3`.
fn probe_points() -> impl Iterator<Item = Complex64> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..PROBES).map(move |k| {
        let t = (k as f64 + 0.5) / PROBES as f64;
        Complex64::from_polar(0.5 + 2.5 * t, wrap_angle(golden * k as f64 + 0.1))
    })
}

fn vanishes(e: &Expr) -> Result<bool> {
    for z in probe_points() {
        if !eval_at(e, z)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn agree(f: &Expr, g: &Expr, tol: f64) -> Result<bool> {
    for z in probe_points() {
        if ExtComplex::rel_diff(eval_at(f, z)?, eval_at(g, z)?) > tol {
            return Ok(false);
        }
    }
    Ok(true)
}
