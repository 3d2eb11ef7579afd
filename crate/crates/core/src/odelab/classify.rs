use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::growth::{
    convergence_exponent, hyper_order_estimate, order_estimate, OrderEstimate, ZERO_RADIUS_CAP,
};
use crate::numeric::log_grid;

use super::{residual, OdeInstance};

/// Tolerance on differences of estimated orders.
pub const ORDER_TOL: f64 = 0.1;
const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Statement {
    #[serde(rename = "Thm1a")]
    Thm1a,
    #[serde(rename = "Thm2")]
    Thm2,
    #[serde(rename = "Thm3")]
    Thm3,
    #[serde(rename = "Prop-ordbig")]
    PropOrdbig,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flags {
    pub orders_distinct: bool,
    #[serde(rename = "H_subordinate")]
    pub h_subordinate: bool,
    pub factorization_given: bool,
    /// Surrogate for "B is transcendental": `rho(B) > 0.1`.
    pub b_transcendental: bool,
    pub homogeneous: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatementCheck {
    pub statement: Statement,
    pub hypotheses: BTreeMap<&'static str, bool>,
    pub hypotheses_hold: bool,
    /// Whether the candidate meets the statement's conclusion surrogate.
    pub conclusion: Option<bool>,
    /// `false` only when every hypothesis holds but the conclusion does not.
    pub consistent: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub label: String,
    /// Estimated orders keyed `A`, `B`, `H` and `f`.
    pub orders: BTreeMap<&'static str, OrderEstimate>,
    pub hyper_order_f: Option<OrderEstimate>,
    pub convergence_exponent_f: Option<OrderEstimate>,
    pub flags: Flags,
    pub statements: Vec<StatementCheck>,
    /// Statements whose hypotheses all hold, or `["none"]`.
    pub matched: Vec<String>,
    pub note: &'static str,
}

const NOTE: &str = "orders are finite-range estimates; infinite order appears as \
exceeds_threshold, and theorem conclusions are checked in surrogate form only";

/// Estimates the growth of every coefficient (and the candidate) on `r_grid`
/// and evaluates the hypotheses of each statement.
pub fn classify(inst: &OdeInstance, r_grid: &[f64]) -> Result<HypothesisReport> {
    let est = |e| order_estimate(e, r_grid);
    let (ra, rb, rh) = (est(&inst.a)?, est(&inst.b)?, est(&inst.h)?);
    let (rf, hf, lf) = match &inst.f {
        Some(f) => {
            let hi = r_grid[r_grid.len() - 1].min(ZERO_RADIUS_CAP);
            let lo = r_grid[0];
            let zeros = if hi > lo {
                Some(convergence_exponent(f, &log_grid(lo, hi, 16))?)
            } else {
                None
            };
            (Some(est(f)?), Some(hyper_order_estimate(f, r_grid)?), zeros)
        }
        None => (None, None, None),
    };
    let (a, b, h) = (ra.as_f64(), rb.as_f64(), rh.as_f64());
    let max_ab = a.max(b);
    let flags = Flags {
        orders_distinct: (a - b).abs() > ORDER_TOL,
        h_subordinate: h < max_ab - ORDER_TOL,
        factorization_given: inst.factorization.is_some(),
        b_transcendental: b > ORDER_TOL,
        homogeneous: inst.is_homogeneous(),
    };
    let finite_a = !ra.exceeds_threshold;
    let finite_b = !rb.exceeds_threshold;
    let f_order = rf.as_ref().map(OrderEstimate::as_f64);
    let f_hyper = hf.as_ref().map(OrderEstimate::as_f64);

    let mut statements = Vec::new();
    let mut push = |statement, hyps: Vec<(&'static str, bool)>, conclusion: Option<bool>| {
        let hypotheses: BTreeMap<_, _> = hyps.into_iter().collect();
        let hold = hypotheses.values().all(|&v| v);
        statements.push(StatementCheck {
            statement,
            hypotheses,
            hypotheses_hold: hold,
            conclusion,
            consistent: conclusion.map(|c| !hold || c),
        });
    };
    let hyper_bound = f_hyper.map(|v| v <= max_ab + ORDER_TOL);
    push(
        Statement::Thm1a,
        vec![
            ("homogeneous", flags.homogeneous),
            ("lambda_A_below_rho_A", flags.factorization_given),
            ("B_transcendental", flags.b_transcendental),
            ("B_finite_order", finite_b),
            ("orders_distinct", flags.orders_distinct),
        ],
        hyper_bound,
    );
    let thm2 = vec![
        ("lambda_A_below_rho_A", flags.factorization_given),
        ("B_transcendental", flags.b_transcendental),
        ("orders_distinct", flags.orders_distinct),
        ("H_subordinate", flags.h_subordinate),
    ];
    // conclusion: every solution has infinite order
    push(
        Statement::Thm2,
        thm2.clone(),
        rf.as_ref().map(|e| e.exceeds_threshold),
    );
    let mut thm3 = thm2;
    thm3.push(("A_finite_order", finite_a));
    thm3.push(("B_finite_order", finite_b));
    push(Statement::Thm3, thm3, hyper_bound);
    push(
        Statement::PropOrdbig,
        vec![
            ("orders_distinct", flags.orders_distinct),
            ("H_subordinate", flags.h_subordinate),
        ],
        f_order.map(|v| v >= max_ab - ORDER_TOL),
    );

    let mut matched: Vec<String> = statements
        .iter()
        .filter(|s| s.hypotheses_hold)
        .map(|s| statement_name(s.statement).to_string())
        .collect();
    if matched.is_empty() {
        matched.push("none".into());
    }
    let mut orders = BTreeMap::new();
    orders.insert("A", ra);
    orders.insert("B", rb);
    orders.insert("H", rh);
    if let Some(e) = rf {
        orders.insert("f", e);
    }
    Ok(HypothesisReport {
        label: inst.label.clone(),
        orders,
        hyper_order_f: hf,
        convergence_exponent_f: lf,
        flags,
        statements,
        matched,
        note: NOTE,
    })
}

fn statement_name(s: Statement) -> &'static str {
    match s {
        Statement::Thm1a => "Thm1a",
        Statement::Thm2 => "Thm2",
        Statement::Thm3 => "Thm3",
        Statement::PropOrdbig => "Prop-ordbig",
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "failed", rename_all = "snake_case")]
pub enum OrdbigVerdict {
    Consistent,
    /// Hypotheses that fail: `"orders"` and/or `"H"`.
    HypothesisViolated(Vec<String>),
    CounterexampleFlag,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrdbigReport {
    pub label: String,
    pub rho_f: f64,
    pub max_rho_ab: f64,
    pub verdict: OrdbigVerdict,
}

/// The finite-order check `rho(f) >= max(rho(A), rho(B))` for the candidate.
///
/// The candidate must solve the equation (residual at most `1e-9` on
/// `|z| = 1, 2, 5`) and have finite estimated order.
pub fn prop_ordbig_check(inst: &OdeInstance, r_grid: &[f64]) -> Result<OrdbigReport> {
    let f = inst
        .f
        .as_ref()
        .ok_or_else(|| Error::Precondition(format!("{}: no candidate solution", inst.label)))?;
    for r in [1.0, 2.0, 5.0] {
        let (rel, _) = residual(inst, f, r, 64)?;
        if rel > RESIDUAL_TOL {
            return Err(Error::Precondition(format!(
                "{}: candidate residual {rel:e} at r = {r} exceeds {RESIDUAL_TOL:e}",
                inst.label
            )));
        }
    }
    let rf = order_estimate(f, r_grid)?;
    if rf.exceeds_threshold {
        return Err(Error::Precondition(format!(
            "{}: candidate order exceeds the threshold",
            inst.label
        )));
    }
    let (a, b, h) = (
        order_estimate(&inst.a, r_grid)?.as_f64(),
        order_estimate(&inst.b, r_grid)?.as_f64(),
        order_estimate(&inst.h, r_grid)?.as_f64(),
    );
    let max_ab = a.max(b);
    let rho_f = rf.as_f64();
    let mut failed = Vec::new();
    if (a - b).abs() <= ORDER_TOL {
        failed.push("orders".to_string());
    }
    if h >= max_ab - ORDER_TOL {
        failed.push("H".to_string());
    }
    let verdict = if !failed.is_empty() {
        OrdbigVerdict::HypothesisViolated(failed)
    } else if rho_f < max_ab - ORDER_TOL {
        OrdbigVerdict::CounterexampleFlag
    } else {
        OrdbigVerdict::Consistent
    };
    Ok(OrdbigReport {
        label: inst.label.clone(),
        rho_f,
        max_rho_ab: max_ab,
        verdict,
    })
}
