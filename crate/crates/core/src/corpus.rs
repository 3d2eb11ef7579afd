//! The nine worked equations, shipped as JSON under `corpus/`, and a runner
//! that checks every entry against its recorded expectations.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::growth::fmt_e;
use crate::numeric::log_grid;
use crate::odelab::{classify, prop_ordbig_check, residual_sweep, OdeInstance, OrdbigVerdict};

const FILES: [(&str, &str); 9] = [
    ("eg1", include_str!("../corpus/eg1.json")),
    ("eg2", include_str!("../corpus/eg2.json")),
    ("nex", include_str!("../corpus/nex.json")),
    ("necex", include_str!("../corpus/necex.json")),
    ("ex5", include_str!("../corpus/ex5.json")),
    ("ex6", include_str!("../corpus/ex6.json")),
    ("ex7", include_str!("../corpus/ex7.json")),
    ("ex8", include_str!("../corpus/ex8.json")),
    ("ex9", include_str!("../corpus/ex9.json")),
];

/// Which hypothesis of the order comparison an entry violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailTag {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "orders")]
    Orders,
    #[serde(rename = "H")]
    H,
    #[serde(rename = "orders+H")]
    OrdersAndH,
}

impl FailTag {
    pub fn from_flags(orders_fail: bool, h_fail: bool) -> Self {
        match (orders_fail, h_fail) {
            (false, false) => FailTag::None,
            (true, false) => FailTag::Orders,
            (false, true) => FailTag::H,
            (true, true) => FailTag::OrdersAndH,
        }
    }

    fn parts(self) -> Vec<String> {
        let mut out = Vec::new();
        if matches!(self, FailTag::Orders | FailTag::OrdersAndH) {
            out.push("orders".to_string());
        }
        if matches!(self, FailTag::H | FailTag::OrdersAndH) {
            out.push("H".to_string());
        }
        out
    }
}

impl fmt::Display for FailTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailTag::None => "none",
            FailTag::Orders => "orders",
            FailTag::H => "H",
            FailTag::OrdersAndH => "orders+H",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    /// Orders keyed `A`, `B`, `H`, `f`.
    pub orders: BTreeMap<String, f64>,
    pub which_hypothesis_fails: FailTag,
    pub narrative: String,
    /// Roles whose order is computed from the closed form rather than quoted.
    #[serde(default)]
    pub derived_orders: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived_note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    /// Position among the worked examples.
    pub source_index: usize,
    #[serde(flatten)]
    pub instance: OdeInstance,
    pub expected: Expected,
}

impl CorpusEntry {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// The shipped corpus in source order.
pub fn corpus() -> Result<Vec<CorpusEntry>> {
    FILES
        .iter()
        .map(|(_, text)| CorpusEntry::from_json(text))
        .collect()
}

/// Raw JSON of a shipped entry.
pub fn corpus_source(label: &str) -> Option<&'static str> {
    FILES.iter().find(|(l, _)| *l == label).map(|(_, t)| *t)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TolerancePolicy {
    pub residual_tol: f64,
    pub order_tol: f64,
    pub residual_radii: Vec<f64>,
    pub angular_samples: usize,
    pub order_grid: Vec<f64>,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            residual_tol: 1e-9,
            order_tol: 0.1,
            residual_radii: vec![1.0, 2.0, 5.0, 10.0],
            angular_samples: 64,
            order_grid: log_grid(10.0, 1e6, 24),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntryResult {
    pub label: String,
    pub residual_max: f64,
    pub residual_pass: bool,
    /// Estimated orders; `null` when above the estimator threshold.
    pub orders: BTreeMap<String, Option<f64>>,
    pub orders_pass: bool,
    pub expected_fails: FailTag,
    pub observed_fails: FailTag,
    pub classification_pass: bool,
    pub hyper_order_f: Option<f64>,
    /// `rho2(f) <= max(rho(A), rho(B)) + tol`.
    pub hyper_bound_pass: bool,
    pub ordbig: Option<OrdbigVerdict>,
    pub ordbig_pass: bool,
    /// Human-readable reasons for every failed comparison.
    pub diffs: Vec<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub policy: TolerancePolicy,
    pub entries: Vec<EntryResult>,
    pub passed: usize,
    pub total: usize,
}

impl CorpusSummary {
    pub fn all_pass(&self) -> bool {
        self.passed == self.total
    }

    /// One row per entry.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "label,residual_max,residual_pass,rho_A,rho_B,rho_H,rho_f,orders_pass,expected_fails,observed_fails,classification_pass,hyper_order_f,hyper_bound_pass,ordbig_pass,pass\n",
        );
        let num = |v: Option<f64>| v.map(fmt_e).unwrap_or_else(|| "inf".into());
        for e in &self.entries {
            let rho = |k: &str| num(e.orders.get(k).copied().flatten());
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                e.label,
                fmt_e(e.residual_max),
                e.residual_pass,
                rho("A"),
                rho("B"),
                rho("H"),
                rho("f"),
                e.orders_pass,
                e.expected_fails,
                e.observed_fails,
                e.classification_pass,
                num(e.hyper_order_f),
                e.hyper_bound_pass,
                e.ordbig_pass,
                e.pass
            );
        }
        out
    }

    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<6} {:>10} {:>6} {:>6} {:>6} {:>6} {:>9} {:>9} {}\n",
            "label",
            "residual",
            "rho_A",
            "rho_B",
            "rho_H",
            "rho_f",
            "expected",
            "observed",
            "result"
        );
        for e in &self.entries {
            let rho = |k: &str| match e.orders.get(k).copied().flatten() {
                Some(v) => format!("{v:.3}"),
                None => "inf".into(),
            };
            let _ = writeln!(
                out,
                "{:<6} {:>10.2e} {:>6} {:>6} {:>6} {:>6} {:>9} {:>9} {}",
                e.label,
                e.residual_max,
                rho("A"),
                rho("B"),
                rho("H"),
                rho("f"),
                e.expected_fails.to_string(),
                e.observed_fails.to_string(),
                if e.pass {
                    "pass".to_string()
                } else {
                    format!("FAIL: {}", e.diffs.join("; "))
                }
            );
        }
        let _ = writeln!(out, "{}/{} entries pass", self.passed, self.total);
        out
    }
}

/// Checks one entry: residual of the given solution, estimated orders,
/// which hypothesis fails, the hyper-order bound and the finite-order
/// comparison. Errors are recorded as diffs.
pub fn run_entry(entry: &CorpusEntry, policy: &TolerancePolicy) -> EntryResult {
    let inst = &entry.instance;
    let exp = &entry.expected;
    let mut diffs = Vec::new();

    let residual_max = match residual_sweep(inst, &policy.residual_radii, policy.angular_samples) {
        Ok(s) => s.max_rel(),
        Err(e) => {
            diffs.push(format!("residual: {e}"));
            f64::NAN
        }
    };
    let residual_pass = residual_max <= policy.residual_tol;
    if !residual_pass && residual_max.is_finite() {
        diffs.push(format!(
            "residual {residual_max:e} > {:e}",
            policy.residual_tol
        ));
    }

    let mut orders = BTreeMap::new();
    let mut orders_pass = false;
    let mut observed_fails = FailTag::None;
    let mut hyper_order_f = None;
    let mut hyper_bound_pass = false;
    match classify(inst, &policy.order_grid) {
        Ok(rep) => {
            orders_pass = true;
            for (role, est) in &rep.orders {
                orders.insert(role.to_string(), est.value);
                match exp.orders.get(*role) {
                    Some(want) if (est.as_f64() - want).abs() <= policy.order_tol => {}
                    Some(want) => {
                        orders_pass = false;
                        diffs.push(format!("rho({role}) = {} expected {want}", est.as_f64()));
                    }
                    None => {}
                }
            }
            for role in exp.orders.keys() {
                if !rep.orders.contains_key(role.as_str()) {
                    orders_pass = false;
                    diffs.push(format!("rho({role}) not estimated"));
                }
            }
            observed_fails =
                FailTag::from_flags(!rep.flags.orders_distinct, !rep.flags.h_subordinate);
            if observed_fails != exp.which_hypothesis_fails {
                diffs.push(format!(
                    "hypothesis failure {observed_fails} expected {}",
                    exp.which_hypothesis_fails
                ));
            }
            hyper_order_f = rep.hyper_order_f.as_ref().and_then(|e| e.value);
            let max_ab = rep.orders["A"].as_f64().max(rep.orders["B"].as_f64());
            hyper_bound_pass = match &rep.hyper_order_f {
                Some(h) => h.as_f64() <= max_ab + policy.order_tol,
                None => false,
            };
            if !hyper_bound_pass {
                diffs.push(format!(
                    "hyper-order bound fails: rho2(f) = {hyper_order_f:?}"
                ));
            }
        }
        Err(e) => diffs.push(format!("classify: {e}")),
    }
    let classification_pass = orders_pass && observed_fails == exp.which_hypothesis_fails;

    let (ordbig, ordbig_pass) = match prop_ordbig_check(inst, &policy.order_grid) {
        Ok(rep) => {
            let want = match exp.which_hypothesis_fails {
                FailTag::None => None,
                tag => Some(OrdbigVerdict::HypothesisViolated(tag.parts())),
            };
            let ok = match want {
                Some(w) => rep.verdict == w,
                None => rep.verdict == OrdbigVerdict::Consistent,
            };
            if !ok {
                diffs.push(format!("order comparison verdict {:?}", rep.verdict));
            }
            (Some(rep.verdict), ok)
        }
        Err(e) => {
            diffs.push(format!("order comparison: {e}"));
            (None, false)
        }
    };

    let pass = residual_pass && classification_pass && hyper_bound_pass && ordbig_pass;
    EntryResult {
        label: inst.label.clone(),
        residual_max,
        residual_pass,
        orders,
        orders_pass,
        expected_fails: exp.which_hypothesis_fails,
        observed_fails,
        classification_pass,
        hyper_order_f,
        hyper_bound_pass,
        ordbig,
        ordbig_pass,
        diffs,
        pass,
    }
}

/// Runs every entry in parallel; results keep corpus order.
pub fn run_entries(entries: &[CorpusEntry], policy: &TolerancePolicy) -> CorpusSummary {
    let results: Vec<EntryResult> = entries.par_iter().map(|e| run_entry(e, policy)).collect();
    CorpusSummary {
        policy: policy.clone(),
        passed: results.iter().filter(|r| r.pass).count(),
        total: results.len(),
        entries: results,
    }
}

/// [`run_entries`] over the shipped corpus.
pub fn run_corpus(policy: &TolerancePolicy) -> Result<CorpusSummary> {
    Ok(run_entries(&corpus()?, policy))
}
