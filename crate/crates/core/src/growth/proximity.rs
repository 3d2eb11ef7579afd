//! Proximity function `m(r, f)` by adaptive trapezoid quadrature.

use std::f64::consts::TAU;

use crate::error::{Error, EvalError, Result};
use crate::expr::Expr;
use crate::numeric::bisect;

use super::circle::{ln_abs_at, on_circle};

const INITIAL_PANELS: usize = 64;
const MIN_DEPTH: u32 = 2;
const MAX_DEPTH: u32 = 20;

/// `m(r, f) = (1/2pi) int ln+ |f(r e^{i theta})| d theta`.
///
/// Sign changes of `ln |f|` are located by bisection and become panel
/// boundaries, so each panel integrates a smooth function. If the circle
/// passes exactly through a zero of `f`, `r` is perturbed once by a relative
/// `1e-9`.
pub fn proximity(f: &Expr, r: f64) -> Result<f64> {
    circle_mean(f, r, Part::Positive)
}

/// `(1/2pi) int ln |f(r e^{i theta})| d theta`, the left side of Jensen's
/// formula. Panels around a zero close to the circle stop refining at the
/// depth limit; their logarithmic spike contributes at most about `1e-6`.
pub(crate) fn circle_mean_log(f: &Expr, r: f64) -> Result<f64> {
    circle_mean(f, r, Part::Full)
}

fn circle_mean(f: &Expr, r: f64, part: Part) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Precondition(format!(
            "radius must be positive, got {r}"
        )));
    }
    match integrate(f, r, part) {
        Err(Error::OnCircle {
            source: EvalError::LogOfZero,
            ..
        }) => integrate(f, r * (1.0 + 1e-9), part),
        other => other,
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Part {
    Positive,
    Full,
}

#[derive(Clone, Copy)]
struct Node {
    theta: f64,
    /// `ln |f|`, or exactly 0 at a located crossing.
    l: f64,
}

impl Node {
    fn value(&self, part: Part) -> f64 {
        match part {
            Part::Positive => self.l.max(0.0),
            Part::Full => self.l,
        }
    }
}

struct Integrator<'a> {
    f: &'a Expr,
    r: f64,
    part: Part,
    tol: f64,
    /// `|ln |f||` below this counts as exactly 0 (a crossing at a node).
    band: f64,
}

impl Integrator<'_> {
    fn node(&self, theta: f64) -> Result<Node> {
        let v = crate::expr::eval(self.f, on_circle(self.r, theta)).map_err(|source| {
            Error::OnCircle {
                r: self.r,
                theta,
                source,
            }
        })?;
        let l = v.ln_abs().map_err(|source| Error::OnCircle {
            r: self.r,
            theta,
            source,
        })?;
        Ok(Node {
            theta,
            l: if l.abs() <= self.band { 0.0 } else { l },
        })
    }

    /// Zero of `ln |f|` between two nodes of opposite sign.
    fn crossing(&self, a: Node, b: Node) -> Result<Node> {
        let mut err = None;
        let (lo, hi) = bisect(
            |t| match ln_abs_at(self.f, self.r, t) {
                Ok(l) => l > 0.0,
                Err(e) => {
                    err.get_or_insert(e);
                    false
                }
            },
            a.theta,
            b.theta,
            a.l > 0.0,
            64,
        );
        if let Some(source) = err {
            return Err(Error::OnCircle {
                r: self.r,
                theta: 0.5 * (lo + hi),
                source,
            });
        }
        Ok(Node {
            theta: 0.5 * (lo + hi),
            l: 0.0,
        })
    }

    fn panel(&self, a: Node, b: Node, depth: u32) -> Result<f64> {
        let m = self.node(0.5 * (a.theta + b.theta))?;
        let nodes = [a, m, b];
        for w in 0..2 {
            let (p, q) = (nodes[w], nodes[w + 1]);
            let opposite = (p.l > 0.0 && q.l < 0.0) || (p.l < 0.0 && q.l > 0.0);
            if self.part == Part::Positive && opposite && q.theta - p.theta > 1e-13 {
                let c = self.crossing(p, q)?;
                if depth >= MAX_DEPTH {
                    return Err(self.failure(a, b));
                }
                return Ok(self.panel(a, c, depth + 1)? + self.panel(c, b, depth + 1)?);
            }
        }
        let h = b.theta - a.theta;
        let (va, vm, vb) = (a.value(self.part), m.value(self.part), b.value(self.part));
        let coarse = 0.5 * h * (va + vb);
        let fine = 0.25 * h * (va + 2.0 * vm + vb);
        let err = (fine - coarse).abs() / 3.0;
        if depth >= MIN_DEPTH && err <= self.tol * h {
            return Ok(fine + (fine - coarse) / 3.0);
        }
        if depth >= MAX_DEPTH {
            if self.part == Part::Full {
                return Ok(fine);
            }
            return Err(self.failure(a, b));
        }
        Ok(self.panel(a, m, depth + 1)? + self.panel(m, b, depth + 1)?)
    }

    fn failure(&self, a: Node, b: Node) -> Error {
        Error::Quadrature {
            r: self.r,
            lo: a.theta,
            hi: b.theta,
        }
    }
}

fn integrate(f: &Expr, r: f64, part: Part) -> Result<f64> {
    let mut it = Integrator {
        f,
        r,
        part,
        tol: 0.0,
        band: 0.0,
    };
    let h = TAU / INITIAL_PANELS as f64;
    let mut nodes = (0..=INITIAL_PANELS)
        .map(|k| it.node(h * k as f64))
        .collect::<Result<Vec<_>>>()?;
    it.band = 1e-13 * nodes.iter().fold(1.0f64, |m, n| m.max(n.l.abs()));
    for n in &mut nodes {
        if n.l.abs() <= it.band {
            n.l = 0.0;
        }
    }
    let coarse = nodes[..INITIAL_PANELS]
        .iter()
        .map(|n| n.value(part).abs())
        .sum::<f64>()
        / INITIAL_PANELS as f64;
    it.tol = 1e-8 * coarse.max(1.0);
    let mut total = 0.0;
    for w in nodes.windows(2) {
        total += it.panel(w[0], w[1], 0)?;
    }
    Ok(total / TAU)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::{E, PI};

    #[test]
    fn exponential_gives_r_over_pi() {
        let m = proximity(&parse("exp(z)").unwrap(), 10.0).unwrap();
        assert!((m - 10.0 / PI).abs() < 1e-8, "{m}");
        assert!((m - 3.18310).abs() < 1e-5);
    }

    #[test]
    fn small_constant_has_zero_proximity() {
        assert_eq!(proximity(&Expr::real(0.5), 7.0).unwrap(), 0.0);
    }

    #[test]
    fn square_at_e() {
        let m = proximity(&parse("z^2").unwrap(), E).unwrap();
        assert!((m - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_on_circle_is_perturbed() {
        // z - 2 vanishes exactly at theta = 0 on |z| = 2
        let m = proximity(&parse("z - 2").unwrap(), 2.0).unwrap();
        // oracle: (1/2pi) int ln+ |2 e^{it} - 2| dt, computed by brute force
        let n = 200_000;
        let brute: f64 = (0..n)
            .map(|k| {
                let t = TAU * (k as f64 + 0.5) / n as f64;
                (8.0 * (1.0 - t.cos())).sqrt().ln().max(0.0)
            })
            .sum::<f64>()
            / n as f64;
        assert!((m - brute).abs() < 1e-6, "{m} vs {brute}");
    }

    #[test]
    fn jensen_mean_matches_zero_moduli() {
        // zeros 0.5 and 3 (and none outside): mean ln|f| on |z| = 2 equals
        // ln|f(0)| + ln(2/0.5) = ln 1.5 + ln 4
        let f = parse("(z - 0.5) * (z - 3)").unwrap();
        let j = circle_mean_log(&f, 2.0).unwrap();
        assert!((j - (1.5f64.ln() + 4f64.ln())).abs() < 1e-9, "{j}");
    }

    #[test]
    fn jensen_mean_with_zero_on_circle() {
        // the zero at 2 sits on the circle; the mean is ln 2 either way
        let j = circle_mean_log(&parse("z - 2").unwrap(), 2.0).unwrap();
        assert!((j - 2f64.ln()).abs() < 1e-6, "{j}");
    }
}
