//! Expression trees for entire and meromorphic functions of `z`.
//!
//! Trees are immutable once built. The smart constructors ([`Expr::add`],
//! [`Expr::mul`], ...) fold constants and drop neutral elements; nothing
//! beyond that is simplified.

mod diff;
mod eval;
mod parse;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

pub use eval::{eval, eval_at};
pub use parse::parse;

use crate::error::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Z,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Exp(Box<Expr>),
    Cos(Box<Expr>),
    Sin(Box<Expr>),
    /// Principal branch.
    Sqrt(Box<Expr>),
}

impl Expr {
    pub fn real(x: f64) -> Expr {
        Expr::Const(Complex64::new(x, 0.0))
    }

    pub fn constant(c: Complex64) -> Expr {
        Expr::Const(c)
    }

    pub fn z() -> Expr {
        Expr::Z
    }

    fn as_const(&self) -> Option<Complex64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_const(&self, v: f64) -> bool {
        self.as_const() == Some(Complex64::new(v, 0.0))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x + y),
            _ if a.is_const(0.0) => b,
            _ if b.is_const(0.0) => a,
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x - y),
            _ if b.is_const(0.0) => a,
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x * y),
            _ if a.is_const(0.0) || b.is_const(0.0) => Expr::real(0.0),
            _ if a.is_const(1.0) => b,
            _ if b.is_const(1.0) => a,
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if y != Complex64::new(0.0, 0.0) => Expr::Const(x / y),
            _ if b.is_const(1.0) => a,
            _ if a.is_const(0.0) => Expr::real(0.0),
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    /// Negation, represented as `0 - a`.
    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Expr) -> Expr {
        match a.as_const() {
            Some(x) => Expr::Const(-x),
            None => Expr::Sub(Box::new(Expr::real(0.0)), Box::new(a)),
        }
    }

    pub fn pow(a: Expr, n: i32) -> Expr {
        match (n, a.as_const()) {
            (0, _) => Expr::real(1.0),
            (1, _) => a,
            (_, Some(x)) if n > 0 || x.norm() > 0.0 => Expr::Const(x.powi(n)),
            _ => Expr::Pow(Box::new(a), n),
        }
    }

    pub fn exp(a: Expr) -> Expr {
        Expr::Exp(Box::new(a))
    }

    pub fn cos(a: Expr) -> Expr {
        Expr::Cos(Box::new(a))
    }

    pub fn sin(a: Expr) -> Expr {
        Expr::Sin(Box::new(a))
    }

    pub fn sqrt(a: Expr) -> Expr {
        Expr::Sqrt(Box::new(a))
    }

    /// Exact symbolic derivative with respect to `z`.
    pub fn diff(&self) -> Expr {
        diff::diff(self)
    }

    /// `k`-th derivative.
    pub fn nth_derivative(&self, k: usize) -> Expr {
        (0..k).fold(self.clone(), |e, _| e.diff())
    }

    /// Every denominator appearing in a `Div` node (outermost first).
    pub fn denominators(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Div(_, d) = e {
                out.push(d.as_ref());
            }
        });
        out
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Z => {}
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Pow(a, _) | Expr::Exp(a) | Expr::Cos(a) | Expr::Sin(a) | Expr::Sqrt(a) => {
                a.visit(f)
            }
        }
    }

    fn is_negation(&self) -> bool {
        matches!(self, Expr::Sub(a, _) if a.is_const(0.0))
    }

    fn precedence(&self) -> u8 {
        match self {
            _ if self.is_negation() => 2,
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Pow(..) => 3,
            _ => 4,
        }
    }
}

/// Serialized as its display text.
impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Expr, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Expr, ParseError> {
        parse(s)
    }
}

fn fmt_real(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn fmt_const(c: Complex64) -> String {
    if c.im == 0.0 {
        if c.re < 0.0 {
            format!("({})", fmt_real(c.re))
        } else {
            fmt_real(c.re)
        }
    } else if c.re == 0.0 {
        format!("({}*i)", fmt_real(c.im))
    } else {
        let sign = if c.im < 0.0 { '-' } else { '+' };
        format!("({}{}{}*i)", fmt_real(c.re), sign, fmt_real(c.im.abs()))
    }
}

struct Child<'a>(&'a Expr, bool);

impl fmt::Display for Child<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.precedence();
        match self {
            Expr::Const(c) => f.write_str(&fmt_const(*c)),
            Expr::Z => f.write_str("z"),
            Expr::Sub(_, b) if self.is_negation() => {
                write!(f, "-{}", Child(b, b.precedence() < 3))
            }
            Expr::Add(a, b) => write!(
                f,
                "{} + {}",
                Child(a, a.precedence() < p),
                Child(b, b.precedence() <= p)
            ),
            Expr::Sub(a, b) => write!(
                f,
                "{} - {}",
                Child(a, a.precedence() < p),
                Child(b, b.precedence() <= p && !b.is_negation())
            ),
            Expr::Mul(a, b) => write!(
                f,
                "{}*{}",
                Child(a, a.precedence() < p),
                Child(b, b.precedence() <= p)
            ),
            Expr::Div(a, b) => write!(
                f,
                "{}/{}",
                Child(a, a.precedence() < p),
                Child(b, b.precedence() <= p)
            ),
            Expr::Pow(a, n) => write!(
                f,
                "{}^{}",
                Child(a, a.precedence() < 4 || a.is_negation()),
                n
            ),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding_keeps_variables() {
        let e = Expr::add(Expr::real(0.0), Expr::mul(Expr::real(1.0), Expr::Z));
        assert_eq!(e, Expr::Z);
        let e = Expr::mul(Expr::real(2.0), Expr::real(3.0));
        assert_eq!(e, Expr::real(6.0));
        assert_eq!(Expr::pow(Expr::Z, 0), Expr::real(1.0));
    }

    #[test]
    fn display_parenthesizes_by_precedence() {
        let e = Expr::mul(Expr::add(Expr::Z, Expr::real(1.0)), Expr::Z);
        assert_eq!(e.to_string(), "(z + 1)*z");
        let e = Expr::pow(Expr::neg(Expr::Z), 2);
        assert_eq!(e.to_string(), "(-z)^2");
        let e = Expr::neg(Expr::pow(Expr::Z, 2));
        assert_eq!(e.to_string(), "-z^2");
        let e = Expr::sub(Expr::Z, Expr::sub(Expr::Z, Expr::real(1.0)));
        assert_eq!(e.to_string(), "z - (z - 1)");
        assert_eq!(
            Expr::Const(Complex64::new(1.5, -2.0)).to_string(),
            "(1.5-2*i)"
        );
        // evaluation order is kept for right-nested chains
        let e = Expr::mul(Expr::Z, Expr::div(Expr::Z, Expr::Z));
        assert_eq!(e.to_string(), "z*(z/z)");
    }

    #[test]
    fn denominators_are_collected() {
        let e = Expr::div(Expr::Z, Expr::add(Expr::Z, Expr::real(1.0)));
        assert_eq!(e.denominators().len(), 1);
    }
}
