//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := atom ('^' integer)?
//! atom   := number | 'i' | 'pi' | 'z' | func '(' expr ')' | '(' expr ')' | '-' factor
//! func   := exp | cos | sin | sqrt
//! ```
//!
//! Unary minus takes a whole factor, so `-z^2` is `-(z^2)`. The exponent
//! may carry a sign, optionally in parentheses: `z^-2`, `z^(-2)`.

use num_complex::Complex64;

use super::Expr;
use crate::error::ParseError;

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn fold(op: u8, a: Expr, b: Expr) -> Expr {
    match (&a, &b, op) {
        (Expr::Const(_), Expr::Const(_), b'+') => Expr::add(a, b),
        (Expr::Const(_), Expr::Const(_), b'-') => Expr::sub(a, b),
        (Expr::Const(_), Expr::Const(_), b'*') => Expr::mul(a, b),
        (Expr::Const(_), Expr::Const(_), b'/') => Expr::div(a, b),
        (_, _, b'+') => Expr::Add(Box::new(a), Box::new(b)),
        (_, _, b'-') => Expr::Sub(Box::new(a), Box::new(b)),
        (_, _, b'*') => Expr::Mul(Box::new(a), Box::new(b)),
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

impl Parser<'_> {
    fn syntax(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = fold(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = fold(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let n = self.integer_exponent()?;
            return Ok(match base {
                Expr::Const(_) => Expr::pow(base, n),
                _ => Expr::Pow(Box::new(base), n),
            });
        }
        Ok(base)
    }

    fn integer_exponent(&mut self) -> Result<i32, ParseError> {
        let paren = self.peek() == Some(b'(');
        if paren {
            self.pos += 1;
        }
        self.skip_ws();
        let start = self.pos;
        let negative = match self.src.get(self.pos) {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let digits_start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let fractional = matches!(self.src.get(self.pos), Some(b'.'))
            || (matches!(self.src.get(self.pos), Some(b'e' | b'E'))
                && self
                    .src
                    .get(self.pos + 1)
                    .is_some_and(|c| c.is_ascii_digit() || *c == b'-' || *c == b'+'));
        if fractional || (self.pos == digits_start && self.src.get(self.pos) == Some(&b'.')) {
            return Err(ParseError::NonIntegerExponent { offset: start });
        }
        if self.pos == digits_start {
            self.pos = start;
            return Err(self.syntax("expected integer exponent"));
        }
        let text = std::str::from_utf8(&self.src[digits_start..self.pos]).unwrap();
        let magnitude: i32 = text.parse().map_err(|_| ParseError::Syntax {
            offset: start,
            message: "exponent out of range".into(),
        })?;
        if paren {
            self.expect(b')')?;
        }
        Ok(if negative { -magnitude } else { magnitude })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(b'-') => {
                self.pos += 1;
                let e = self.factor()?;
                Ok(Expr::neg(e))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(_) => Err(self.syntax("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.syntax("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
            offset: start,
            message: "malformed number".into(),
        })?;
        Ok(Expr::real(v))
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let func: fn(Expr) -> Expr = match name {
            "z" => return Ok(Expr::Z),
            "i" => return Ok(Expr::Const(Complex64::new(0.0, 1.0))),
            "pi" => return Ok(Expr::real(std::f64::consts::PI)),
            "exp" => Expr::exp,
            "cos" => Expr::cos,
            "sin" => Expr::sin,
            "sqrt" => Expr::sqrt,
            _ => {
                self.pos = start;
                return Err(self.syntax(&format!("unknown identifier '{name}'")));
            }
        };
        self.expect(b'(')?;
        let arg = self.expr()?;
        self.expect(b')')?;
        Ok(func(arg))
    }
}
