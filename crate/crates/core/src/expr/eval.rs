use num_complex::Complex64;

use super::Expr;
use crate::error::EvalError;
use crate::ext::ExtComplex;

/// Evaluates `f` at `z` in extended-range arithmetic.
///
/// Every intermediate value is range-checked, so an exponent blow-up is
/// reported as [`EvalError::RangeOverflow`] rather than becoming infinite.
pub fn eval(f: &Expr, z: ExtComplex) -> Result<ExtComplex, EvalError> {
    let v = match f {
        Expr::Const(c) => ExtComplex::from_complex(*c),
        Expr::Z => z,
        Expr::Add(a, b) => eval(a, z)? + eval(b, z)?,
        Expr::Sub(a, b) => eval(a, z)? - eval(b, z)?,
        Expr::Mul(a, b) => eval(a, z)? * eval(b, z)?,
        Expr::Div(a, b) => eval(a, z)?.try_div(eval(b, z)?)?,
        Expr::Pow(a, n) => eval(a, z)?.powi(i64::from(*n))?,
        Expr::Exp(a) => eval(a, z)?.exp()?,
        Expr::Cos(a) => eval(a, z)?.cos()?,
        Expr::Sin(a) => eval(a, z)?.sin()?,
        Expr::Sqrt(a) => eval(a, z)?.sqrt(),
    };
    v.checked()
}

/// [`eval`] at an ordinary complex point.
pub fn eval_at(f: &Expr, z: Complex64) -> Result<ExtComplex, EvalError> {
    eval(f, ExtComplex::from_complex(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::{LN_2, PI};

    #[test]
    fn exp_z_squared_at_ten() {
        let v = eval_at(&parse("exp(z^2)").unwrap(), Complex64::new(10.0, 0.0)).unwrap();
        assert!((v.log2_abs().unwrap() - 100.0 / LN_2).abs() < 1e-10);
        assert!((v.log2_abs().unwrap() - 144.2695).abs() < 1e-4);
        assert_eq!(v.arg(), 0.0);
    }

    #[test]
    fn identity() {
        let v = eval_at(&Expr::Z, Complex64::new(3.0, 4.0)).unwrap();
        assert_eq!(v, ExtComplex::from_complex(Complex64::new(3.0, 4.0)));
        assert_eq!(v.mantissa().norm(), 5.0 / 8.0);
    }

    #[test]
    fn cos_sqrt_zero() {
        let v = eval_at(
            &parse("cos(sqrt(z))").unwrap(),
            Complex64::new(PI * PI / 4.0, 0.0),
        )
        .unwrap();
        assert!(v.to_complex().norm() < 1e-12);
    }

    #[test]
    fn exp_hundred_log() {
        let v = eval_at(&parse("exp(z)").unwrap(), Complex64::new(100.0, 0.0)).unwrap();
        assert!((v.log2_abs().unwrap() - 100.0 / LN_2).abs() < 1e-12);
    }

    #[test]
    fn division_by_zero() {
        let e = parse("1/z").unwrap();
        assert_eq!(
            eval_at(&e, Complex64::new(0.0, 0.0)),
            Err(EvalError::DivisionByZero)
        );
    }

    #[test]
    fn overflow_is_reported_not_infinite() {
        let e = parse("exp(exp(z))").unwrap();
        assert_eq!(
            eval_at(&e, Complex64::new(50.0, 0.0)),
            Err(EvalError::RangeOverflow)
        );
        let e = parse("exp(z)^100000000").unwrap();
        assert_eq!(
            eval_at(&e, Complex64::new(1e12, 0.0)),
            Err(EvalError::RangeOverflow)
        );
    }

    #[test]
    fn cos_sqrt_is_continuous_across_the_cut() {
        let e = parse("cos(sqrt(z))").unwrap();
        for &x in &[-0.5, -3.0, -40.0, -500.0] {
            let above = eval_at(&e, Complex64::new(x, 1e-12)).unwrap();
            let below = eval_at(&e, Complex64::new(x, -1e-12)).unwrap();
            let on = eval_at(&e, Complex64::new(x, 0.0)).unwrap();
            assert!(ExtComplex::rel_diff(above, below) < 1e-9);
            assert!(ExtComplex::rel_diff(above, on) < 1e-9);
        }
    }
}
