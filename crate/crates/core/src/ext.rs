//! Extended-range complex numbers.
//!
//! An [`ExtComplex`] stores a complex mantissa together with a signed base-2
//! exponent, so values like `exp(r^2)` for `r = 10^6` stay representable.
//! Products and quotients are exact integer operations on the exponent; only
//! the mantissa carries rounding.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::EvalError;

/// Largest exponent magnitude allowed to come out of an evaluation.
///
/// Kept well below `i64::MAX` so a single product of two in-range values can
/// never overflow the integer exponent.
pub const EXPONENT_LIMIT: i64 = 1 << 61;

/// Exponent gap above which addition returns the larger operand unchanged.
pub const ABSORPTION_GAP: i64 = 128;

// ln 2 split into a double and its residual, for argument reduction in `exp`.
const LN2_HI: f64 = std::f64::consts::LN_2;
const LN2_LO: f64 = 2.319_046_813_846_299_6e-17;

/// Complex value `mantissa * 2^exponent` with `|mantissa|` in `[0.5, 1)`, or
/// exact zero (mantissa 0, exponent 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtComplex {
    mantissa: Complex64,
    exponent: i64,
}

impl ExtComplex {
    pub const ZERO: ExtComplex = ExtComplex {
        mantissa: Complex64::new(0.0, 0.0),
        exponent: 0,
    };
    pub const ONE: ExtComplex = ExtComplex {
        mantissa: Complex64::new(0.5, 0.0),
        exponent: 1,
    };

    /// Builds `mantissa * 2^exponent`, renormalizing the mantissa.
    ///
    /// Panics if the mantissa is not finite.
    pub fn new(mantissa: Complex64, exponent: i64) -> Self {
        assert!(
            mantissa.re.is_finite() && mantissa.im.is_finite(),
            "non-finite mantissa {mantissa}"
        );
        Self::normalized(mantissa, exponent)
    }

    pub fn from_f64(x: f64) -> Self {
        Self::new(Complex64::new(x, 0.0), 0)
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z, 0)
    }

    /// `2^k` exactly.
    pub fn pow2(k: i64) -> Self {
        ExtComplex {
            mantissa: Complex64::new(0.5, 0.0),
            exponent: k.saturating_add(1),
        }
    }

    pub fn mantissa(&self) -> Complex64 {
        self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    /// `log2 |v|`; the exponent dominates so this never overflows.
    pub fn log2_abs(&self) -> Result<f64, EvalError> {
        if self.is_zero() {
            return Err(EvalError::LogOfZero);
        }
        Ok(self.mantissa.norm().log2() + self.exponent as f64)
    }

    /// Natural log of the modulus.
    pub fn ln_abs(&self) -> Result<f64, EvalError> {
        self.log2_abs().map(|l| l * LN2_HI)
    }

    /// Natural log of the modulus with `-inf` for zero.
    pub fn ln_abs_or_neg_inf(&self) -> f64 {
        self.ln_abs().unwrap_or(f64::NEG_INFINITY)
    }

    /// Principal argument in `(-pi, pi]`.
    pub fn arg(&self) -> f64 {
        self.mantissa.arg()
    }

    /// Converts to a plain double complex; may overflow to infinity or
    /// underflow to zero.
    pub fn to_complex(&self) -> Complex64 {
        let k = self.exponent.clamp(-4000, 4000) as i32;
        Complex64::new(scalbn(self.mantissa.re, k), scalbn(self.mantissa.im, k))
    }

    /// `true` when `|exponent| <= EXPONENT_LIMIT`.
    pub fn in_range(&self) -> bool {
        self.exponent.abs() <= EXPONENT_LIMIT
    }

    pub(crate) fn checked(self) -> Result<Self, EvalError> {
        if self.in_range() {
            Ok(self)
        } else {
            Err(EvalError::RangeOverflow)
        }
    }

    pub fn conj(&self) -> Self {
        ExtComplex {
            mantissa: self.mantissa.conj(),
            exponent: self.exponent,
        }
    }

    /// Multiplication by the imaginary unit (exact).
    pub fn mul_i(&self) -> Self {
        ExtComplex {
            mantissa: Complex64::new(-self.mantissa.im, self.mantissa.re),
            exponent: self.exponent,
        }
    }

    /// Multiplication by `2^k` (exact).
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return *self;
        }
        ExtComplex {
            mantissa: self.mantissa,
            exponent: self.exponent.saturating_add(k),
        }
    }

    pub fn recip(&self) -> Result<Self, EvalError> {
        ExtComplex::ONE.try_div(*self)
    }

    pub fn try_div(self, rhs: Self) -> Result<Self, EvalError> {
        if rhs.is_zero() {
            return Err(EvalError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(ExtComplex::ZERO);
        }
        Ok(Self::normalized(
            self.mantissa / rhs.mantissa,
            self.exponent.saturating_sub(rhs.exponent),
        ))
    }

    /// Integer power by repeated squaring; negative powers go through the
    /// reciprocal.
    pub fn powi(self, n: i64) -> Result<Self, EvalError> {
        if n == 0 {
            return Ok(ExtComplex::ONE);
        }
        let mut base = if n < 0 { self.recip()? } else { self };
        let mut k = n.unsigned_abs();
        let mut acc = ExtComplex::ONE;
        loop {
            if k & 1 == 1 {
                acc = (acc * base).checked()?;
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            base = (base * base).checked()?;
        }
        Ok(acc)
    }

    /// Complex exponential with extended-range output.
    ///
    /// Fails with [`EvalError::RangeOverflow`] when the real part is too large
    /// for the exponent range; a hugely negative real part underflows to zero.
    pub fn exp(self) -> Result<Self, EvalError> {
        if self.is_zero() {
            return Ok(ExtComplex::ONE);
        }
        if self.exponent > 1000 {
            // |w| >= 2^999: only a purely negative real argument has a
            // meaningful (zero) result.
            if self.mantissa.im == 0.0 && self.mantissa.re < 0.0 {
                return Ok(ExtComplex::ZERO);
            }
            return Err(EvalError::RangeOverflow);
        }
        let w = self.to_complex();
        let k = (w.re * std::f64::consts::LOG2_E).round();
        if k > EXPONENT_LIMIT as f64 {
            return Err(EvalError::RangeOverflow);
        }
        if k < -(EXPONENT_LIMIT as f64) {
            return Ok(ExtComplex::ZERO);
        }
        let rem = (-k).mul_add(LN2_HI, w.re);
        let rem = (-k).mul_add(LN2_LO, rem);
        let mag = rem.exp();
        let (s, c) = w.im.sin_cos();
        Ok(Self::normalized(Complex64::new(mag * c, mag * s), k as i64))
    }

    pub fn cos(self) -> Result<Self, EvalError> {
        if let Some(w) = self.small_imaginary() {
            return Ok(Self::from_complex(w.cos()));
        }
        let iw = self.mul_i();
        let sum = iw.exp()? + (-iw).exp()?;
        Ok(sum.mul_pow2(-1))
    }

    pub fn sin(self) -> Result<Self, EvalError> {
        if let Some(w) = self.small_imaginary() {
            return Ok(Self::from_complex(w.sin()));
        }
        let iw = self.mul_i();
        let diff = iw.exp()? - (-iw).exp()?;
        // (e^{iw} - e^{-iw}) / (2i) = -i (e^{iw} - e^{-iw}) / 2
        Ok((-diff.mul_i()).mul_pow2(-1))
    }

    /// Principal square root (argument of the input taken in `(-pi, pi]`).
    pub fn sqrt(self) -> Self {
        if self.is_zero() {
            return self;
        }
        let (mut m, e) = if self.exponent % 2 == 0 {
            (self.mantissa, self.exponent)
        } else {
            (self.mantissa * 2.0, self.exponent - 1)
        };
        if m.im == 0.0 {
            // -0.0 would select the lower half of the cut
            m.im = 0.0;
        }
        Self::normalized(m.sqrt(), e / 2)
    }

    /// `|a - b| / max(|a|, |b|)`, zero when both vanish.
    pub fn rel_diff(a: Self, b: Self) -> f64 {
        let d = a - b;
        if d.is_zero() {
            return 0.0;
        }
        let scale = a
            .log2_abs()
            .unwrap_or(f64::NEG_INFINITY)
            .max(b.log2_abs().unwrap_or(f64::NEG_INFINITY));
        (d.log2_abs().unwrap() - scale).exp2()
    }

    /// The value as an ordinary complex number when it fits and its imaginary
    /// part is small enough for the direct cos/sin formulas.
    fn small_imaginary(&self) -> Option<Complex64> {
        if self.exponent > 1000 {
            return None;
        }
        let w = self.to_complex();
        (w.im.abs() <= 700.0).then_some(w)
    }

    fn normalized(m: Complex64, e: i64) -> Self {
        if m.re == 0.0 && m.im == 0.0 {
            return ExtComplex::ZERO;
        }
        let big = m.re.abs().max(m.im.abs());
        let (_, k) = frexp(big);
        let mut s = Complex64::new(scalbn(m.re, -k), scalbn(m.im, -k));
        let mut e = e.saturating_add(k as i64);
        if s.norm() >= 1.0 {
            s *= 0.5;
            e = e.saturating_add(1);
        }
        ExtComplex {
            mantissa: s,
            exponent: e,
        }
    }
}

impl From<f64> for ExtComplex {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl From<Complex64> for ExtComplex {
    fn from(z: Complex64) -> Self {
        Self::from_complex(z)
    }
}

impl Add for ExtComplex {
    type Output = ExtComplex;

    fn add(self, rhs: ExtComplex) -> ExtComplex {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let gap = self.exponent.saturating_sub(rhs.exponent);
        if gap > ABSORPTION_GAP {
            return self;
        }
        if gap < -ABSORPTION_GAP {
            return rhs;
        }
        let (e, sum) = if gap >= 0 {
            (
                self.exponent,
                self.mantissa + scale_c(rhs.mantissa, -gap as i32),
            )
        } else {
            (
                rhs.exponent,
                rhs.mantissa + scale_c(self.mantissa, gap as i32),
            )
        };
        ExtComplex::normalized(sum, e)
    }
}

impl Sub for ExtComplex {
    type Output = ExtComplex;

    fn sub(self, rhs: ExtComplex) -> ExtComplex {
        self + (-rhs)
    }
}

impl Neg for ExtComplex {
    type Output = ExtComplex;

    fn neg(self) -> ExtComplex {
        ExtComplex {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Mul for ExtComplex {
    type Output = ExtComplex;

    fn mul(self, rhs: ExtComplex) -> ExtComplex {
        if self.is_zero() || rhs.is_zero() {
            return ExtComplex::ZERO;
        }
        ExtComplex::normalized(
            self.mantissa * rhs.mantissa,
            self.exponent.saturating_add(rhs.exponent),
        )
    }
}

impl fmt::Display for ExtComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({} + {}i) * 2^{}",
            self.mantissa.re, self.mantissa.im, self.exponent
        )
    }
}

fn scale_c(z: Complex64, k: i32) -> Complex64 {
    Complex64::new(scalbn(z.re, k), scalbn(z.im, k))
}

/// Splits a finite nonzero `x` into `f * 2^e` with `|f|` in `[0.5, 1)`.
pub(crate) fn frexp(x: f64) -> (f64, i32) {
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    if biased == 0 {
        if x == 0.0 {
            return (x, 0);
        }
        let (f, e) = frexp(x * f64::from_bits(0x43f0_0000_0000_0000)); // 2^64
        return (f, e - 64);
    }
    let f = f64::from_bits((bits & 0x800f_ffff_ffff_ffff) | 0x3fe0_0000_0000_0000);
    (f, biased - 0x3fe)
}

/// `x * 2^n` computed exactly (up to final over/underflow).
pub(crate) fn scalbn(x: f64, mut n: i32) -> f64 {
    let p1023 = f64::from_bits(0x7fe0_0000_0000_0000);
    let pm969 = f64::from_bits(0x0360_0000_0000_0000); // 2^-1022 * 2^53
    let mut y = x;
    if n > 1023 {
        y *= p1023;
        n -= 1023;
        if n > 1023 {
            y *= p1023;
            n -= 1023;
            if n > 1023 {
                n = 1023;
            }
        }
    } else if n < -1022 {
        y *= pm969;
        n += 1022 - 53;
        if n < -1022 {
            y *= pm969;
            n += 1022 - 53;
            if n < -1022 {
                n = -1022;
            }
        }
    }
    y * f64::from_bits(((0x3ff + n) as u64) << 52)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_normalized(v: ExtComplex) -> bool {
        let n = v.mantissa().norm();
        v.is_zero() && v.exponent() == 0 || (0.5..1.0).contains(&n)
    }

    #[test]
    fn one_has_zero_log() {
        assert_eq!(ExtComplex::ONE.log2_abs().unwrap(), 0.0);
        assert_eq!(ExtComplex::from_f64(1.0), ExtComplex::ONE);
    }

    #[test]
    fn pow2_log_is_exact() {
        assert_eq!(ExtComplex::pow2(1000).log2_abs().unwrap(), 1000.0);
        assert_eq!(
            ExtComplex::pow2(-1_000_000).log2_abs().unwrap(),
            -1_000_000.0
        );
    }

    #[test]
    fn zero_log_is_an_error() {
        assert_eq!(ExtComplex::ZERO.log2_abs(), Err(EvalError::LogOfZero));
    }

    #[test]
    fn identity_value_is_normalized() {
        let v = ExtComplex::from_complex(Complex64::new(3.0, 4.0));
        assert!(is_normalized(v));
        assert_eq!(v.exponent(), 3);
        assert_eq!(v.to_complex(), Complex64::new(3.0, 4.0));
    }

    #[test]
    fn exp_of_hundred_on_real_axis() {
        let v = ExtComplex::from_f64(100.0).exp().unwrap();
        let expected = 100.0 / std::f64::consts::LN_2;
        assert!((v.log2_abs().unwrap() - expected).abs() < 1e-12);
        assert_eq!(v.arg(), 0.0);
    }

    #[test]
    fn exp_far_beyond_double_range() {
        let v = ExtComplex::from_f64(1e12).exp().unwrap();
        let expected = 1e12 / std::f64::consts::LN_2;
        assert!((v.log2_abs().unwrap() - expected).abs() / expected < 1e-15);
    }

    #[test]
    fn exp_overflow_is_reported() {
        let big = ExtComplex::from_f64(1e19);
        assert_eq!(big.exp(), Err(EvalError::RangeOverflow));
        assert_eq!(ExtComplex::from_f64(-1e19).exp().unwrap(), ExtComplex::ZERO);
    }

    #[test]
    fn absorption_returns_larger_operand() {
        let a = ExtComplex::pow2(200);
        let b = ExtComplex::from_f64(3.0);
        assert_eq!(a + b, a);
        assert_eq!(b + a, a);
        let c = ExtComplex::pow2(40);
        assert_ne!(c + b, c);
    }

    #[test]
    fn sqrt_is_principal() {
        let m1 = ExtComplex::from_complex(Complex64::new(-1.0, -0.0));
        let r = m1.sqrt().to_complex();
        assert!((r - Complex64::new(0.0, 1.0)).norm() < 1e-16);
        let below = ExtComplex::from_complex(Complex64::new(-4.0, -1e-300))
            .sqrt()
            .to_complex();
        assert!(below.im < 0.0);
        let odd = ExtComplex::from_f64(8.0).sqrt().to_complex();
        assert!((odd.re - 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cos_and_sin_match_double_formulas() {
        for &(x, y) in &[(0.3, 0.2), (-2.0, 5.0), (10.0, -30.0)] {
            let w = Complex64::new(x, y);
            let e = ExtComplex::from_complex(w);
            let c = e.cos().unwrap().to_complex();
            let s = e.sin().unwrap().to_complex();
            assert!((c - w.cos()).norm() <= 1e-14 * w.cos().norm());
            assert!((s - w.sin()).norm() <= 1e-14 * w.sin().norm());
        }
    }

    #[test]
    fn cos_large_imaginary_uses_exponential_form() {
        // |cos(x + iy)| ~ e^{|y|}/2 for large |y|
        let e = ExtComplex::from_complex(Complex64::new(0.25, 5000.0));
        let l = e.cos().unwrap().ln_abs().unwrap();
        assert!((l - (5000.0 - std::f64::consts::LN_2)).abs() < 1e-9);
        let l = e.sin().unwrap().ln_abs().unwrap();
        assert!((l - (5000.0 - std::f64::consts::LN_2)).abs() < 1e-9);
    }

    #[test]
    fn powi_negative() {
        let v = ExtComplex::from_f64(2.0).powi(-3).unwrap().to_complex();
        assert_eq!(v, Complex64::new(0.125, 0.0));
        assert_eq!(ExtComplex::ZERO.powi(-1), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn frexp_subnormal() {
        let (f, e) = frexp(f64::MIN_POSITIVE / 8.0);
        assert_eq!(f, 0.5);
        assert_eq!(e, -1024);
    }
}
