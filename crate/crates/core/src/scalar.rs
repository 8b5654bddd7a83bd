//! Complex scalar backends.
//!
//! Two backends implement [`Scalar`]: [`Exact`] (Gaussian rationals, arbitrary
//! precision) and [`Float`] (`Complex64`). Generic code is written once over
//! `S: Scalar`, so one expression can never mix the two.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Backend::Exact),
            "float" => Ok(Backend::Float),
            other => Err(format!("unknown backend {other:?} (expected exact or float)")),
        }
    }
}

/// Relative tolerance the float backend uses when it has to decide whether a
/// value is real.
pub const FLOAT_REAL_TOL: f64 = 1e-12;

pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const BACKEND: Backend;

    fn zero() -> Self;
    fn one() -> Self;
    /// The imaginary unit.
    fn i() -> Self;
    fn from_i64(n: i64) -> Self;
    /// The real number `num / den`.
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Converts a pair of doubles. The exact backend stores their exact dyadic value.
    fn from_f64_parts(re: f64, im: f64) -> Self;

    fn conj(&self) -> Self;
    fn re(&self) -> Self;
    fn im(&self) -> Self;
    /// Exact test against zero; the float backend does no pruning either.
    fn is_zero(&self) -> bool;
    fn to_c64(&self) -> Complex64;

    /// Real and strictly positive (the float backend allows a relative
    /// imaginary part up to [`FLOAT_REAL_TOL`]).
    fn is_positive_real(&self) -> bool;
    /// Zero on the exact backend; modulus at most `tol` on the float backend.
    fn is_negligible(&self, tol: f64) -> bool;
    /// Square root of a nonnegative real value, when the backend can represent it.
    fn sqrt_nonneg(&self) -> Option<Self>;

    /// `self -= a * b`, the inner step of elimination.
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        let prod = a.clone() * b.clone();
        let cur = std::mem::replace(self, Self::zero());
        *self = cur - prod;
    }

    fn norm_sqr(&self) -> Self {
        self.clone() * self.conj()
    }

    fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }
}

/// Gaussian rational `re + im·i` with arbitrary-precision rational parts.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

pub type Exact = GaussRational;
pub type Float = Complex64;

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRational { re, im: BigRational::zero() }
    }

    /// Parses `"p/q"`, `"p"` (optionally signed) into a rational.
    pub fn parse_rational(s: &str) -> Option<BigRational> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let num: BigInt = num.parse().ok()?;
        let den: BigInt = den.parse().ok()?;
        if den.is_zero() {
            return None;
        }
        Some(BigRational::new(num, den))
    }

    /// Parses a decimal literal such as `"0.5"` or `"-1.25"` exactly.
    pub fn parse_decimal(s: &str) -> Option<BigRational> {
        let s = s.trim();
        if let Some(r) = Self::parse_rational(s) {
            return Some(r);
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (int, frac) = body.split_once('.')?;
        if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        if int.is_empty() && frac.is_empty() {
            return None;
        }
        let digits = format!("{int}{frac}");
        let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(num, den);
        Some(if neg { -r } else { r })
    }

    pub fn rational_to_string(r: &BigRational) -> String {
        format!("{}/{}", r.numer(), r.denom())
    }

    fn mul_ref(&self, o: &Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return Self::real(&self.re * &o.re);
        }
        GaussRational {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn div_ref(&self, o: &Self) -> Self {
        assert!(!o.is_zero_val(), "division by zero Gaussian rational");
        if o.im.is_zero() {
            return GaussRational { re: &self.re / &o.re, im: &self.im / &o.re };
        }
        let den = &o.re * &o.re + &o.im * &o.im;
        GaussRational {
            re: (&self.re * &o.re + &self.im * &o.im) / &den,
            im: (&self.im * &o.re - &self.re * &o.im) / &den,
        }
    }

    fn is_zero_val(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl fmt::Debug for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -&self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl Add for GaussRational {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        GaussRational { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for GaussRational {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        GaussRational { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for GaussRational {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.mul_ref(&o)
    }
}

impl Div for GaussRational {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self.div_ref(&o)
    }
}

impl Neg for GaussRational {
    type Output = Self;
    fn neg(self) -> Self {
        GaussRational { re: -self.re, im: -self.im }
    }
}

impl Scalar for GaussRational {
    const BACKEND: Backend = Backend::Exact;

    fn zero() -> Self {
        GaussRational { re: BigRational::zero(), im: BigRational::zero() }
    }
    fn one() -> Self {
        Self::real(BigRational::one())
    }
    fn i() -> Self {
        GaussRational { re: BigRational::zero(), im: BigRational::one() }
    }
    fn from_i64(n: i64) -> Self {
        Self::real(BigRational::from_integer(n.into()))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::real(BigRational::new(num.into(), den.into()))
    }
    fn from_f64_parts(re: f64, im: f64) -> Self {
        let conv = |x: f64| BigRational::from_float(x).expect("finite float");
        GaussRational { re: conv(re), im: conv(im) }
    }
    fn conj(&self) -> Self {
        GaussRational { re: self.re.clone(), im: -&self.im }
    }
    fn re(&self) -> Self {
        Self::real(self.re.clone())
    }
    fn im(&self) -> Self {
        Self::real(self.im.clone())
    }
    fn is_zero(&self) -> bool {
        self.is_zero_val()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
    fn is_positive_real(&self) -> bool {
        self.im.is_zero() && self.re.is_positive()
    }
    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero_val()
    }
    fn sqrt_nonneg(&self) -> Option<Self> {
        if !self.im.is_zero() || self.re.is_negative() {
            return None;
        }
        let n = self.re.numer().sqrt();
        let d = self.re.denom().sqrt();
        (&n * &n == *self.re.numer() && &d * &d == *self.re.denom())
            .then(|| Self::real(BigRational::new(n, d)))
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        if a.im.is_zero() && b.im.is_zero() {
            self.re -= &a.re * &b.re;
        } else {
            let p = a.mul_ref(b);
            self.re -= p.re;
            self.im -= p.im;
        }
    }
    fn norm_sqr(&self) -> Self {
        Self::real(&self.re * &self.re + &self.im * &self.im)
    }
}

impl Scalar for Complex64 {
    const BACKEND: Backend = Backend::Float;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn i() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
    fn from_f64_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn re(&self) -> Self {
        Complex64::new(self.re, 0.0)
    }
    fn im(&self) -> Self {
        Complex64::new(self.im, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn is_positive_real(&self) -> bool {
        self.re > 0.0 && self.im.abs() <= FLOAT_REAL_TOL * self.re.abs().max(1.0)
    }
    fn is_negligible(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
    fn sqrt_nonneg(&self) -> Option<Self> {
        (self.re >= 0.0 && self.im.abs() <= FLOAT_REAL_TOL * self.re.max(1.0))
            .then(|| Complex64::new(self.re.sqrt(), 0.0))
    }
    fn sub_mul_assign(&mut self, a: &Self, b: &Self) {
        *self -= a * b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn gauss_rational_arithmetic() {
        let a = GaussRational::new(q(1, 2), q(1, 3));
        let b = GaussRational::new(q(-2, 1), q(3, 4));
        let prod = a.clone() * b.clone();
        // (1/2 + i/3)(-2 + 3i/4) = -1 - 1/4 + i(3/8 - 2/3)
        assert_eq!(prod, GaussRational::new(q(-5, 4), q(-7, 24)));
        assert_eq!(prod / b.clone(), a);
        assert_eq!(Exact::i() * Exact::i(), -Exact::one());
    }

    #[test]
    fn sub_mul_matches_generic_path() {
        let a = GaussRational::new(q(3, 5), q(-1, 7));
        let b = GaussRational::new(q(2, 1), q(1, 2));
        let mut x = GaussRational::new(q(1, 1), q(1, 1));
        let expected = x.clone() - a.clone() * b.clone();
        x.sub_mul_assign(&a, &b);
        assert_eq!(x, expected);
    }

    #[test]
    fn parse_literals() {
        assert_eq!(GaussRational::parse_rational("-3/6"), Some(q(-1, 2)));
        assert_eq!(GaussRational::parse_rational("7"), Some(q(7, 1)));
        assert_eq!(GaussRational::parse_rational("1/0"), None);
        assert_eq!(GaussRational::parse_decimal("0.5"), Some(q(1, 2)));
        assert_eq!(GaussRational::parse_decimal("-1.25"), Some(q(-5, 4)));
        assert_eq!(GaussRational::parse_decimal("abc"), None);
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(Exact::from_ratio(9, 4).sqrt_nonneg(), Some(Exact::from_ratio(3, 2)));
        assert_eq!(Exact::from_ratio(2, 1).sqrt_nonneg(), None);
        assert_eq!(Exact::from_ratio(-1, 1).sqrt_nonneg(), None);
    }

    #[test]
    fn display_forms() {
        assert_eq!(GaussRational::new(q(1, 2), q(-1, 1)).to_string(), "1/2-1i");
        assert_eq!(Exact::i().to_string(), "1i");
        assert_eq!(Exact::from_i64(3).to_string(), "3");
    }
}
