//! Exact rational numbers.
//!
//! Every distance value and every function parameter in this crate is a
//! [`Rational`]. The type is a thin newtype over [`BigRational`] that adds the
//! textual grammar used by the file formats (`"3"`, `"-1/2"`, `"0.25"`,
//! `"1e-3"`) and a few helpers the checkers need, such as picking the
//! simplest rational inside an interval.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An exact rational number in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRationalError {
    #[error("empty value")]
    Empty,
    #[error("invalid number `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(value: i64) -> Self {
        Rational(BigRational::from_integer(value.into()))
    }

    pub fn from_bigints(numer: BigInt, denom: BigInt) -> Self {
        assert!(!denom.is_zero(), "zero denominator");
        Rational(BigRational::new(numer, denom))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn half(&self) -> Self {
        Rational(&self.0 / BigRational::from_integer(2.into()))
    }

    pub fn double(&self) -> Self {
        Rational(&self.0 + &self.0)
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Exact integer power; negative exponents take the reciprocal.
    pub fn pow(&self, exp: i32) -> Self {
        Rational(num_traits::Pow::pow(&self.0, exp))
    }

    /// The exponent as a small integer, if it is one.
    pub fn to_i32(&self) -> Option<i32> {
        if self.is_integer() {
            self.numer().to_i32()
        } else {
            None
        }
    }

    /// Lossy conversion for display and diagnostics only.
    /// The exact `n`-th root of a nonnegative rational, when it is rational.
    pub fn exact_root(&self, n: u32) -> Option<Rational> {
        if self.is_negative() || n == 0 {
            return None;
        }
        let root = |v: &BigInt| {
            let r = num_integer::Roots::nth_root(v, n);
            (num_traits::pow(r.clone(), n as usize) == *v).then_some(r)
        };
        Some(Rational::from_bigints(root(self.numer())?, root(self.denom())?))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn midpoint(&self, other: &Rational) -> Rational {
        (self + other).half()
    }

    /// Rounds down onto the dyadic grid `2^-bits`.
    pub fn floor_dyadic(&self, bits: u32) -> Rational {
        let scale = BigInt::one() << bits;
        let scaled = &self.0 * BigRational::from_integer(scale.clone());
        Rational(BigRational::new(scaled.floor().to_integer(), scale))
    }

    /// Rounds up onto the dyadic grid `2^-bits`.
    pub fn ceil_dyadic(&self, bits: u32) -> Rational {
        let scale = BigInt::one() << bits;
        let scaled = &self.0 * BigRational::from_integer(scale.clone());
        Rational(BigRational::new(scaled.ceil().to_integer(), scale))
    }

    /// Integer `e` with `2^e <= self < 2^(e+1)`. Requires `self > 0`.
    pub fn binary_exponent(&self) -> i64 {
        assert!(self.is_positive());
        let mut e = self.numer().bits() as i64 - self.denom().bits() as i64;
        let two = Rational::from_integer(2);
        loop {
            let p = two.pow(e as i32);
            if p > *self {
                e -= 1;
            } else if &p * &two <= *self {
                e += 1;
            } else {
                return e;
            }
        }
    }

    /// The simplest rational (smallest denominator, then smallest numerator)
    /// strictly between `lo` and `hi`. `hi = None` means `+∞`. Requires
    /// `0 <= lo < hi`.
    pub fn simplest_between(lo: &Rational, hi: Option<&Rational>) -> Rational {
        debug_assert!(!lo.is_negative());
        if let Some(h) = hi {
            debug_assert!(lo < h);
        }
        let fl = Rational(BigRational::from_integer(lo.floor()));
        let next = &fl + &Rational::one();
        match hi {
            None => return next,
            Some(h) if &next < h => return next,
            _ => {}
        }
        // lo and hi share the integer part fl, with hi <= fl + 1.
        let hi = hi.unwrap();
        let lo_frac = lo - &fl;
        let hi_frac = hi - &fl;
        let inner_lo = hi_frac.recip();
        let inner_hi = if lo_frac.is_zero() { None } else { Some(lo_frac.recip()) };
        let inner = Rational::simplest_between(&inner_lo, inner_hi.as_ref());
        fl + inner.recip()
    }

    /// Orders by (denominator, |numerator|); used to pick readable witnesses.
    pub fn simpler_than(&self, other: &Rational) -> bool {
        match self.denom().cmp(other.denom()) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => self.numer().abs() < other.numer().abs(),
        }
    }
}

impl From<i64> for Rational {
    fn from(value: i64) -> Self {
        Rational::from_integer(value)
    }
}

impl From<BigRational> for Rational {
    fn from(value: BigRational) -> Self {
        Rational(value)
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRationalError::Empty);
        }
        if let Some((n, d)) = s.split_once('/') {
            let n = parse_decimal(n.trim()).ok_or_else(|| ParseRationalError::Invalid(s.into()))?;
            let d = parse_decimal(d.trim()).ok_or_else(|| ParseRationalError::Invalid(s.into()))?;
            if d.is_zero() {
                return Err(ParseRationalError::ZeroDenominator(s.into()));
            }
            return Ok(n / d);
        }
        parse_decimal(s).ok_or_else(|| ParseRationalError::Invalid(s.into()))
    }
}

/// `[+-]digits[.digits][(e|E)[+-]digits]`, evaluated exactly.
fn parse_decimal(s: &str) -> Option<Rational> {
    let (negative, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = BigInt::parse_bytes(if digits.is_empty() { b"0" } else { digits.as_bytes() }, 10)?;
    let scale = exponent.checked_sub(frac_part.len() as i32)?;
    if scale.unsigned_abs() > 10_000 {
        return None;
    }
    let ten = Rational::from_integer(10);
    let mut value = Rational(BigRational::from_integer(numer)) * ten.pow(scale);
    if negative {
        value = -value;
    }
    Some(value)
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

struct RationalVisitor;

impl<'de> Visitor<'de> for RationalVisitor {
    type Value = Rational;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a rational number as a string \"p/q\" or a JSON number")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
        Ok(Rational::from_integer(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
        Ok(Rational(BigRational::from_integer(v.into())))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
        if !v.is_finite() {
            return Err(E::custom("non-finite number"));
        }
        // The shortest round-trip representation recovers the written decimal.
        format!("{v:e}").parse().map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(RationalVisitor)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// Least common multiple of the denominators, used to move a matrix onto a
/// common integer grid.
pub(crate) fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// `value * scale` where the product is known to be an integer.
pub(crate) fn scaled_integer(value: &Rational, scale: &BigInt) -> BigInt {
    let (q, r) = (value.numer() * scale).div_rem(value.denom());
    debug_assert!(r.is_zero());
    q
}
