//! Certified enclosures for non-integer powers.
//!
//! `t^α` has no exact rational value for most rational `α`, so comparisons
//! involving such powers are decided on enclosures `[lo, hi]` whose endpoints
//! are dyadic rationals. Every operation rounds its lower endpoint down and
//! its upper endpoint up, and every truncated series carries an explicit
//! remainder bound, so the true value is always inside the enclosure.
//!
//! Precision is counted in bits of the logarithm, i.e. relative precision of
//! the power. Comparisons refine by doubling the working precision up to a
//! cap and report [`Undecided`] when the cap cannot separate the operands.

use std::cmp::Ordering;
use std::fmt;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::rational::Rational;

/// Default precision cap: enclosure width `2^-60` in the log domain.
pub const DEFAULT_PRECISION_BITS: u32 = 60;

/// Working precision used for the first refinement round.
const INITIAL_BITS: u32 = 24;

/// Largest exponent denominator for which an exact rational root is tried.
const EXACT_ROOT_LIMIT: u32 = 64;

/// Upper bound on the precision cap accepted from callers.
pub const MAX_PRECISION_BITS: u32 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Precision {
    pub bits: u32,
}

impl Precision {
    pub fn new(bits: u32) -> Self {
        Precision {
            bits: bits.clamp(8, MAX_PRECISION_BITS),
        }
    }

    /// The refinement schedule `24, 48, 96, …` capped at `self.bits`.
    pub fn schedule(self) -> impl Iterator<Item = u32> {
        let cap = self.bits;
        let mut next = Some(INITIAL_BITS.min(cap));
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur >= cap { None } else { Some((cur * 2).min(cap)) };
            Some(cur)
        })
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            bits: DEFAULT_PRECISION_BITS,
        }
    }
}

/// The comparison could not be resolved at the precision cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("undecided at precision 2^-{bits}")]
pub struct Undecided {
    pub bits: u32,
}

/// A closed interval `[lo, hi]` known to contain some real number.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lo: Rational,
    pub hi: Rational,
}

impl fmt::Debug for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.6e}, {:.6e}]", self.lo.to_f64(), self.hi.to_f64())
    }
}

impl Enclosure {
    pub fn exact(v: Rational) -> Self {
        Enclosure { lo: v.clone(), hi: v }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: &Rational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// Sign of the enclosed value, if the enclosure pins it down.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    fn round(self, bits: u32) -> Self {
        Enclosure {
            lo: self.lo.floor_dyadic(bits),
            hi: self.hi.ceil_dyadic(bits),
        }
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        Enclosure {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn sub(&self, other: &Enclosure) -> Enclosure {
        Enclosure {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
        }
    }

    pub fn scale(&self, k: &Rational) -> Enclosure {
        let a = &self.lo * k;
        let b = &self.hi * k;
        if a <= b {
            Enclosure { lo: a, hi: b }
        } else {
            Enclosure { lo: b, hi: a }
        }
    }

    /// Product of two enclosures of nonnegative numbers.
    fn mul_nonneg(&self, other: &Enclosure) -> Enclosure {
        debug_assert!(!self.lo.is_negative() && !other.lo.is_negative());
        Enclosure {
            lo: &self.lo * &other.lo,
            hi: &self.hi * &other.hi,
        }
    }
}

/// Enclosure of `atanh(z)` for a point `0 <= z <= 1/3`, at absolute
/// precision about `2^-bits`.
fn atanh_small(z: &Rational, bits: u32) -> Enclosure {
    debug_assert!(!z.is_negative() && *z <= Rational::new(1, 3));
    if z.is_zero() {
        return Enclosure::exact(Rational::zero());
    }
    let guard = bits + 8;
    let z2 = z * z;
    let mut power = Enclosure::exact(z.clone());
    let mut sum = Enclosure::exact(Rational::zero());
    let tolerance = Rational::one() / Rational::from_integer(2).pow(guard as i32);
    let mut k: i64 = 0;
    loop {
        let denom = Rational::from_integer(2 * k + 1);
        let term = Enclosure {
            lo: &power.lo / &denom,
            hi: &power.hi / &denom,
        };
        sum = sum.add(&term).round(guard);
        power = power.mul_nonneg(&Enclosure::exact(z2.clone())).round(guard);
        k += 1;
        // Remainder after the terms so far: sum_{j>=k} z^(2j+1)/(2j+1)
        // <= z^(2k+1) / ((2k+1) (1 - z^2)).
        let tail = &power.hi / (Rational::from_integer(2 * k + 1) * (Rational::one() - &z2));
        if tail < tolerance {
            return Enclosure {
                lo: sum.lo,
                hi: sum.hi + tail,
            }
            .round(guard);
        }
    }
}

/// Enclosure of `ln 2`.
fn ln2(bits: u32) -> Enclosure {
    atanh_small(&Rational::new(1, 3), bits + 2).scale(&Rational::from_integer(2))
}

/// Enclosure of `ln x` for rational `x > 0`.
pub fn ln(x: &Rational, bits: u32) -> Enclosure {
    assert!(x.is_positive(), "ln of a nonpositive value");
    if *x == Rational::one() {
        return Enclosure::exact(Rational::zero());
    }
    let e = x.binary_exponent();
    let m = x / Rational::from_integer(2).pow(e as i32);
    // m in [1, 2): ln m = 2 atanh((m - 1) / (m + 1)) with argument below 1/3.
    let z = (&m - Rational::one()) / (&m + Rational::one());
    let extra = 64 - (e.unsigned_abs().max(1)).leading_zeros();
    let work = bits + extra + 4;
    let ln_m = atanh_small(&z, work).scale(&Rational::from_integer(2));
    let ln_2e = ln2(work).scale(&Rational::from_integer(e));
    ln_m.add(&ln_2e).round(work)
}

/// Enclosure of `exp(y)` for a point `y`.
fn exp_point(y: &Rational, bits: u32) -> Enclosure {
    if y.is_zero() {
        return Enclosure::exact(Rational::one());
    }
    // Halve the argument until |u| <= 1/2, then square back up.
    let half = Rational::new(1, 2);
    let mut squarings: u32 = 0;
    let mut u = y.clone();
    while u.abs() > half {
        u = u.half();
        squarings += 1;
    }
    let guard = bits + 2 * squarings + 16;
    let tolerance = Rational::one() / Rational::from_integer(2).pow(guard as i32);
    let mut term = Rational::one();
    let mut sum = Rational::one();
    let mut j: i64 = 1;
    let result = loop {
        term = (&term * &u / Rational::from_integer(j)).floor_dyadic(guard + 8);
        sum = &sum + &term;
        // Rounding each term down accumulates at most j·2^-(guard+8) in
        // magnitude; the series tail for |u| <= 1/2 is at most 2|u|^(j+1)/(j+1)!.
        // Each computed term is within 2·2^-(guard+8) of the true one.
        let ulp = Rational::one() / Rational::from_integer(2).pow((guard + 8) as i32);
        let next = (&(term.abs() + ulp.double().double()) * &u.abs() / Rational::from_integer(j + 1)).ceil_dyadic(guard + 8);
        let tail = next.double() + Rational::from_integer(2 * j + 4) * ulp;
        if tail < tolerance {
            break Enclosure {
                lo: &sum - &tail,
                hi: &sum + &tail,
            }
            .round(guard);
        }
        j += 1;
    };
    let mut acc = result;
    for _ in 0..squarings {
        acc = acc.mul_nonneg(&acc).round(guard);
    }
    acc
}

/// Enclosure of `exp(y)` for `y` in an enclosure; `exp` is increasing.
pub fn exp(y: &Enclosure, bits: u32) -> Enclosure {
    Enclosure {
        lo: exp_point(&y.lo, bits).lo,
        hi: exp_point(&y.hi, bits).hi,
    }
}

/// Enclosure of `x^alpha` for `x >= 0`, `alpha > 0`. Exact when `alpha` is an
/// integer or the root is rational (for exponent denominators up to 64).
pub fn pow(x: &Rational, alpha: &Rational, bits: u32) -> Enclosure {
    assert!(!x.is_negative() && alpha.is_positive());
    if let Some(k) = alpha.to_i32() {
        return Enclosure::exact(x.pow(k));
    }
    if x.is_zero() {
        return Enclosure::exact(Rational::zero());
    }
    if *x == Rational::one() {
        return Enclosure::exact(Rational::one());
    }
    if let Some(q) = alpha.denom().to_u32().filter(|&q| q <= EXACT_ROOT_LIMIT) {
        if let (Some(r), Some(p)) = (x.exact_root(q), Rational::from_bigints(alpha.numer().clone(), 1.into()).to_i32()) {
            return Enclosure::exact(r.pow(p));
        }
    }
    let alpha_bits = alpha.ceil().bits() as u32;
    let l = ln(x, bits + 8 + alpha_bits).scale(alpha);
    exp(&l, bits)
}

/// Sign of a quantity computed as an enclosure at a given working precision,
/// refined along the precision schedule.
pub fn certified_sign(precision: Precision, mut enclose: impl FnMut(u32) -> Enclosure) -> Result<Ordering, Undecided> {
    for bits in precision.schedule() {
        let e = enclose(bits);
        if let Some(s) = e.sign() {
            return Ok(s);
        }
    }
    Err(Undecided { bits: precision.bits })
}

/// Certified comparison of `lhs(bits)` against `rhs(bits)`.
pub fn certified_cmp(
    precision: Precision,
    mut lhs: impl FnMut(u32) -> Enclosure,
    mut rhs: impl FnMut(u32) -> Enclosure,
) -> Result<Ordering, Undecided> {
    certified_sign(precision, |bits| lhs(bits).sub(&rhs(bits)))
}
