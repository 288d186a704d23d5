//! Transform functions `f: ℝ⁺ → ℝ⁺`.
//!
//! The class is closed: a function is either piecewise affine with finitely
//! many pieces, or a power `t^α`. Both kinds keep the increasing, amenable
//! and doubling checks exactly decidable.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::interval::{self, Enclosure};
use crate::rational::Rational;

/// One affine piece `t ↦ slope·t + intercept` on an interval of `[0, ∞)`.
///
/// `to = None` means the piece is unbounded on the right (and then
/// `to_closed` is false). A degenerate piece `{p}` has `from == to` with both
/// ends closed.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Piece {
    pub from: Rational,
    pub to: Option<Rational>,
    pub from_closed: bool,
    pub to_closed: bool,
    pub slope: Rational,
    pub intercept: Rational,
}

impl Piece {
    pub fn new(from: Rational, to: Option<Rational>, from_closed: bool, to_closed: bool, slope: Rational, intercept: Rational) -> Self {
        Piece {
            from,
            to,
            from_closed,
            to_closed,
            slope,
            intercept,
        }
    }

    /// Constant `value` on the given interval.
    pub fn constant(from: Rational, to: Option<Rational>, from_closed: bool, to_closed: bool, value: Rational) -> Self {
        Piece::new(from, to, from_closed, to_closed, Rational::zero(), value)
    }

    /// The single point `{p}` with value `value`.
    pub fn point(p: Rational, value: Rational) -> Self {
        Piece::new(p.clone(), Some(p), true, true, Rational::zero(), value)
    }

    pub fn is_degenerate(&self) -> bool {
        self.to.as_ref() == Some(&self.from)
    }

    pub fn at(&self, t: &Rational) -> Rational {
        &self.slope * t + &self.intercept
    }

    pub fn contains(&self, t: &Rational) -> bool {
        let above = if self.from_closed { *t >= self.from } else { *t > self.from };
        let below = match &self.to {
            None => true,
            Some(to) if self.to_closed => t <= to,
            Some(to) => t < to,
        };
        above && below
    }

    /// Value (or one-sided limit) at the left end.
    pub fn left_value(&self) -> Rational {
        self.at(&self.from)
    }

    /// Value (or one-sided limit) at the right end; `None` when unbounded.
    pub fn right_value(&self) -> Option<Rational> {
        self.to.as_ref().map(|to| self.at(to))
    }

    /// Supremum over the piece, with whether it is attained. `None` when the
    /// piece grows without bound.
    pub(crate) fn sup(&self) -> Option<(Rational, bool)> {
        if self.is_degenerate() {
            return Some((self.left_value(), true));
        }
        if self.slope.is_zero() {
            return Some((self.intercept.clone(), true));
        }
        if self.slope.is_positive() {
            self.right_value().map(|v| (v, self.to_closed))
        } else {
            Some((self.left_value(), self.from_closed))
        }
    }

    /// Infimum over the piece with whether it is attained.
    pub(crate) fn inf(&self) -> (Rational, bool) {
        if self.is_degenerate() || self.slope.is_zero() {
            return (self.at(&self.from), true);
        }
        if self.slope.is_positive() {
            (self.left_value(), self.from_closed)
        } else {
            // Negative slope pieces are bounded; validation guarantees it.
            let to = self.to.as_ref().expect("decreasing piece must be bounded");
            (self.at(to), self.to_closed)
        }
    }

    /// The simplest attained point of the piece inside the open window
    /// `(lo, hi)` (closed ends of the piece count when they fall inside
    /// `[lo, hi]` and the window allows them).
    pub(crate) fn simplest_point_in(&self, lo: &Rational, hi: Option<&Rational>, lo_ok: bool, hi_ok: bool) -> Option<Rational> {
        // Intersect [from, to] with the window.
        let (start, start_closed) = if *lo > self.from {
            (lo.clone(), lo_ok)
        } else if *lo == self.from {
            (lo.clone(), lo_ok && self.from_closed)
        } else {
            (self.from.clone(), self.from_closed)
        };
        let (end, end_closed) = match (&self.to, hi) {
            (None, None) => (None, false),
            (Some(to), None) => (Some(to.clone()), self.to_closed),
            (None, Some(h)) => (Some(h.clone()), hi_ok),
            (Some(to), Some(h)) => {
                if h < to {
                    (Some(h.clone()), hi_ok)
                } else if h == to {
                    (Some(h.clone()), hi_ok && self.to_closed)
                } else {
                    (Some(to.clone()), self.to_closed)
                }
            }
        };
        simplest_in(&start, start_closed, end.as_ref(), end_closed)
    }
}

/// Simplest rational in the interval with the given closure.
pub(crate) fn simplest_in(start: &Rational, start_closed: bool, end: Option<&Rational>, end_closed: bool) -> Option<Rational> {
    if let Some(e) = end {
        if e < start || (e == start && !(start_closed && end_closed)) {
            return None;
        }
        if e == start {
            return Some(start.clone());
        }
    }
    let mut best = Rational::simplest_between(start, end);
    if start_closed && start.simpler_than(&best) {
        best = start.clone();
    }
    if let (Some(e), true) = (end, end_closed) {
        if e.simpler_than(&best) {
            best = e.clone();
        }
    }
    Some(best)
}

impl fmt::Debug for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.from_closed { '[' } else { '(' };
        let close = if self.to_closed { ']' } else { ')' };
        let to = self.to.as_ref().map_or("∞".to_string(), |t| t.to_string());
        write!(f, "{open}{}, {to}{close}: {}·t + {}", self.from, self.slope, self.intercept)
    }
}

/// A function in the closed class.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum TransformFunction {
    PiecewiseAffine(Vec<Piece>),
    Power(Rational),
}

impl fmt::Debug for TransformFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformFunction::PiecewiseAffine(p) => f.debug_list().entries(p).finish(),
            TransformFunction::Power(a) => write!(f, "t^{a}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FunctionError {
    #[error("a piecewise function needs at least one piece")]
    NoPieces,
    #[error("piece {index}: the first piece must start at 0 with a closed end")]
    BadStart { index: usize },
    #[error("piece {index}: interval is empty")]
    EmptyPiece { index: usize },
    #[error("piece {index}: does not start where piece {} ends", index - 1)]
    Gap { index: usize },
    #[error("pieces {} and {index} overlap or leave a gap at their shared endpoint", index - 1)]
    Closure { index: usize },
    #[error("piece {index}: only the last piece may be unbounded")]
    EarlyUnbounded { index: usize },
    #[error("the last piece must be unbounded")]
    BoundedEnd,
    #[error("piece {index}: an unbounded end cannot be closed")]
    ClosedInfinity { index: usize },
    #[error("piece {index}: takes the negative value {value} at t = {at}")]
    Negative { index: usize, at: Rational, value: Rational },
    #[error("piece {index}: a decreasing unbounded piece becomes negative")]
    NegativeTail { index: usize },
    #[error("power exponent must be positive, got {0}")]
    Exponent(Rational),
    #[error("parameter `{name}` must be positive, got {value}")]
    Parameter { name: &'static str, value: Rational },
    #[error("cannot evaluate at negative t = {0}")]
    NegativeArgument(Rational),
    #[error("t^{0} has no exact value; use an enclosure")]
    Inexact(Rational),
}

/// Value of a function at a point: exact, or a certified enclosure for
/// non-integer powers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Value {
    Exact { value: Rational },
    Enclosure { enclosure: Enclosure },
}

impl Value {
    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Value::Exact { value } => Some(value),
            Value::Enclosure { .. } => None,
        }
    }

    pub fn enclosure(&self) -> Enclosure {
        match self {
            Value::Exact { value } => Enclosure::exact(value.clone()),
            Value::Enclosure { enclosure } => enclosure.clone(),
        }
    }
}

impl TransformFunction {
    /// Validates the piece partition and nonnegativity.
    pub fn piecewise(pieces: Vec<Piece>) -> Result<Self, FunctionError> {
        validate_pieces(&pieces)?;
        Ok(TransformFunction::PiecewiseAffine(pieces))
    }

    pub fn power(alpha: Rational) -> Result<Self, FunctionError> {
        if !alpha.is_positive() {
            return Err(FunctionError::Exponent(alpha));
        }
        Ok(TransformFunction::Power(alpha))
    }

    pub fn identity() -> Self {
        TransformFunction::PiecewiseAffine(vec![Piece::new(
            Rational::zero(),
            None,
            true,
            false,
            Rational::one(),
            Rational::zero(),
        )])
    }

    pub fn pieces(&self) -> Option<&[Piece]> {
        match self {
            TransformFunction::PiecewiseAffine(p) => Some(p),
            TransformFunction::Power(_) => None,
        }
    }

    /// True when every value is an exact rational.
    pub fn is_exact(&self) -> bool {
        match self {
            TransformFunction::PiecewiseAffine(_) => true,
            TransformFunction::Power(a) => a.is_integer(),
        }
    }

    pub(crate) fn piece_at(&self, t: &Rational) -> Option<(usize, &Piece)> {
        self.pieces()?.iter().enumerate().find(|(_, p)| p.contains(t))
    }

    /// `f(t)`, exact when the function is exact and an enclosure at the
    /// given working precision otherwise.
    pub fn evaluate_with(&self, t: &Rational, bits: u32) -> Result<Value, FunctionError> {
        if t.is_negative() {
            return Err(FunctionError::NegativeArgument(t.clone()));
        }
        match self {
            TransformFunction::PiecewiseAffine(_) => {
                let (_, piece) = self.piece_at(t).expect("pieces partition [0, ∞)");
                Ok(Value::Exact { value: piece.at(t) })
            }
            TransformFunction::Power(alpha) => {
                let e = interval::pow(t, alpha, bits);
                if e.is_exact() {
                    Ok(Value::Exact { value: e.lo })
                } else {
                    Ok(Value::Enclosure { enclosure: e })
                }
            }
        }
    }

    pub fn evaluate(&self, t: &Rational) -> Result<Value, FunctionError> {
        self.evaluate_with(t, interval::DEFAULT_PRECISION_BITS)
    }

    /// `f(t)` for exact functions; non-integer powers are rejected.
    pub fn eval_exact(&self, t: &Rational) -> Result<Rational, FunctionError> {
        if let TransformFunction::Power(alpha) = self {
            if !alpha.is_integer() {
                return Err(FunctionError::Inexact(alpha.clone()));
            }
        }
        match self.evaluate(t)? {
            Value::Exact { value } => Ok(value),
            Value::Enclosure { .. } => unreachable!("exact functions evaluate exactly"),
        }
    }

    /// `f_{a,b}`: 0 at 0, `a/2` on `(0, a]`, `b` on `(a, ∞)`.
    pub fn fab(a: Rational, b: Rational) -> Result<Self, FunctionError> {
        positive("a", &a)?;
        positive("b", &b)?;
        Ok(TransformFunction::PiecewiseAffine(vec![
            Piece::point(Rational::zero(), Rational::zero()),
            Piece::constant(Rational::zero(), Some(a.clone()), false, true, a.half()),
            Piece::constant(a, None, false, false, b),
        ]))
    }

    /// The cap `t ↦ min(t, cap)`.
    pub fn cap(cap: Rational) -> Result<Self, FunctionError> {
        positive("cap", &cap)?;
        Ok(TransformFunction::PiecewiseAffine(vec![
            Piece::new(Rational::zero(), Some(cap.clone()), true, true, Rational::one(), Rational::zero()),
            Piece::constant(cap.clone(), None, false, false, cap),
        ]))
    }

    /// The threshold map: 0 on `[0, r/2]`, identity on `(r/2, ∞)`.
    pub fn threshold(r: Rational) -> Result<Self, FunctionError> {
        positive("r", &r)?;
        let h = r.half();
        Ok(TransformFunction::PiecewiseAffine(vec![
            Piece::constant(Rational::zero(), Some(h.clone()), true, true, Rational::zero()),
            Piece::new(h, None, false, false, Rational::one(), Rational::zero()),
        ]))
    }
}

fn positive(name: &'static str, v: &Rational) -> Result<(), FunctionError> {
    if v.is_positive() {
        Ok(())
    } else {
        Err(FunctionError::Parameter { name, value: v.clone() })
    }
}

fn validate_pieces(pieces: &[Piece]) -> Result<(), FunctionError> {
    let first = pieces.first().ok_or(FunctionError::NoPieces)?;
    if !first.from.is_zero() || !first.from_closed {
        return Err(FunctionError::BadStart { index: 0 });
    }
    for (index, p) in pieces.iter().enumerate() {
        match &p.to {
            None => {
                if index + 1 != pieces.len() {
                    return Err(FunctionError::EarlyUnbounded { index });
                }
                if p.to_closed {
                    return Err(FunctionError::ClosedInfinity { index });
                }
            }
            Some(to) => {
                if *to < p.from || (*to == p.from && !(p.from_closed && p.to_closed)) {
                    return Err(FunctionError::EmptyPiece { index });
                }
            }
        }
        if index > 0 {
            let prev = &pieces[index - 1];
            let prev_to = prev.to.as_ref().expect("checked above");
            if *prev_to != p.from {
                return Err(FunctionError::Gap { index });
            }
            if prev.to_closed == p.from_closed {
                return Err(FunctionError::Closure { index });
            }
        }
        check_nonnegative(index, p)?;
    }
    if pieces.last().unwrap().to.is_some() {
        return Err(FunctionError::BoundedEnd);
    }
    Ok(())
}

/// An affine piece is nonnegative iff its endpoint values (or limits) are.
fn check_nonnegative(index: usize, p: &Piece) -> Result<(), FunctionError> {
    let left = p.left_value();
    if left.is_negative() {
        return Err(FunctionError::Negative {
            index,
            at: p.from.clone(),
            value: left,
        });
    }
    match &p.to {
        Some(to) => {
            let right = p.at(to);
            if right.is_negative() {
                return Err(FunctionError::Negative {
                    index,
                    at: to.clone(),
                    value: right,
                });
            }
        }
        None if p.slope.is_negative() => return Err(FunctionError::NegativeTail { index }),
        None => {}
    }
    Ok(())
}
