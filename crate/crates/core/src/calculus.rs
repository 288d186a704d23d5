//! Exact decision procedures on transform functions.
//!
//! Each check either proves the property or returns a concrete rational
//! witness that reproduces under [`TransformFunction::eval_exact`].
//! "Increasing" is read non-strictly: `a ≥ b ⇒ f(a) ≥ f(b)`.

use serde::{Deserialize, Serialize};

use crate::axioms::Verdict;
use crate::function::{Piece, TransformFunction};
use crate::rational::Rational;

/// Simplest attained point `x` of `piece` with `f(x) > m`.
fn point_above(piece: &Piece, m: &Rational) -> Option<Rational> {
    if piece.is_degenerate() || piece.slope.is_zero() {
        return (piece.left_value() > *m)
            .then(|| piece.simplest_point_in(&piece.from, piece.to.as_ref(), true, true))
            .flatten();
    }
    let cross = (m - &piece.intercept) / &piece.slope;
    if piece.slope.is_positive() {
        piece.simplest_point_in(&cross, None, false, false)
    } else {
        piece.simplest_point_in(&piece.from, Some(&cross), true, false)
    }
}

/// Simplest attained point `x` of `piece` with `f(x) < m`.
fn point_below(piece: &Piece, m: &Rational) -> Option<Rational> {
    if piece.is_degenerate() || piece.slope.is_zero() {
        return (piece.left_value() < *m)
            .then(|| piece.simplest_point_in(&piece.from, piece.to.as_ref(), true, true))
            .flatten();
    }
    let cross = (m - &piece.intercept) / &piece.slope;
    if piece.slope.is_positive() {
        piece.simplest_point_in(&piece.from, Some(&cross), true, false)
    } else {
        piece.simplest_point_in(&cross, None, false, false)
    }
}

/// Two attained points `a < b` of a non-degenerate piece.
fn two_points(piece: &Piece) -> (Rational, Rational) {
    let a = piece
        .simplest_point_in(&piece.from, piece.to.as_ref(), true, true)
        .expect("non-degenerate piece has points");
    match piece.simplest_point_in(&a, piece.to.as_ref(), false, true) {
        Some(b) => (a, b),
        // `a` is the closed right end.
        None => {
            let below = piece
                .simplest_point_in(&piece.from, Some(&a), true, false)
                .expect("non-degenerate piece has a second point");
            (below, a)
        }
    }
}

/// Decides whether `f` is increasing. A witness `(a, b)` has `a < b` and
/// `f(a) > f(b)`.
pub fn is_increasing(f: &TransformFunction) -> Verdict<(Rational, Rational)> {
    let pieces = match f {
        TransformFunction::Power(_) => return Verdict::Holds,
        TransformFunction::PiecewiseAffine(p) => p,
    };
    for (i, piece) in pieces.iter().enumerate() {
        if !piece.is_degenerate() && piece.slope.is_negative() {
            return Verdict::Fails(two_points(piece));
        }
        let Some(next) = pieces.get(i + 1) else { break };
        // Both neighbours are monotone here, so only the junction matters.
        let left_sup = piece.right_value().expect("inner pieces are bounded");
        let right_inf = next.left_value();
        if left_sup > right_inf {
            let m = left_sup.midpoint(&right_inf);
            let a = point_above(piece, &m).expect("left supremum exceeds midpoint");
            let b = point_below(next, &m).expect("right infimum is below midpoint");
            return Verdict::Fails((a, b));
        }
    }
    Verdict::Holds
}

/// Decides amenability `f⁻¹({0}) = {0}`. The witness is `0` when
/// `f(0) ≠ 0`, otherwise a positive zero of `f`.
pub fn is_amenable(f: &TransformFunction) -> Verdict<Rational> {
    let pieces = match f {
        TransformFunction::Power(_) => return Verdict::Holds,
        TransformFunction::PiecewiseAffine(p) => p,
    };
    let zero = Rational::zero();
    if !pieces[0].at(&zero).is_zero() {
        return Verdict::Fails(zero);
    }
    for piece in pieces {
        if piece.slope.is_zero() {
            if piece.intercept.is_zero() {
                if let Some(t) = piece.simplest_point_in(&zero, piece.to.as_ref(), false, true) {
                    return Verdict::Fails(t);
                }
            }
            continue;
        }
        let root = -(&piece.intercept) / &piece.slope;
        if root.is_positive() && piece.contains(&root) {
            return Verdict::Fails(root);
        }
    }
    Verdict::Holds
}

/// Decides the doubling condition `f(a) ≤ 2 f(b)` for all `0 ≤ a ≤ b`.
///
/// Equivalent to `M(b) ≤ 2 f(b)` with `M(b) = sup_{s ≤ b} f(s)`. The scan
/// carries the running supremum across pieces; on each piece the binding
/// point is its infimum, and for decreasing pieces the piece's own left end
/// also feeds the supremum. A violation returns `(a, b)` with `a ≤ b` and
/// `f(a) > 2 f(b)`.
pub fn is_doubling(f: &TransformFunction) -> Verdict<(Rational, Rational)> {
    let pieces = match f {
        TransformFunction::Power(_) => return Verdict::Holds,
        TransformFunction::PiecewiseAffine(p) => p,
    };
    // (supremum so far, index of a piece reaching it)
    let mut running: Option<(Rational, usize)> = None;
    for (i, piece) in pieces.iter().enumerate() {
        let (inf, _) = piece.inf();
        let own = (!piece.is_degenerate() && piece.slope.is_negative()).then(|| piece.left_value());
        let threat = match (&running, &own) {
            (Some((s, j)), Some(l)) => Some(if s >= l { (s.clone(), *j) } else { (l.clone(), i) }),
            (Some((s, j)), None) => Some((s.clone(), *j)),
            (None, Some(l)) => Some((l.clone(), i)),
            (None, None) => None,
        };
        if let Some((top, source)) = threat {
            let bound = inf.double();
            if top > bound {
                let m = top.midpoint(&bound);
                let a = point_above(&pieces[source], &m).expect("supremum exceeds midpoint");
                let b = point_below(piece, &m.half()).expect("infimum is below half the midpoint");
                debug_assert!(a <= b);
                return Verdict::Fails((a, b));
            }
        }
        match piece.sup() {
            None => break,
            Some((s, _)) => {
                if running.as_ref().is_none_or(|(r, _)| s > *r) {
                    running = Some((s, i));
                }
            }
        }
    }
    Verdict::Holds
}

/// Verdicts of the three primitive checks and the preservation classes
/// derived from them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionClassification {
    pub increasing: Verdict<(Rational, Rational)>,
    pub amenable: Verdict<Rational>,
    pub doubling: Verdict<(Rational, Rational)>,
    pub zero_at_zero: bool,
    pub pseudoultrametric_preserving: bool,
    pub semimetric_preserving: bool,
    pub ultrametric_preserving: bool,
    pub ultrametric_metric_preserving: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionClass {
    Increasing,
    Amenable,
    Doubling,
    PseudoultrametricPreserving,
    SemimetricPreserving,
    UltrametricPreserving,
    UltrametricMetricPreserving,
}

impl FunctionClassification {
    pub fn has(&self, class: FunctionClass) -> bool {
        match class {
            FunctionClass::Increasing => self.increasing.holds(),
            FunctionClass::Amenable => self.amenable.holds(),
            FunctionClass::Doubling => self.doubling.holds(),
            FunctionClass::PseudoultrametricPreserving => self.pseudoultrametric_preserving,
            FunctionClass::SemimetricPreserving => self.semimetric_preserving,
            FunctionClass::UltrametricPreserving => self.ultrametric_preserving,
            FunctionClass::UltrametricMetricPreserving => self.ultrametric_metric_preserving,
        }
    }
}

pub fn classify_function(f: &TransformFunction) -> FunctionClassification {
    let increasing = is_increasing(f);
    let amenable = is_amenable(f);
    let doubling = is_doubling(f);
    let zero_at_zero = match f {
        TransformFunction::Power(_) => true,
        TransformFunction::PiecewiseAffine(p) => p[0].at(&Rational::zero()).is_zero(),
    };
    FunctionClassification {
        pseudoultrametric_preserving: increasing.holds() && zero_at_zero,
        semimetric_preserving: amenable.holds(),
        ultrametric_preserving: amenable.holds() && increasing.holds(),
        ultrametric_metric_preserving: amenable.holds() && doubling.holds(),
        increasing,
        amenable,
        doubling,
        zero_at_zero,
    }
}
