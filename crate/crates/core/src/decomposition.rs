//! Pseudoultrametrics as thresholded ultrametrics.
//!
//! A finite pseudoultrametric `ρ` factors as `ρ = f* ∘ d` with `d` an
//! ultrametric and `f*` vanishing on `[0, r*/2]`, where `r*` is the smallest
//! positive value of `ρ`. Conversely, an increasing `f` with `f(0) = 0` can only
//! destroy ultrametricity by vanishing on some `[0, r₀)`.

use serde::{Deserialize, Serialize};

use crate::axioms::classify_space;
use crate::calculus::is_increasing;
use crate::function::TransformFunction;
use crate::rational::Rational;
use crate::space::Dissimilarity;
use crate::theorems::{apply, TheoremError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub r_star: Rational,
    pub ultrametric: Dissimilarity,
    pub threshold_fn: TransformFunction,
    pub composition_verified: bool,
}

/// Factors a pseudoultrametric that is not an ultrametric. When `ρ` has no
/// positive values at all, `r*` is taken to be 1.
pub fn decompose(rho: &Dissimilarity) -> Result<DecompositionResult, TheoremError> {
    let classes = classify_space(rho).classes;
    if !classes.pseudoultrametric {
        return Err(TheoremError::Precondition("input is not a pseudoultrametric".into()));
    }
    if classes.ultrametric {
        return Err(TheoremError::Precondition(
            "input is already an ultrametric; it factors trivially through the identity".into(),
        ));
    }
    let r_star = rho.positive_values().into_iter().next().unwrap_or_else(Rational::one);
    let half = r_star.half();
    let ultrametric = Dissimilarity::from_fn(rho.n(), |i, j| {
        let v = rho.get(i, j);
        if i == j {
            Rational::zero()
        } else if v.is_zero() {
            half.clone()
        } else {
            v.clone()
        }
    })?;
    let ultrametric = match rho.labels() {
        Some(labels) => ultrametric.with_labels(labels.to_vec())?,
        None => ultrametric,
    };
    let threshold_fn = TransformFunction::threshold(r_star.clone())?;

    if !classify_space(&ultrametric).classes.ultrametric {
        return Err(TheoremError::Internal("factor d is not an ultrametric".into()));
    }
    if apply(&threshold_fn, &ultrametric)?.entries() != rho.entries() {
        return Err(TheoremError::Internal("f* ∘ d differs from the input".into()));
    }
    Ok(DecompositionResult {
        r_star,
        ultrametric,
        threshold_fn,
        composition_verified: true,
    })
}

/// For an ultrametric `D` and an increasing `f` with `f(0) = 0` whose image
/// `f ∘ D` is not an ultrametric, the smallest distance `r₀` with
/// `f(r₀) = 0`; `f` is checked to vanish on all of `[0, r₀]`. `None` when
/// `f ∘ D` is an ultrametric.
pub fn zero_gap_radius(space: &Dissimilarity, f: &TransformFunction) -> Result<Option<Rational>, TheoremError> {
    if !classify_space(space).classes.ultrametric {
        return Err(TheoremError::Precondition("input is not an ultrametric".into()));
    }
    let Some(pieces) = f.pieces() else {
        // Positive powers are increasing and amenable, so the image stays
        // ultrametric.
        return Ok(None);
    };
    if !is_increasing(f).holds() || !f.eval_exact(&Rational::zero())?.is_zero() {
        return Err(TheoremError::Precondition("f must be increasing with f(0) = 0".into()));
    }
    if classify_space(&apply(f, space)?).classes.ultrametric {
        return Ok(None);
    }
    let mut r0 = None;
    for v in space.positive_values() {
        if f.eval_exact(&v)?.is_zero() {
            r0 = Some(v);
            break;
        }
    }
    let r0 = r0.ok_or_else(|| TheoremError::Internal("image lost ultrametricity without a zero".into()))?;
    // Affine pieces attain their extremes at the endpoints of [from, min(to, r₀)].
    for p in pieces.iter().filter(|p| p.from < r0 || (p.from == r0 && p.from_closed)) {
        let end = match &p.to {
            Some(to) if *to < r0 => to.clone(),
            _ => r0.clone(),
        };
        let at = |t: &Rational| &p.slope * t + &p.intercept;
        if !at(&p.from).is_zero() || !at(&end).is_zero() {
            return Err(TheoremError::Internal(format!("f does not vanish on [0, {r0}]")));
        }
    }
    Ok(Some(r0))
}
