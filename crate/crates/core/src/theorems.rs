//! Transforms `f ∘ d` and constructive counterexamples.
//!
//! Every failed function property is turned into a small ultrametric (or
//! metric) space whose image under `f` breaks an axiom. The result is a
//! [`WitnessPackage`], which carries everything needed to re-check the claim
//! from scratch with [`WitnessPackage::replay`].

use serde::{Deserialize, Serialize};

use crate::axioms::{classify_space, perimeter_holds, triple_sides, worst_ultrametric_violation, Axiom, SpaceClass, Triple, Verdict};
use crate::calculus::{is_amenable, is_doubling, is_increasing};
use crate::function::{FunctionError, TransformFunction};
use crate::interval::Undecided;
use crate::rational::Rational;
use crate::space::{Dissimilarity, SpaceError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TheoremError {
    #[error("no witness exists: {0}")]
    NoWitness(&'static str),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("t^{0} cannot be applied exactly; use the snowflake probes")]
    InexactPower(Rational),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Undecided(#[from] Undecided),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

/// Entrywise `f ∘ d`. Non-integer powers have no exact image and are
/// rejected.
pub fn apply(f: &TransformFunction, space: &Dissimilarity) -> Result<Dissimilarity, TheoremError> {
    if let TransformFunction::Power(alpha) = f {
        if !alpha.is_integer() {
            return Err(TheoremError::InexactPower(alpha.clone()));
        }
    }
    Ok(space.map(|v| f.eval_exact(v))??)
}

/// A self-verifying counterexample: `space` belongs to `space_class`, while
/// `f ∘ space` violates `violated_axiom` at `indices`.
///
/// `indices` is a point for reflexivity, a pair for identity of
/// indiscernibles, and a triple `(x, y, z)` for the triangle axioms. `before`
/// and `after` hold the relevant distances (`d(x,y), d(x,z), d(z,y)` for
/// triples) before and after the transform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessPackage {
    pub function: TransformFunction,
    pub space: Dissimilarity,
    pub space_class: SpaceClass,
    pub transformed: Dissimilarity,
    pub violated_axiom: Axiom,
    pub indices: Vec<usize>,
    pub before: Vec<Rational>,
    pub after: Vec<Rational>,
}

impl WitnessPackage {
    fn build(
        function: TransformFunction,
        space: Dissimilarity,
        space_class: SpaceClass,
        violated_axiom: Axiom,
        indices: Vec<usize>,
    ) -> Result<Self, TheoremError> {
        let transformed = apply(&function, &space)?;
        let pick = |d: &Dissimilarity| -> Vec<Rational> {
            match indices.as_slice() {
                [i] => vec![d.get(*i, *i).clone()],
                [i, j] => vec![d.get(*i, *j).clone()],
                [x, y, z] => triple_sides(d, Triple::new(*x, *y, *z)).to_vec(),
                _ => unreachable!("indices are a point, pair or triple"),
            }
        };
        let package = WitnessPackage {
            before: pick(&space),
            after: pick(&transformed),
            function,
            space,
            space_class,
            transformed,
            violated_axiom,
            indices,
        };
        package.replay()?;
        Ok(package)
    }

    /// Re-derives the claim: the source space has its class, the transform
    /// is reproduced, the axiom fails at the stated indices, and the full
    /// classification of the image agrees.
    pub fn replay(&self) -> Result<(), TheoremError> {
        let fail = |msg: String| Err(TheoremError::Internal(msg));
        if !classify_space(&self.space).classes.has(self.space_class) {
            return fail(format!("source space is not {:?}", self.space_class));
        }
        if apply(&self.function, &self.space)? != self.transformed {
            return fail("transformed space does not match f ∘ d".into());
        }
        let d = &self.transformed;
        let local = match (self.violated_axiom, self.indices.as_slice()) {
            (Axiom::Reflexivity, [i]) => !d.get(*i, *i).is_zero(),
            (Axiom::IdentityOfIndiscernibles, [i, j]) => i != j && d.get(*i, *j).is_zero(),
            (Axiom::Triangle, [x, y, z]) => {
                let [s, l, r] = triple_sides(d, Triple::new(*x, *y, *z));
                s > l + r && !perimeter_holds([d.get(*x, *y), d.get(*y, *z), d.get(*z, *x)])
            }
            (Axiom::StrongTriangle, [x, y, z]) => {
                let [s, l, r] = triple_sides(d, Triple::new(*x, *y, *z));
                s > l.max(r)
            }
            _ => return fail("indices do not match the violated axiom".into()),
        };
        if !local {
            return fail(format!("{:?} holds at {:?}", self.violated_axiom, self.indices));
        }
        if classify_space(d).verdict_holds(self.violated_axiom) {
            return fail("classification of f ∘ d does not report the violation".into());
        }
        Ok(())
    }
}

fn ultrametric_pair(t: Rational) -> Result<Dissimilarity, TheoremError> {
    Ok(Dissimilarity::pair(t)?)
}

/// Counterexample for a non-increasing `f` from a pair with `f(a) > f(b)`,
/// `a < b` (either order accepted): the ultrametric with
/// `d(x₁,x₂) = d(x₁,x₃) = b` and `d(x₂,x₃) = a`.
pub fn strong_triangle_counterexample(f: &TransformFunction, a: Rational, b: Rational) -> Result<WitnessPackage, TheoremError> {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    if !a.is_positive() || a == b {
        return Err(TheoremError::Precondition(format!("need 0 < a < b, got a = {a}, b = {b}")));
    }
    if f.eval_exact(&a)? <= f.eval_exact(&b)? {
        return Err(TheoremError::Precondition(format!("f({a}) <= f({b})")));
    }
    let space = Dissimilarity::triangle(b.clone(), b, a)?;
    WitnessPackage::build(f.clone(), space, SpaceClass::Ultrametric, Axiom::StrongTriangle, vec![1, 2, 0])
}

/// A package showing `f` does not preserve pseudoultrametrics (it already
/// fails on ultrametrics). Fails with [`TheoremError::NoWitness`] exactly
/// when `f` is increasing with `f(0) = 0`.
pub fn witness_not_pseudoultrametric_preserving(f: &TransformFunction) -> Result<WitnessPackage, TheoremError> {
    let zero = Rational::zero();
    if !f.eval_exact(&zero)?.is_zero() {
        // f(0) > 0 already breaks reflexivity on any space.
        return WitnessPackage::build(
            f.clone(),
            ultrametric_pair(Rational::one())?,
            SpaceClass::Ultrametric,
            Axiom::Reflexivity,
            vec![0],
        );
    }
    match is_increasing(f) {
        Verdict::Holds => Err(TheoremError::NoWitness("f is increasing with f(0) = 0")),
        Verdict::Fails((a, b)) => strong_triangle_counterexample(f, a, b),
    }
}

/// A package showing `f` does not preserve semimetrics: a two-point
/// ultrametric whose image has a nonzero diagonal or a zero off-diagonal
/// entry.
pub fn witness_not_semimetric_preserving(f: &TransformFunction) -> Result<WitnessPackage, TheoremError> {
    match is_amenable(f) {
        Verdict::Holds => Err(TheoremError::NoWitness("f is amenable")),
        Verdict::Fails(t) if t.is_zero() => WitnessPackage::build(
            f.clone(),
            ultrametric_pair(Rational::one())?,
            SpaceClass::Ultrametric,
            Axiom::Reflexivity,
            vec![0],
        ),
        Verdict::Fails(t) => WitnessPackage::build(
            f.clone(),
            ultrametric_pair(t)?,
            SpaceClass::Ultrametric,
            Axiom::IdentityOfIndiscernibles,
            vec![0, 1],
        ),
    }
}

/// Counterexample for the doubling condition from `f(a) > 2 f(b)`, `a ≤ b`
/// (either order accepted): the ultrametric with `d(x₁,x₂) = a` and
/// `d(x₂,x₃) = d(x₃,x₁) = b`, whose image fails the triangle inequality.
pub fn triangle_counterexample(f: &TransformFunction, a: Rational, b: Rational) -> Result<WitnessPackage, TheoremError> {
    let fa = f.eval_exact(&a)?;
    let fb = f.eval_exact(&b)?;
    let (a, b) = if fa > fb.double() { (a, b) } else { (b, a) };
    if a > b || !a.is_positive() || f.eval_exact(&a)? <= f.eval_exact(&b)?.double() {
        return Err(TheoremError::Precondition("need 0 < a <= b with f(a) > 2 f(b)".into()));
    }
    let space = Dissimilarity::triangle(a, b.clone(), b)?;
    WitnessPackage::build(f.clone(), space, SpaceClass::Ultrametric, Axiom::Triangle, vec![0, 1, 2])
}

/// A package showing an amenable `f` does not send ultrametrics to metrics.
pub fn witness_not_ultrametric_metric_preserving(f: &TransformFunction) -> Result<WitnessPackage, TheoremError> {
    if !is_amenable(f).holds() {
        return Err(TheoremError::Precondition(
            "f is not amenable; its image already fails to be a semimetric".into(),
        ));
    }
    match is_doubling(f) {
        Verdict::Holds => Err(TheoremError::NoWitness("f satisfies f(a) <= 2 f(b) for all a <= b")),
        Verdict::Fails((a, b)) => triangle_counterexample(f, a, b),
    }
}

fn require_metric(space: &Dissimilarity) -> Result<(), TheoremError> {
    if classify_space(space).classes.metric {
        Ok(())
    } else {
        Err(TheoremError::Precondition("input is not a metric".into()))
    }
}

/// For a metric that is not an ultrametric, the increasing amenable step
/// function `f_{a,b}` built from its worst strong-triangle violation, and the
/// triangle failure of `f_{a,b} ∘ d` at that triple. `None` for ultrametrics.
pub fn dual_witness(space: &Dissimilarity) -> Result<Option<WitnessPackage>, TheoremError> {
    require_metric(space)?;
    let Some(v) = worst_ultrametric_violation(space) else {
        return Ok(None);
    };
    let f = TransformFunction::fab(v.a, v.b)?;
    let t = v.triple;
    WitnessPackage::build(f, space.clone(), SpaceClass::Metric, Axiom::Triangle, vec![t.x, t.y, t.z]).map(Some)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FabFailure {
    pub a: Rational,
    pub b: Rational,
    pub package: WitnessPackage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FabProbe {
    pub pairs_checked: usize,
    pub verdict: Verdict<FabFailure>,
}

impl FabProbe {
    pub fn ultrametric(&self) -> bool {
        self.verdict.holds()
    }
}

/// Tests `f_{a,b} ∘ d` for metricity over every pair `a < b` of positive
/// distances occurring in `d`. Since `f_{a,b} ∘ d` only depends on how each
/// distance compares with `a`, these pairs decide ultrametricity; the result
/// is cross-checked against the direct classification.
pub fn probe_fab(space: &Dissimilarity) -> Result<FabProbe, TheoremError> {
    require_metric(space)?;
    let values = space.positive_values();
    let mut pairs_checked = 0;
    let mut failure = None;
    'outer: for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            pairs_checked += 1;
            let f = TransformFunction::fab(a.clone(), b.clone())?;
            let image = apply(&f, space)?;
            if let Verdict::Fails(t) = classify_space(&image).triangle {
                let package = WitnessPackage::build(f, space.clone(), SpaceClass::Metric, Axiom::Triangle, vec![t.x, t.y, t.z])?;
                failure = Some(FabFailure {
                    a: a.clone(),
                    b: b.clone(),
                    package,
                });
                break 'outer;
            }
        }
    }
    let probe = FabProbe {
        pairs_checked,
        verdict: failure.into(),
    };
    if probe.ultrametric() != classify_space(space).classes.ultrametric {
        return Err(TheoremError::Internal("f_{a,b} probe disagrees with the direct check".into()));
    }
    Ok(probe)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::Piece;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn int(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn tri(a: Rational, b: Rational, c: Rational) -> Dissimilarity {
        Dissimilarity::triangle(a, b, c).unwrap()
    }

    fn two_step(first: Rational, second: Rational) -> TransformFunction {
        TransformFunction::piecewise(vec![
            Piece::point(int(0), int(0)),
            Piece::constant(int(0), Some(int(1)), false, true, first),
            Piece::constant(int(1), None, false, false, second),
        ])
        .unwrap()
    }

    fn sides(d: &Dissimilarity) -> [Rational; 3] {
        [d.get(0, 1).clone(), d.get(0, 2).clone(), d.get(1, 2).clone()]
    }

    #[test]
    fn apply_examples() {
        let cap = TransformFunction::cap(q(3, 2)).unwrap();
        let image = apply(&cap, &tri(int(1), int(2), int(2))).unwrap();
        assert_eq!(sides(&image), [int(1), q(3, 2), q(3, 2)]);
        assert!(classify_space(&image).classes.ultrametric);

        let d = tri(int(3), int(4), int(5));
        assert_eq!(apply(&TransformFunction::identity(), &d).unwrap(), d);

        let f = TransformFunction::fab(int(4), int(5)).unwrap();
        assert_eq!(sides(&apply(&f, &d).unwrap()), [int(2), int(2), int(5)]);

        let root = TransformFunction::power(q(1, 2)).unwrap();
        assert!(matches!(apply(&root, &d), Err(TheoremError::InexactPower(_))));
    }

    #[test]
    fn pseudoultrametric_witnesses() {
        let f = two_step(int(1), q(1, 2));
        let w = witness_not_pseudoultrametric_preserving(&f).unwrap();
        assert_eq!(sides(&w.space), [int(2), int(2), int(1)]);
        assert_eq!(sides(&w.transformed), [q(1, 2), q(1, 2), int(1)]);
        assert_eq!(w.violated_axiom, Axiom::StrongTriangle);
        w.replay().unwrap();

        let fab = TransformFunction::fab(int(1), int(3)).unwrap();
        assert!(matches!(
            witness_not_pseudoultrametric_preserving(&fab),
            Err(TheoremError::NoWitness(_))
        ));

        // 3 - t on (0, 2], then 1.
        let dec = TransformFunction::piecewise(vec![
            Piece::point(int(0), int(0)),
            Piece::new(int(0), Some(int(2)), false, true, int(-1), int(3)),
            Piece::constant(int(2), None, false, false, int(1)),
        ])
        .unwrap();
        let w = witness_not_pseudoultrametric_preserving(&dec).unwrap();
        assert_eq!(sides(&w.space), [int(2), int(2), int(1)]);
        assert_eq!(sides(&w.transformed), [int(1), int(1), int(2)]);
    }

    #[test]
    fn pseudoultrametric_witness_orientation() {
        let f = two_step(int(1), q(1, 2));
        let w1 = strong_triangle_counterexample(&f, int(1), int(2)).unwrap();
        let w2 = strong_triangle_counterexample(&f, int(2), int(1)).unwrap();
        assert_eq!(w1, w2);
    }

    #[test]
    fn semimetric_witnesses() {
        let shifted = TransformFunction::piecewise(vec![Piece::new(int(0), None, true, false, int(1), int(1))]).unwrap();
        let w = witness_not_semimetric_preserving(&shifted).unwrap();
        assert_eq!(w.violated_axiom, Axiom::Reflexivity);
        assert_eq!(w.after, vec![int(1)]);

        let th = TransformFunction::threshold(int(1)).unwrap();
        let w = witness_not_semimetric_preserving(&th).unwrap();
        assert_eq!(w.violated_axiom, Axiom::IdentityOfIndiscernibles);
        assert_eq!(w.before, vec![q(1, 2)]);
        assert_eq!(w.after, vec![int(0)]);

        assert!(matches!(
            witness_not_semimetric_preserving(&TransformFunction::identity()),
            Err(TheoremError::NoWitness(_))
        ));
    }

    #[test]
    fn doubling_witnesses() {
        let f = two_step(int(3), int(1));
        let w = witness_not_ultrametric_metric_preserving(&f).unwrap();
        assert_eq!(sides(&w.space), [int(1), int(2), int(2)]);
        assert_eq!(sides(&w.transformed), [int(3), int(1), int(1)]);
        assert!(!crate::axioms::check_triangle_perimeter(&w.transformed, 0, 1, 2).unwrap());

        let fab = TransformFunction::fab(int(4), int(5)).unwrap();
        assert!(matches!(
            witness_not_ultrametric_metric_preserving(&fab),
            Err(TheoremError::NoWitness(_))
        ));
        assert!(matches!(
            witness_not_ultrametric_metric_preserving(&TransformFunction::cap(int(2)).unwrap()),
            Err(TheoremError::NoWitness(_))
        ));
        let th = TransformFunction::threshold(int(1)).unwrap();
        assert!(matches!(
            witness_not_ultrametric_metric_preserving(&th),
            Err(TheoremError::Precondition(_))
        ));
    }

    #[test]
    fn dual_witness_examples() {
        let w = dual_witness(&tri(int(3), int(4), int(5))).unwrap().unwrap();
        assert_eq!(w.function, TransformFunction::fab(int(4), int(5)).unwrap());
        assert_eq!(sides(&w.transformed), [int(2), int(2), int(5)]);
        assert_eq!(w.after, vec![int(5), int(2), int(2)]);

        assert_eq!(dual_witness(&tri(int(1), int(2), int(2))).unwrap(), None);

        let w = dual_witness(&tri(int(1), q(5, 4), q(3, 2))).unwrap().unwrap();
        assert_eq!(w.function, TransformFunction::fab(q(5, 4), q(3, 2)).unwrap());

        assert!(matches!(
            dual_witness(&tri(int(1), int(1), int(3))),
            Err(TheoremError::Precondition(_))
        ));
    }

    #[test]
    fn probe_fab_examples() {
        let p = probe_fab(&tri(int(3), int(4), int(5))).unwrap();
        let Verdict::Fails(fail) = &p.verdict else { panic!() };
        assert_eq!((fail.a.clone(), fail.b.clone()), (int(4), int(5)));
        assert_eq!(p.pairs_checked, 3);

        let p = probe_fab(&tri(int(1), int(2), int(2))).unwrap();
        assert!(p.ultrametric());
        assert_eq!(p.pairs_checked, 1);

        assert!(probe_fab(&Dissimilarity::pair(int(7)).unwrap()).unwrap().ultrametric());
    }

    #[test]
    fn tampered_package_fails_replay() {
        let mut w = dual_witness(&tri(int(3), int(4), int(5))).unwrap().unwrap();
        w.indices = vec![0, 1, 2];
        assert!(w.replay().is_err());
    }
}
