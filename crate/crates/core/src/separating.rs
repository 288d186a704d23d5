//! k-separating families of increasing amenable functions.
//!
//! A family `F` is k-separating when every pair `t₁ < t₂` has a member with
//! `k f(t₁) < f(t₂)`. If `F` is 2-separating, a metric `d` is an ultrametric
//! exactly when `f ∘ d` is a metric for every `f ∈ F`; if some pair is not
//! separated, [`counterexample_space`] shows the equivalence breaks.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::axioms::{classify_space, Triple, Verdict};
use crate::calculus::{is_amenable, is_increasing};
use crate::function::{TransformFunction, Value};
use crate::interval::{certified_sign, ln, Enclosure, Precision, Undecided};
use crate::rational::Rational;
use crate::snowflake::{probe_snowflake, SnowflakeVerdict};
use crate::space::Dissimilarity;
use crate::theorems::{apply, TheoremError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FamilyError {
    #[error("a family needs at least one member")]
    Empty,
    #[error("member {member} is not increasing: f({a}) > f({b})")]
    NotIncreasing { member: usize, a: Rational, b: Rational },
    #[error("member {member} is not amenable: f({t}) violates f(t) = 0 ⇔ t = 0")]
    NotAmenable { member: usize, t: Rational },
    #[error("need 0 <= t1 < t2, got t1 = {t1}, t2 = {t2}")]
    Pair { t1: Rational, t2: Rational },
    #[error("k must exceed 1, got {0}")]
    Factor(Rational),
    #[error("member {member} separates ({t1}, {t2}) at k = 2; no counterexample exists")]
    Separated { member: usize, t1: Rational, t2: Rational },
    #[error("member {member}: {source}")]
    Undecided { member: usize, source: Undecided },
    #[error("separation by t^{alpha}: {source}")]
    Exponent { alpha: i64, source: Undecided },
    #[error(transparent)]
    Theorem(#[from] TheoremError),
}

/// A nonempty list of increasing amenable functions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct FunctionFamily {
    members: Vec<TransformFunction>,
}

impl FunctionFamily {
    pub fn new(members: Vec<TransformFunction>) -> Result<Self, FamilyError> {
        if members.is_empty() {
            return Err(FamilyError::Empty);
        }
        for (member, f) in members.iter().enumerate() {
            if let Verdict::Fails((a, b)) = is_increasing(f) {
                return Err(FamilyError::NotIncreasing { member, a, b });
            }
            if let Verdict::Fails(t) = is_amenable(f) {
                return Err(FamilyError::NotAmenable { member, t });
            }
        }
        Ok(FunctionFamily { members })
    }

    /// `t ↦ t^α` for each exponent.
    pub fn powers(exponents: impl IntoIterator<Item = Rational>) -> Result<Self, FamilyError> {
        let members = exponents
            .into_iter()
            .map(|a| TransformFunction::power(a).map_err(TheoremError::from))
            .collect::<Result<Vec<_>, _>>()?;
        FunctionFamily::new(members)
    }

    pub fn members(&self) -> &[TransformFunction] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn check_pair(t1: &Rational, t2: &Rational) -> Result<(), FamilyError> {
    if t1.is_negative() || t1 >= t2 {
        return Err(FamilyError::Pair {
            t1: t1.clone(),
            t2: t2.clone(),
        });
    }
    Ok(())
}

fn check_factor(k: &Rational) -> Result<(), FamilyError> {
    if *k <= Rational::one() {
        return Err(FamilyError::Factor(k.clone()));
    }
    Ok(())
}

fn value(f: &TransformFunction, t: &Rational, bits: u32) -> Enclosure {
    f.evaluate_with(t, bits).expect("arguments are nonnegative").enclosure()
}

/// Sign of `f(t₂) - k f(t₁)`.
fn separation_sign(f: &TransformFunction, t1: &Rational, t2: &Rational, k: &Rational, precision: Precision) -> Result<Ordering, Undecided> {
    certified_sign(precision, |bits| value(f, t2, bits).sub(&value(f, t1, bits).scale(k)))
}

/// `f(t₂) - k f(t₁)`, exact when possible.
fn margin(f: &TransformFunction, t1: &Rational, t2: &Rational, k: &Rational, precision: Precision) -> Value {
    let e = value(f, t2, precision.bits).sub(&value(f, t1, precision.bits).scale(k));
    if e.is_exact() {
        Value::Exact { value: e.lo }
    } else {
        Value::Enclosure { enclosure: e }
    }
}

/// The first member that provably satisfies `k f(t₁) < f(t₂)`. If none does
/// and some comparison could not be decided, the first undecided member is
/// reported as an error.
pub fn find_separator(
    family: &FunctionFamily,
    t1: &Rational,
    t2: &Rational,
    k: &Rational,
    precision: Precision,
) -> Result<Option<usize>, FamilyError> {
    check_pair(t1, t2)?;
    check_factor(k)?;
    let mut undecided = None;
    for (member, f) in family.members.iter().enumerate() {
        match separation_sign(f, t1, t2, k, precision) {
            Ok(Ordering::Greater) => return Ok(Some(member)),
            Ok(_) => {}
            Err(source) => {
                undecided.get_or_insert(FamilyError::Undecided { member, source });
            }
        }
    }
    match undecided {
        Some(e) => Err(e),
        None => Ok(None),
    }
}

/// Exponents up to this size are verified with exact rational powers.
const EXACT_POWER_LIMIT: i64 = 64;

/// Whether `k t₁^α < t₂^α` for a positive integer `α`.
fn power_separates(t1: &Rational, t2: &Rational, k: &Rational, alpha: i64, precision: Precision) -> Result<bool, Undecided> {
    if alpha <= EXACT_POWER_LIMIT {
        let a = alpha as i32;
        return Ok(k * &t1.pow(a) < t2.pow(a));
    }
    // α ln(t₂ / t₁) - ln k, which avoids huge exact powers.
    let ratio = t2 / t1;
    let alpha = Rational::from_integer(alpha);
    let alpha_bits = alpha.numer().bits() as u32;
    let s = certified_sign(precision, |bits| ln(&ratio, bits + alpha_bits).scale(&alpha).sub(&ln(k, bits)))?;
    Ok(s == Ordering::Greater)
}

/// The least positive integer `α` with `k t₁^α < t₂^α`, so that the power
/// `t ↦ t^α` separates the pair.
pub fn power_separator_exponent(t1: &Rational, t2: &Rational, k: &Rational, precision: Precision) -> Result<Rational, FamilyError> {
    check_pair(t1, t2)?;
    check_factor(k)?;
    if t1.is_zero() {
        return Ok(Rational::one());
    }
    let undecided = |alpha: i64| move |source| FamilyError::Exponent { alpha, source };
    let mut hi: i64 = 1;
    while !power_separates(t1, t2, k, hi, precision).map_err(undecided(hi))? {
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| FamilyError::Theorem(TheoremError::Precondition("t2 / t1 is too close to 1".into())))?;
    }
    // Invariant: lo fails (or is 0), hi separates.
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if power_separates(t1, t2, k, mid, precision).map_err(undecided(mid))? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Rational::from_integer(hi))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberMargin {
    pub member: usize,
    /// `f(t₂) - k f(t₁)`; the pair is separated by this member iff positive.
    pub margin: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnseparatedPair {
    pub t1: Rational,
    pub t2: Rational,
    pub margins: Vec<MemberMargin>,
}

/// k-separation restricted to the given pairs.
pub fn is_k_separating_on(
    family: &FunctionFamily,
    k: &Rational,
    pairs: &[(Rational, Rational)],
    precision: Precision,
) -> Result<Verdict<UnseparatedPair>, FamilyError> {
    check_factor(k)?;
    for (t1, t2) in pairs {
        check_pair(t1, t2)?;
    }
    for (t1, t2) in pairs {
        if find_separator(family, t1, t2, k, precision)?.is_none() {
            let margins = family
                .members
                .iter()
                .enumerate()
                .map(|(member, f)| MemberMargin {
                    member,
                    margin: margin(f, t1, t2, k, precision),
                })
                .collect();
            return Ok(Verdict::Fails(UnseparatedPair {
                t1: t1.clone(),
                t2: t2.clone(),
                margins,
            }));
        }
    }
    Ok(Verdict::Holds)
}

/// Evidence that a family which does not 2-separate `(t₁, t₂)` cannot
/// detect ultrametricity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyCounterexample {
    pub t1: Rational,
    pub t2: Rational,
    pub t3: Rational,
    pub space: Dissimilarity,
    pub space_is_metric: bool,
    pub space_is_ultrametric: bool,
    /// Whether `f ∘ d` is a metric, per member.
    pub images_are_metric: Vec<bool>,
}

/// Whether `f ∘ d` is a metric, through exact classification when `f` is
/// exact and certified power comparisons otherwise.
fn image_is_metric(f: &TransformFunction, space: &Dissimilarity, precision: Precision) -> Result<Option<Triple>, FamilyError> {
    match f {
        TransformFunction::Power(alpha) if !alpha.is_integer() => {
            // t^α is subadditive for α <= 1.
            if *alpha < Rational::one() {
                return Ok(None);
            }
            match probe_snowflake(space, alpha, precision)?.verdict {
                SnowflakeVerdict::Holds => Ok(None),
                SnowflakeVerdict::Fails { triple } => Ok(Some(triple)),
                SnowflakeVerdict::Undecided { bits, .. } => Err(FamilyError::Undecided {
                    member: usize::MAX,
                    source: Undecided { bits },
                }),
            }
        }
        _ => {
            let report = classify_space(&apply(f, space)?);
            if report.classes.metric {
                Ok(None)
            } else {
                // Members are amenable, so only the triangle can fail.
                Ok(report.triangle.witness().copied())
            }
        }
    }
}

fn with_member(member: usize) -> impl Fn(FamilyError) -> FamilyError {
    move |e| match e {
        FamilyError::Undecided { source, .. } => FamilyError::Undecided { member, source },
        other => other,
    }
}

/// For a pair no member 2-separates, the metric with sides `(t₂, t₃, t₃)`,
/// `t₃ = (t₁ + t₂) / 2`: not an ultrametric, yet every `f ∘ d` is a metric.
pub fn counterexample_space(
    family: &FunctionFamily,
    t1: &Rational,
    t2: &Rational,
    precision: Precision,
) -> Result<FamilyCounterexample, FamilyError> {
    if !t1.is_positive() {
        return Err(FamilyError::Pair {
            t1: t1.clone(),
            t2: t2.clone(),
        });
    }
    if let Some(member) = find_separator(family, t1, t2, &Rational::from_integer(2), precision)? {
        return Err(FamilyError::Separated {
            member,
            t1: t1.clone(),
            t2: t2.clone(),
        });
    }
    let t3 = t1.midpoint(t2);
    let space = Dissimilarity::triangle(t2.clone(), t3.clone(), t3.clone()).map_err(TheoremError::from)?;
    let classes = classify_space(&space).classes;
    let mut images_are_metric = Vec::with_capacity(family.len());
    for (member, f) in family.members.iter().enumerate() {
        images_are_metric.push(image_is_metric(f, &space, precision).map_err(with_member(member))?.is_none());
    }
    let cert = FamilyCounterexample {
        t1: t1.clone(),
        t2: t2.clone(),
        t3,
        space,
        space_is_metric: classes.metric,
        space_is_ultrametric: classes.ultrametric,
        images_are_metric,
    };
    if !cert.space_is_metric || cert.space_is_ultrametric || cert.images_are_metric.contains(&false) {
        return Err(TheoremError::Internal("counterexample certificate does not hold".into()).into());
    }
    Ok(cert)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FamilyVerdict {
    Ultrametric,
    /// `f ∘ d` fails the triangle inequality for this member.
    NotUltrametric {
        member: usize,
        triple: Triple,
    },
    /// Some pair of occurring distances is not 2-separated, so the family
    /// cannot decide.
    Inconclusive {
        t1: Rational,
        t2: Rational,
    },
}

/// Decides ultrametricity of a metric through the family: first certifies
/// 2-separation on every pair of occurring distances, then checks that each
/// `f ∘ d` is a metric. The verdict is cross-checked against the direct
/// classification.
pub fn ultrametric_by_family(family: &FunctionFamily, space: &Dissimilarity, precision: Precision) -> Result<FamilyVerdict, FamilyError> {
    let classes = classify_space(space).classes;
    if !classes.metric {
        return Err(TheoremError::Precondition("input is not a metric".into()).into());
    }
    let two = Rational::from_integer(2);
    let values = space.positive_values();
    for (i, t1) in values.iter().enumerate() {
        for t2 in &values[i + 1..] {
            if find_separator(family, t1, t2, &two, precision)?.is_none() {
                return Ok(FamilyVerdict::Inconclusive {
                    t1: t1.clone(),
                    t2: t2.clone(),
                });
            }
        }
    }
    let mut verdict = FamilyVerdict::Ultrametric;
    for (member, f) in family.members.iter().enumerate() {
        if let Some(triple) = image_is_metric(f, space, precision).map_err(with_member(member))? {
            verdict = FamilyVerdict::NotUltrametric { member, triple };
            break;
        }
    }
    if (verdict == FamilyVerdict::Ultrametric) != classes.ultrametric {
        return Err(TheoremError::Internal("family verdict disagrees with the direct check".into()).into());
    }
    Ok(verdict)
}
