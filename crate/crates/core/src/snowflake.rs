//! Power transforms `d ↦ d^α` of metrics.
//!
//! A metric is an ultrametric exactly when every power `d^α` with `α > 1`
//! is still a metric. For non-integer `α` the powers are irrational, so each
//! triangle comparison is settled with certified enclosures.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::axioms::{classify_space, Triple};
use crate::interval::{certified_sign, pow, Enclosure, Precision, Undecided};
use crate::rational::Rational;
use crate::space::Dissimilarity;
use crate::theorems::TheoremError;

/// Outcome of checking `d^α` for the triangle inequality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SnowflakeVerdict {
    Holds,
    /// `d(x,y)^α > d(x,z)^α + d(z,y)^α` at the lexicographically first such
    /// triple that could be decided.
    Fails {
        triple: Triple,
    },
    /// No decided failure, but these triples could not be separated at the
    /// precision cap.
    Undecided {
        triples: Vec<Triple>,
        bits: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnowflakeProbe {
    pub alpha: Rational,
    pub exact: bool,
    pub verdict: SnowflakeVerdict,
}

/// Sides of a triple that can fail: the long side `b` and the two others,
/// sorted, all divided by `b`.
type Key = (Rational, Rational);

fn strong_violations(space: &Dissimilarity) -> Vec<(Triple, Key)> {
    let n = space.n();
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if x == y || y == z || x == z {
                    continue;
                }
                let b = space.get(x, y);
                let (l, r) = (space.get(x, z), space.get(z, y));
                if b > l.max(r) {
                    let (lo, hi) = if l <= r { (l, r) } else { (r, l) };
                    out.push((Triple::new(x, y, z), (lo / b, hi / b)));
                }
            }
        }
    }
    out
}

/// Enclosure of `u^α + v^α - 1`, decreasing in `α` when `0 < u, v < 1`.
fn excess(key: &Key, alpha: &Rational, bits: u32) -> Enclosure {
    pow(&key.0, alpha, bits)
        .add(&pow(&key.1, alpha, bits))
        .sub(&Enclosure::exact(Rational::one()))
}

fn sign_at(key: &Key, alpha: &Rational, precision: Precision) -> Result<Ordering, Undecided> {
    certified_sign(precision, |bits| excess(key, alpha, bits))
}

fn require_metric(space: &Dissimilarity) -> Result<(), TheoremError> {
    if classify_space(space).classes.metric {
        Ok(())
    } else {
        Err(TheoremError::Precondition("input is not a metric".into()))
    }
}

/// Checks `d(x,y)^α ≤ d(x,z)^α + d(z,y)^α` on every triple. Exact for
/// integer `α`; otherwise each comparison is refined up to `precision`.
pub fn probe_snowflake(space: &Dissimilarity, alpha: &Rational, precision: Precision) -> Result<SnowflakeProbe, TheoremError> {
    if *alpha <= Rational::one() {
        return Err(TheoremError::Precondition(format!("alpha must exceed 1, got {alpha}")));
    }
    require_metric(space)?;
    let mut cache: HashMap<Key, Result<Ordering, Undecided>> = HashMap::new();
    let mut undecided = Vec::new();
    let mut verdict = None;
    // Triples with b <= max(a1, a2) hold for every α > 0.
    for (triple, key) in strong_violations(space) {
        let outcome = cache.entry(key).or_insert_with_key(|k| sign_at(k, alpha, precision));
        match outcome {
            Ok(Ordering::Less) => {
                verdict = Some(SnowflakeVerdict::Fails { triple });
                break;
            }
            Ok(_) => {}
            Err(_) => undecided.push(triple),
        }
    }
    let verdict = verdict.unwrap_or(if undecided.is_empty() {
        SnowflakeVerdict::Holds
    } else {
        SnowflakeVerdict::Undecided {
            triples: undecided,
            bits: precision.bits,
        }
    });
    Ok(SnowflakeProbe {
        alpha: alpha.clone(),
        exact: alpha.is_integer(),
        verdict,
    })
}

/// The smallest exponent at which some power of the metric stops being a
/// metric, bracketed as `lower ≤ α* ≤ upper` with `upper - lower ≤ tol`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalExponent {
    pub lower: Rational,
    pub upper: Rational,
    /// A triple whose own root lies in `[upper - tol, upper]`.
    pub triple: Triple,
}

impl CriticalExponent {
    pub fn estimate(&self) -> Rational {
        self.lower.midpoint(&self.upper)
    }
}

pub fn default_tolerance() -> Rational {
    Rational::new(1, 1 << 30)
}

/// Bracket of the root of `u^α + v^α = 1` in `α ≥ 1`.
fn root_bracket(key: &Key, tol: &Rational, precision: Precision) -> Result<(Rational, Rational), Undecided> {
    let mut lo = Rational::one();
    if sign_at(key, &lo, precision)? != Ordering::Greater {
        return Ok((lo.clone(), lo));
    }
    let mut hi = Rational::from_integer(2);
    loop {
        match sign_at(key, &hi, precision)? {
            Ordering::Equal => return Ok((hi.clone(), hi)),
            Ordering::Less => break,
            Ordering::Greater => {
                lo = hi.clone();
                hi = hi.double();
            }
        }
    }
    while &hi - &lo > *tol {
        let width = &hi - &lo;
        let mid = lo.midpoint(&hi);
        let eighth = &width / &Rational::from_integer(8);
        // A probe point too close to the root cannot be separated; a nearby
        // point can.
        let mut step = None;
        let mut last = Undecided { bits: precision.bits };
        for point in [mid.clone(), &mid - &eighth, &mid + &eighth] {
            match sign_at(key, &point, precision) {
                Ok(s) => {
                    step = Some((point, s));
                    break;
                }
                Err(e) => last = e,
            }
        }
        let (point, s) = step.ok_or(last)?;
        match s {
            Ordering::Greater => lo = point,
            Ordering::Less => hi = point,
            Ordering::Equal => return Ok((point.clone(), point)),
        }
    }
    Ok((lo, hi))
}

/// Brackets the exponent at which each strong-triangle violation becomes a
/// triangle violation and returns the smallest. Keys are visited by
/// increasing `u + v`, and a key is skipped once it provably holds at the
/// current upper bound. `None` for ultrametrics.
pub fn min_falsifying_exponent(
    space: &Dissimilarity,
    tol: &Rational,
    precision: Precision,
) -> Result<Option<CriticalExponent>, TheoremError> {
    if !tol.is_positive() {
        return Err(TheoremError::Precondition("tolerance must be positive".into()));
    }
    require_metric(space)?;
    let mut keys: Vec<(Key, Triple)> = Vec::new();
    let mut seen: HashSet<Key> = HashSet::new();
    for (triple, key) in strong_violations(space) {
        if seen.insert(key.clone()) {
            keys.push((key, triple));
        }
    }
    keys.sort_by_cached_key(|(k, _)| &k.0 + &k.1);
    let mut best: Option<CriticalExponent> = None;
    for (key, triple) in keys {
        if let Some(cur) = &best {
            // u^α + v^α - 1 is decreasing, so a nonnegative sign at the
            // upper bound puts this root above it.
            if matches!(sign_at(&key, &cur.upper, precision), Ok(Ordering::Greater | Ordering::Equal)) {
                continue;
            }
        }
        let (lo, hi) = root_bracket(&key, tol, precision)?;
        best = Some(match best {
            None => CriticalExponent {
                lower: lo,
                upper: hi,
                triple,
            },
            Some(mut cur) => {
                if hi < cur.upper {
                    cur.upper = hi;
                    cur.triple = triple;
                }
                if lo < cur.lower {
                    cur.lower = lo;
                }
                cur
            }
        });
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn tri(a: i64, b: i64, c: i64) -> Dissimilarity {
        Dissimilarity::triangle(int(a), int(b), int(c)).unwrap()
    }

    #[test]
    fn integer_powers_are_exact() {
        let d = tri(3, 4, 5);
        let p = probe_snowflake(&d, &int(2), Precision::default()).unwrap();
        assert!(p.exact);
        assert_eq!(p.verdict, SnowflakeVerdict::Holds);
        let p = probe_snowflake(&d, &int(3), Precision::default()).unwrap();
        assert_eq!(
            p.verdict,
            SnowflakeVerdict::Fails {
                triple: Triple::new(1, 2, 0)
            }
        );
    }

    #[test]
    fn fractional_powers() {
        let d = tri(3, 4, 5);
        let p = probe_snowflake(&d, &Rational::new(3, 2), Precision::default()).unwrap();
        assert!(!p.exact);
        assert_eq!(p.verdict, SnowflakeVerdict::Holds);
        let p = probe_snowflake(&d, &Rational::new(5, 2), Precision::default()).unwrap();
        assert!(matches!(p.verdict, SnowflakeVerdict::Fails { .. }));
    }

    #[test]
    fn ultrametrics_hold_for_all_alpha() {
        let d = tri(1, 2, 2);
        for alpha in [Rational::new(11, 10), int(2), Rational::new(37, 3)] {
            assert_eq!(
                probe_snowflake(&d, &alpha, Precision::default()).unwrap().verdict,
                SnowflakeVerdict::Holds
            );
        }
        assert_eq!(
            min_falsifying_exponent(&d, &default_tolerance(), Precision::default()).unwrap(),
            None
        );
    }

    #[test]
    fn alpha_must_exceed_one() {
        assert!(probe_snowflake(&tri(3, 4, 5), &int(1), Precision::default()).is_err());
    }

    #[test]
    fn critical_exponents() {
        let tol = default_tolerance();
        let c = min_falsifying_exponent(&tri(3, 4, 5), &tol, Precision::default()).unwrap().unwrap();
        assert_eq!((c.lower, c.upper), (int(2), int(2)));
        let c = min_falsifying_exponent(&tri(1, 1, 2), &tol, Precision::default()).unwrap().unwrap();
        assert_eq!((c.lower, c.upper), (int(1), int(1)));
    }

    #[test]
    fn irrational_root_is_bracketed() {
        // Sides (2, 2, 3): 2 (2/3)^α = 1 at α = ln 2 / ln (3/2).
        let c = min_falsifying_exponent(&tri(2, 2, 3), &default_tolerance(), Precision::default())
            .unwrap()
            .unwrap();
        let oracle = 2f64.ln() / 1.5f64.ln();
        assert!(c.lower.to_f64() <= oracle + 1e-12 && oracle - 1e-12 <= c.upper.to_f64());
        assert!(&c.upper - &c.lower <= default_tolerance());
    }
}
