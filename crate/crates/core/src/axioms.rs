//! Exhaustive axiom checking for finite spaces.
//!
//! All checks scan every point, pair and ordered triple. Witnesses are the
//! first failure in lexicographic index order, so reports are deterministic.
//!
//! A triple `(x, y, z)` always means "the side `d(x, y)` measured against the
//! path through `z`": the triangle inequality fails there when
//! `d(x, y) > d(x, z) + d(z, y)`, the strong triangle inequality when
//! `d(x, y) > max(d(x, z), d(z, y))`.

use std::ops::Add;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::rational::{common_denominator, scaled_integer, Rational};
use crate::space::{Dissimilarity, SpaceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Reflexivity,
    IdentityOfIndiscernibles,
    Triangle,
    StrongTriangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "[usize; 3]", from = "[usize; 3]")]
pub struct Triple {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl Triple {
    pub fn new(x: usize, y: usize, z: usize) -> Self {
        Triple { x, y, z }
    }
}

impl std::fmt::Display for Triple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl From<Triple> for [usize; 3] {
    fn from(t: Triple) -> Self {
        [t.x, t.y, t.z]
    }
}

impl From<[usize; 3]> for Triple {
    fn from([x, y, z]: [usize; 3]) -> Self {
        Triple { x, y, z }
    }
}

/// Outcome of one axiom check. A failure always carries its witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "witness", rename_all = "snake_case")]
pub enum Verdict<W> {
    Holds,
    Fails(W),
}

impl<W> Verdict<W> {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails(w) => Some(w),
        }
    }
}

impl<W> From<Option<W>> for Verdict<W> {
    fn from(w: Option<W>) -> Self {
        match w {
            None => Verdict::Holds,
            Some(w) => Verdict::Fails(w),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceClasses {
    pub semimetric: bool,
    pub pseudometric: bool,
    pub pseudoultrametric: bool,
    pub metric: bool,
    pub ultrametric: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceClass {
    Semimetric,
    Pseudometric,
    Pseudoultrametric,
    Metric,
    Ultrametric,
}

impl SpaceClasses {
    pub fn has(&self, class: SpaceClass) -> bool {
        match class {
            SpaceClass::Semimetric => self.semimetric,
            SpaceClass::Pseudometric => self.pseudometric,
            SpaceClass::Pseudoultrametric => self.pseudoultrametric,
            SpaceClass::Metric => self.metric,
            SpaceClass::Ultrametric => self.ultrametric,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub reflexive: Verdict<usize>,
    pub identity_of_indiscernibles: Verdict<(usize, usize)>,
    pub triangle: Verdict<Triple>,
    pub strong_triangle: Verdict<Triple>,
    pub classes: SpaceClasses,
}

impl AxiomReport {
    pub fn verdict_holds(&self, axiom: Axiom) -> bool {
        match axiom {
            Axiom::Reflexivity => self.reflexive.holds(),
            Axiom::IdentityOfIndiscernibles => self.identity_of_indiscernibles.holds(),
            Axiom::Triangle => self.triangle.holds(),
            Axiom::StrongTriangle => self.strong_triangle.holds(),
        }
    }
}

/// Classifies a space against every axiom and derives the class lattice.
pub fn classify_space(space: &Dissimilarity) -> AxiomReport {
    let n = space.n();
    let reflexive: Verdict<usize> = (0..n).find(|&i| !space.get(i, i).is_zero()).into();
    let identity_of_indiscernibles: Verdict<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .find(|&(i, j)| space.get(i, j).is_zero())
        .into();
    let (triangle, strong) = scan_triples(space);
    let (triangle, strong_triangle): (Verdict<Triple>, Verdict<Triple>) = (triangle.into(), strong.into());

    let refl = matches!(reflexive, Verdict::Holds);
    let ident = identity_of_indiscernibles.holds();
    let semimetric = refl && ident;
    let classes = SpaceClasses {
        semimetric,
        pseudometric: refl && triangle.holds(),
        pseudoultrametric: refl && strong_triangle.holds(),
        metric: semimetric && triangle.holds(),
        ultrametric: semimetric && strong_triangle.holds(),
    };
    AxiomReport {
        reflexive,
        identity_of_indiscernibles,
        triangle,
        strong_triangle,
        classes,
    }
}

/// First triangle and strong-triangle violations in lexicographic order.
///
/// Entries are moved onto a common integer grid first. When every scaled
/// value fits in an `i64` the scan runs on `i128`, otherwise on big integers.
fn scan_triples(space: &Dissimilarity) -> (Option<Triple>, Option<Triple>) {
    let scale = common_denominator(space.entries());
    let scaled: Vec<BigInt> = space.entries().iter().map(|v| scaled_integer(v, &scale)).collect();
    let small: Option<Vec<i128>> = scaled.iter().map(|v| v.to_i64().map(i128::from)).collect();
    match small {
        Some(values) => scan_kernel(space.n(), &values),
        None => scan_kernel(space.n(), &scaled),
    }
}

fn scan_kernel<T>(n: usize, d: &[T]) -> (Option<Triple>, Option<Triple>)
where
    T: Ord + Clone,
    for<'a> &'a T: Add<&'a T, Output = T>,
{
    let mut triangle = None;
    let mut strong = None;
    for x in 0..n {
        for y in 0..n {
            let side = &d[x * n + y];
            for z in 0..n {
                let left = &d[x * n + z];
                let right = &d[z * n + y];
                if strong.is_none() && side > left.max(right) {
                    strong = Some(Triple::new(x, y, z));
                }
                if triangle.is_none() && *side > left + right {
                    triangle = Some(Triple::new(x, y, z));
                }
                if triangle.is_some() && strong.is_some() {
                    return (triangle, strong);
                }
            }
        }
    }
    (triangle, strong)
}

/// Side lengths `(d(x,y), d(x,z), d(z,y))` of a triple.
pub fn triple_sides(space: &Dissimilarity, t: Triple) -> [Rational; 3] {
    [
        space.get(t.x, t.y).clone(),
        space.get(t.x, t.z).clone(),
        space.get(t.z, t.y).clone(),
    ]
}

/// `2·max ≤ sum` over the three sides of `{i, j, k}`; equivalent to all three
/// triangle inequalities on that triple.
pub fn check_triangle_perimeter(space: &Dissimilarity, i: usize, j: usize, k: usize) -> Result<bool, SpaceError> {
    for idx in [i, j, k] {
        space.check_index(idx)?;
    }
    let sides = [space.get(i, j), space.get(j, k), space.get(k, i)];
    Ok(perimeter_holds(sides))
}

pub(crate) fn perimeter_holds(sides: [&Rational; 3]) -> bool {
    let max = sides.iter().copied().max().unwrap();
    let sum: Rational = sides.into_iter().sum();
    max.double() <= sum
}

/// A strong-triangle violation `b = d(x,y) > a = max(d(x,z), d(z,y))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UltrametricViolation {
    pub triple: Triple,
    pub a: Rational,
    pub b: Rational,
}

/// The strong-triangle violation with the largest gap `b − a`.
///
/// Ties prefer the larger `b`, then the lexicographically first triple.
/// Returns `None` exactly when the strong triangle inequality holds.
pub fn worst_ultrametric_violation(space: &Dissimilarity) -> Option<UltrametricViolation> {
    let n = space.n();
    let mut best: Option<(Rational, UltrametricViolation)> = None;
    for x in 0..n {
        for y in 0..n {
            let b = space.get(x, y);
            for z in 0..n {
                let a = space.get(x, z).max(space.get(z, y));
                if b <= a {
                    continue;
                }
                let gap = b - a;
                let better = match &best {
                    None => true,
                    Some((g, v)) => gap > *g || (gap == *g && *b > v.b),
                };
                if better {
                    best = Some((
                        gap,
                        UltrametricViolation {
                            triple: Triple::new(x, y, z),
                            a: a.clone(),
                            b: b.clone(),
                        },
                    ));
                }
            }
        }
    }
    best.map(|(_, v)| v)
}
