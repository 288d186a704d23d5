//! Seeded generators for spaces and functions of a requested class.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`, so a
//! [`GenSpec`] determines its output bit for bit. Every generator checks its
//! own output against the classifiers and reports a [`GenError`] rather than
//! returning something outside the requested class.
//!
//! Values are drawn from the grid `{k / denominator : 1 ≤ k ≤ max · denominator}`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::axioms::{classify_space, Verdict};
use crate::calculus::{is_amenable, is_doubling, is_increasing};
use crate::function::{Piece, TransformFunction};
use crate::rational::Rational;
use crate::space::Dissimilarity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValuePool {
    pub max: u32,
    pub denominator: u32,
}

impl Default for ValuePool {
    fn default() -> Self {
        ValuePool { max: 10, denominator: 4 }
    }
}

impl ValuePool {
    pub fn size(&self) -> usize {
        self.max as usize * self.denominator as usize
    }

    /// The `i`-th smallest value, `0 ≤ i < size`.
    pub fn value(&self, i: usize) -> Rational {
        Rational::new(i as i64 + 1, self.denominator as i64)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Rational {
        self.value(rng.gen_range(0..self.size()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionGenClass {
    IncreasingAmenable,
    IncreasingZeroAtZero,
    /// Amenable and doubling but not increasing.
    AmenableDoubling,
    NonIncreasing,
    NonAmenable,
    /// Amenable but violating the doubling condition.
    NonDoubling,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenClass {
    Ultrametric,
    Metric {
        #[serde(default)]
        embed_345: bool,
    },
    Pseudoultrametric {
        zero_pairs: Rational,
    },
    Function {
        class: FunctionGenClass,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub seed: u64,
    pub n: usize,
    pub pool: ValuePool,
    pub class: GenClass,
}

impl GenSpec {
    pub fn new(seed: u64, n: usize, class: GenClass) -> Self {
        GenSpec {
            seed,
            n,
            pool: ValuePool::default(),
            class,
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("value pool has {available} values but {needed} distinct levels are needed")]
    PoolTooSmall { needed: usize, available: usize },
    #[error("invalid generator parameter: {0}")]
    Parameter(String),
    #[error("generated output failed its own check: {0}")]
    SelfCheck(String),
    #[error("no sample of class {0:?} after {1} attempts")]
    RetryCap(FunctionGenClass, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Generated {
    Space(Dissimilarity),
    Metric(GeneratedMetric),
    Function(TransformFunction),
}

/// Dispatches on `spec.class`.
pub fn generate(spec: &GenSpec) -> Result<Generated, GenError> {
    Ok(match &spec.class {
        GenClass::Ultrametric => Generated::Space(gen_ultrametric(spec)?),
        GenClass::Metric { embed_345 } => Generated::Metric(gen_metric(spec, *embed_345)?),
        GenClass::Pseudoultrametric { zero_pairs } => Generated::Space(gen_pseudoultrametric(spec, zero_pairs)?),
        GenClass::Function { class } => Generated::Function(gen_function(spec, *class)?),
    })
}

fn laminar(rng: &mut ChaCha8Rng, pool: &ValuePool, n: usize) -> Result<Dissimilarity, GenError> {
    if n == 0 {
        return Err(GenError::Parameter("n must be at least 1".into()));
    }
    let needed = n.saturating_sub(1);
    if pool.size() < needed {
        return Err(GenError::PoolTooSmall {
            needed,
            available: pool.size(),
        });
    }
    let mut level = vec![vec![0usize; n]; n];
    let mut points: Vec<usize> = (0..n).collect();
    points.shuffle(rng);
    // (block, exclusive upper bound on the level index)
    let mut stack = vec![(points, pool.size())];
    while let Some((block, ceiling)) = stack.pop() {
        let s = block.len();
        if s < 2 {
            continue;
        }
        // A block of s points needs s - 2 further distinct levels below its own.
        let idx = rng.gen_range(s - 2..ceiling);
        let parts = rng.gen_range(2..=s.min(4));
        let mut cuts: Vec<usize> = (1..s).collect();
        cuts.shuffle(rng);
        let mut cuts: Vec<usize> = cuts[..parts - 1].to_vec();
        cuts.sort_unstable();
        cuts.insert(0, 0);
        cuts.push(s);
        let children: Vec<Vec<usize>> = cuts.windows(2).map(|w| block[w[0]..w[1]].to_vec()).collect();
        for (a, ca) in children.iter().enumerate() {
            for cb in &children[a + 1..] {
                for &i in ca {
                    for &j in cb {
                        level[i][j] = idx;
                        level[j][i] = idx;
                    }
                }
            }
        }
        stack.extend(children.into_iter().map(|c| (c, idx)));
    }
    Dissimilarity::from_fn(n, |i, j| if i == j { Rational::zero() } else { pool.value(level[i][j]) })
        .map_err(|e| GenError::SelfCheck(e.to_string()))
}

fn expect_class(ok: bool, what: &str) -> Result<(), GenError> {
    if ok {
        Ok(())
    } else {
        Err(GenError::SelfCheck(format!("output is not {what}")))
    }
}

/// An ultrametric from a random laminar hierarchy: points are split
/// recursively into 2 to 4 blocks, each split at a level strictly below its
/// parent's, and `d(x, y)` is the level of the smallest block holding both.
pub fn gen_ultrametric(spec: &GenSpec) -> Result<Dissimilarity, GenError> {
    let d = laminar(&mut spec.rng(), &spec.pool, spec.n)?;
    expect_class(classify_space(&d).classes.ultrametric, "an ultrametric")?;
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedMetric {
    pub space: Dissimilarity,
    pub ultrametric: bool,
}

/// A random symmetric matrix closed under shortest paths. With `embed_345`
/// (and `n ≥ 3`) the first three points form the triangle `(3, 4, 5)` and all
/// other entries are at least `5/2`, so the closure keeps it.
#[allow(clippy::needless_range_loop)]
pub fn gen_metric(spec: &GenSpec, embed_345: bool) -> Result<GeneratedMetric, GenError> {
    let n = spec.n;
    if n == 0 {
        return Err(GenError::Parameter("n must be at least 1".into()));
    }
    if embed_345 && n < 3 {
        return Err(GenError::Parameter("embedding (3, 4, 5) needs n >= 3".into()));
    }
    let mut rng = spec.rng();
    let floor = Rational::new(5, 2);
    let mut d = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let mut v = spec.pool.sample(&mut rng);
            if embed_345 && v < floor {
                v = &v + &floor;
            }
            d[i][j] = v.clone();
            d[j][i] = v;
        }
    }
    if embed_345 {
        for (i, j, v) in [(0, 1, 3), (0, 2, 4), (1, 2, 5)] {
            d[i][j] = Rational::from_integer(v);
            d[j][i] = Rational::from_integer(v);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = &d[i][k] + &d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    let space = Dissimilarity::from_rows(d).map_err(|e| GenError::SelfCheck(e.to_string()))?;
    let classes = classify_space(&space).classes;
    expect_class(classes.metric, "a metric")?;
    if embed_345 {
        let sides = [space.get(0, 1), space.get(0, 2), space.get(1, 2)];
        expect_class(
            sides == [&Rational::from_integer(3), &Rational::from_integer(4), &Rational::from_integer(5)],
            "embedding (3, 4, 5)",
        )?;
    }
    Ok(GeneratedMetric {
        space,
        ultrametric: classes.ultrametric,
    })
}

/// Lifts a space on classes to the points: `d(x, y) = q(class x, class y)`,
/// so points in the same class are at distance 0.
pub fn lift(quotient: &Dissimilarity, classes: &[usize]) -> Result<Dissimilarity, GenError> {
    if let Some(&c) = classes.iter().find(|&&c| c >= quotient.n()) {
        return Err(GenError::Parameter(format!("class {c} out of range")));
    }
    Dissimilarity::from_fn(classes.len(), |i, j| quotient.get(classes[i], classes[j]).clone())
        .map_err(|e| GenError::SelfCheck(e.to_string()))
}

/// An ultrametric on a quotient lifted back to `n` points. About
/// `zero_pairs · (n - 1)` merges are made, at least one when
/// `zero_pairs > 0` and `n ≥ 2`.
pub fn gen_pseudoultrametric(spec: &GenSpec, zero_pairs: &Rational) -> Result<Dissimilarity, GenError> {
    let n = spec.n;
    if zero_pairs.is_negative() || *zero_pairs > Rational::one() {
        return Err(GenError::Parameter(format!("zero_pairs must lie in [0, 1], got {zero_pairs}")));
    }
    if n == 0 {
        return Err(GenError::Parameter("n must be at least 1".into()));
    }
    let scaled = zero_pairs * &Rational::from_integer(n as i64 - 1);
    let mut merges = scaled.ceil().try_into().unwrap_or(0usize);
    if zero_pairs.is_positive() {
        merges = merges.max(1);
    }
    let merges = merges.min(n - 1);
    let m = n - merges;
    let mut rng = spec.rng();
    let quotient = laminar(&mut rng, &spec.pool, m)?;
    let mut points: Vec<usize> = (0..n).collect();
    points.shuffle(&mut rng);
    let mut classes = vec![0; n];
    for (rank, &p) in points.iter().enumerate() {
        classes[p] = if rank < m { rank } else { rng.gen_range(0..m) };
    }
    let d = lift(&quotient, &classes)?;
    let c = classify_space(&d).classes;
    expect_class(c.pseudoultrametric, "a pseudoultrametric")?;
    expect_class(merges == 0 || !c.ultrametric, "a non-ultrametric pseudoultrametric")?;
    Ok(d)
}

/// Assembles `{0} ↦ 0` (if `zero_point`), bounded affine pieces between the
/// breakpoints with the given endpoint values, and a tail starting at the
/// last breakpoint. `owner[i]` says whether interior breakpoint `i` belongs
/// to the piece on its left.
struct Shape {
    zero_point: bool,
    breaks: Vec<Rational>,
    ends: Vec<(Rational, Rational)>,
    owner: Vec<bool>,
    tail: (Rational, Rational),
}

impl Shape {
    fn build(self) -> Result<TransformFunction, GenError> {
        let mut pieces = Vec::new();
        let mut start = Rational::zero();
        let mut start_closed = !self.zero_point;
        if self.zero_point {
            pieces.push(Piece::point(Rational::zero(), Rational::zero()));
        }
        for (i, (l, r)) in self.ends.iter().enumerate() {
            let end = self.breaks[i].clone();
            let slope = (r - l) / (&end - &start);
            let intercept = l - &(&slope * &start);
            let end_closed = self.owner[i];
            pieces.push(Piece::new(
                start.clone(),
                Some(end.clone()),
                start_closed,
                end_closed,
                slope,
                intercept,
            ));
            start = end;
            start_closed = !end_closed;
        }
        let (value, slope) = self.tail;
        let intercept = &value - &(&slope * &start);
        pieces.push(Piece::new(start, None, start_closed, false, slope, intercept));
        TransformFunction::piecewise(pieces).map_err(|e| GenError::SelfCheck(e.to_string()))
    }
}

/// Breakpoints `0 < b₁ < … < b_m` from the pool and random closures.
fn skeleton(rng: &mut ChaCha8Rng, pool: &ValuePool) -> (Vec<Rational>, Vec<bool>) {
    let m = rng.gen_range(1..=6usize).min(pool.size());
    let mut idx: Vec<usize> = (0..pool.size()).collect();
    idx.shuffle(rng);
    let mut idx = idx[..m].to_vec();
    idx.sort_unstable();
    let breaks: Vec<Rational> = idx.into_iter().map(|i| pool.value(i)).collect();
    let owner = (0..m).map(|_| rng.gen_bool(0.5)).collect();
    (breaks, owner)
}

fn tail_slope(rng: &mut ChaCha8Rng) -> Rational {
    if rng.gen_bool(0.5) {
        Rational::zero()
    } else {
        Rational::new(rng.gen_range(1..=8), 4)
    }
}

fn pair_up(values: &[Rational]) -> Vec<(Rational, Rational)> {
    values.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect()
}

fn shape_for(rng: &mut ChaCha8Rng, pool: &ValuePool, class: FunctionGenClass) -> Result<TransformFunction, GenError> {
    let (breaks, owner) = skeleton(rng, pool);
    let m = breaks.len();
    let mut values: Vec<Rational> = (0..2 * m + 1).map(|_| pool.sample(rng)).collect();
    let shape = match class {
        FunctionGenClass::IncreasingAmenable | FunctionGenClass::IncreasingZeroAtZero => {
            values.sort();
            if class == FunctionGenClass::IncreasingZeroAtZero {
                let zeros = rng.gen_range(0..=values.len());
                for v in values.iter_mut().take(zeros) {
                    *v = Rational::zero();
                }
            } else if rng.gen_bool(0.5) {
                // Continuous at 0 with a positive slope.
                values[0] = Rational::zero();
                if values[1].is_zero() {
                    values[1] = pool.value(0);
                }
            }
            let tail = values.pop().expect("odd length");
            let tail_slope = if tail.is_zero() { Rational::zero() } else { tail_slope(rng) };
            Shape {
                zero_point: true,
                breaks,
                ends: pair_up(&values),
                owner,
                tail: (tail, tail_slope),
            }
        }
        FunctionGenClass::AmenableDoubling => {
            // Every value in [c, 2c] makes f(a) <= 2 f(b) automatic.
            let c = pool.sample(rng);
            let mut values: Vec<Rational> = (0..2 * m).map(|_| &c * &Rational::new(16 + rng.gen_range(0..=16), 16)).collect();
            // Reach 2c before a tail at c, so the function is not increasing.
            values[1] = c.double();
            Shape {
                zero_point: true,
                breaks,
                ends: pair_up(&values),
                owner,
                tail: (c, Rational::zero()),
            }
        }
        FunctionGenClass::NonIncreasing => {
            let tail = values.pop().expect("odd length");
            Shape {
                zero_point: rng.gen_bool(0.8),
                breaks,
                ends: pair_up(&values),
                owner,
                tail: (tail, tail_slope(rng)),
            }
        }
        FunctionGenClass::NonAmenable => {
            values.sort();
            let positive_zero = rng.gen_bool(0.5);
            if positive_zero {
                // Flat zero on the first piece.
                values[0] = Rational::zero();
                values[1] = Rational::zero();
            }
            let tail = values.pop().expect("odd length");
            Shape {
                zero_point: positive_zero,
                breaks,
                ends: pair_up(&values),
                owner,
                tail: (tail, tail_slope(rng)),
            }
        }
        FunctionGenClass::NonDoubling => {
            values.pop();
            let low = values.iter().min().expect("nonempty").clone();
            let tail = &low / &Rational::from_integer(3);
            // Lift one value far enough above the tail.
            let k = rng.gen_range(0..values.len());
            if values[k] <= tail.double() {
                values[k] = low;
            }
            Shape {
                zero_point: true,
                breaks,
                ends: pair_up(&values),
                owner,
                tail: (tail, Rational::zero()),
            }
        }
    };
    shape.build()
}

fn in_class(f: &TransformFunction, class: FunctionGenClass) -> bool {
    let inc = is_increasing(f).holds();
    let amen = is_amenable(f).holds();
    match class {
        FunctionGenClass::IncreasingAmenable => inc && amen,
        FunctionGenClass::IncreasingZeroAtZero => inc && f.eval_exact(&Rational::zero()).map(|v| v.is_zero()).unwrap_or(false),
        FunctionGenClass::AmenableDoubling => amen && !inc && is_doubling(f).holds(),
        FunctionGenClass::NonIncreasing => matches!(is_increasing(f), Verdict::Fails(_)),
        FunctionGenClass::NonAmenable => matches!(is_amenable(f), Verdict::Fails(_)),
        FunctionGenClass::NonDoubling => amen && matches!(is_doubling(f), Verdict::Fails(_)),
    }
}

const RETRY_CAP: usize = 64;

/// A random piecewise-affine function (at most 8 pieces) of the requested
/// class. Draws that miss the class (possible only for the unsorted shapes)
/// are redrawn from the same stream, up to a fixed cap.
pub fn gen_function(spec: &GenSpec, class: FunctionGenClass) -> Result<TransformFunction, GenError> {
    let mut rng = spec.rng();
    for _ in 0..RETRY_CAP {
        let f = shape_for(&mut rng, &spec.pool, class)?;
        if in_class(&f, class) {
            return Ok(f);
        }
        match class {
            FunctionGenClass::NonIncreasing => {}
            _ => return Err(GenError::SelfCheck(format!("function outside class {class:?}: {f:?}"))),
        }
    }
    Err(GenError::RetryCap(class, RETRY_CAP))
}
