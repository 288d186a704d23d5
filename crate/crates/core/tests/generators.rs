use umetric_core::format::{function_to_json, matrix_to_json};
use umetric_core::generators::{
    gen_function, gen_metric, gen_pseudoultrametric, gen_ultrametric, generate, FunctionGenClass, GenClass, GenError, GenSpec, ValuePool,
};
use umetric_core::{Dissimilarity, Rational, TransformFunction};

const SAMPLES: u64 = 1000;

/// Axioms checked by direct loops, independent of the library classifier.
#[derive(Debug, PartialEq)]
struct Naive {
    pseudometric: bool,
    pseudoultrametric: bool,
    identity: bool,
}

fn naive(d: &Dissimilarity) -> Naive {
    let n = d.n();
    let mut out = Naive {
        pseudometric: true,
        pseudoultrametric: true,
        identity: true,
    };
    for x in 0..n {
        if !d.get(x, x).is_zero() {
            out.pseudometric = false;
            out.pseudoultrametric = false;
        }
        for y in 0..n {
            if x != y && d.get(x, y).is_zero() {
                out.identity = false;
            }
            if d.get(x, y) != d.get(y, x) {
                out.pseudometric = false;
                out.pseudoultrametric = false;
            }
            for z in 0..n {
                let (s, l, r) = (d.get(x, y), d.get(x, z), d.get(z, y));
                if *s > l + r {
                    out.pseudometric = false;
                }
                if s > l.max(r) {
                    out.pseudoultrametric = false;
                }
            }
        }
    }
    out
}

fn n_of(seed: u64) -> usize {
    1 + (seed % 12) as usize
}

fn in_pool(d: &Dissimilarity, pool: ValuePool) -> bool {
    let den = Rational::from_integer(pool.denominator as i64);
    let max = Rational::from_integer(pool.max as i64);
    d.positive_values().iter().all(|v| (v * &den).is_integer() && *v <= max)
}

#[test]
fn ultrametrics() {
    for seed in 0..SAMPLES {
        let spec = GenSpec::new(seed, n_of(seed), GenClass::Ultrametric);
        let d = gen_ultrametric(&spec).unwrap();
        let c = naive(&d);
        assert_eq!(d.n(), spec.n);
        assert!(c.pseudoultrametric && c.identity, "seed {seed}");
        assert!(in_pool(&d, spec.pool));
    }
}

#[test]
fn metrics() {
    let mut non_ultra = 0;
    for seed in 0..SAMPLES {
        let embed = seed % 3 == 0 && n_of(seed) >= 3;
        let spec = GenSpec::new(seed, n_of(seed), GenClass::Metric { embed_345: embed });
        let g = gen_metric(&spec, embed).unwrap();
        let c = naive(&g.space);
        assert!(c.pseudometric && c.identity, "seed {seed}");
        assert_eq!(g.ultrametric, c.pseudoultrametric, "seed {seed}");
        if embed {
            let three = |v: i64| Rational::from_integer(v);
            assert_eq!(
                [g.space.get(0, 1), g.space.get(0, 2), g.space.get(1, 2)],
                [&three(3), &three(4), &three(5)]
            );
        }
        non_ultra += usize::from(!g.ultrametric);
    }
    assert!(non_ultra > SAMPLES as usize / 2);
}

#[test]
fn pseudoultrametrics() {
    for seed in 0..SAMPLES {
        let n = n_of(seed);
        let z = Rational::new((seed % 5) as i64, 4);
        let spec = GenSpec::new(seed, n, GenClass::Pseudoultrametric { zero_pairs: z.clone() });
        let d = gen_pseudoultrametric(&spec, &z).unwrap();
        let c = naive(&d);
        assert!(c.pseudoultrametric, "seed {seed}");
        assert_eq!(c.identity, z.is_zero() || n == 1, "seed {seed}");
    }
}

fn grid(f: &TransformFunction) -> Vec<(Rational, Rational)> {
    (0..=240)
        .map(|k| {
            let t = Rational::new(k, 16);
            let v = f.eval_exact(&t).unwrap();
            (t, v)
        })
        .collect()
}

#[test]
fn functions() {
    use FunctionGenClass::*;
    for class in [
        IncreasingAmenable,
        IncreasingZeroAtZero,
        AmenableDoubling,
        NonIncreasing,
        NonAmenable,
        NonDoubling,
    ] {
        for seed in 0..SAMPLES {
            let f = gen_function(&GenSpec::new(seed, 1, GenClass::Function { class }), class).unwrap();
            let pieces = f.pieces().unwrap();
            assert!(pieces.len() <= 8, "{class:?} seed {seed}");
            let g = grid(&f);
            let increasing_on_grid = g.windows(2).all(|w| w[0].1 <= w[1].1);
            let positive_on_grid = g.iter().all(|(t, v)| t.is_zero() || v.is_positive());
            let zero_at_zero = g[0].1.is_zero();
            match class {
                IncreasingAmenable => assert!(increasing_on_grid && positive_on_grid && zero_at_zero),
                IncreasingZeroAtZero => assert!(increasing_on_grid && zero_at_zero),
                AmenableDoubling => {
                    assert!(positive_on_grid && zero_at_zero);
                    let top = g.iter().map(|(_, v)| v).max().unwrap();
                    assert!(g[1..].iter().all(|(_, v)| *top <= v.double()), "{class:?} seed {seed}");
                }
                NonIncreasing | NonAmenable | NonDoubling => {}
            }
        }
    }
}

#[test]
fn reproducible_bytes() {
    let classes = [
        GenClass::Ultrametric,
        GenClass::Metric { embed_345: true },
        GenClass::Pseudoultrametric {
            zero_pairs: Rational::new(1, 2),
        },
        GenClass::Function {
            class: FunctionGenClass::NonDoubling,
        },
    ];
    for class in classes {
        for seed in [0u64, 7, u64::MAX] {
            let spec = GenSpec::new(seed, 9, class.clone());
            let a = serde_json::to_string(&generate(&spec).unwrap()).unwrap();
            let b = serde_json::to_string(&generate(&spec).unwrap()).unwrap();
            assert_eq!(a, b);
        }
    }
    let spec = GenSpec::new(42, 6, GenClass::Ultrametric);
    let a = matrix_to_json(&gen_ultrametric(&spec).unwrap());
    assert_eq!(a, matrix_to_json(&gen_ultrametric(&spec.clone()).unwrap()));
    let other = matrix_to_json(&gen_ultrametric(&GenSpec::new(43, 6, GenClass::Ultrametric)).unwrap());
    assert_ne!(a, other);
    let class = FunctionGenClass::AmenableDoubling;
    let f = |seed| function_to_json(&gen_function(&GenSpec::new(seed, 1, GenClass::Function { class }), class).unwrap());
    assert_eq!(f(5), f(5));
}

#[test]
fn parameter_errors() {
    let mut spec = GenSpec::new(1, 12, GenClass::Ultrametric);
    spec.pool = ValuePool { max: 1, denominator: 1 };
    assert!(matches!(gen_ultrametric(&spec), Err(GenError::PoolTooSmall { .. })));
    assert!(matches!(
        gen_metric(&GenSpec::new(1, 2, GenClass::Metric { embed_345: true }), true),
        Err(GenError::Parameter(_))
    ));
    let z = Rational::new(3, 2);
    assert!(matches!(
        gen_pseudoultrametric(&GenSpec::new(1, 4, GenClass::Pseudoultrametric { zero_pairs: z.clone() }), &z),
        Err(GenError::Parameter(_))
    ));
}
