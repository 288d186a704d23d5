use proptest::prelude::*;

use umetric_core::format::{function_to_json, parse_function};
use umetric_core::{classify_function, is_amenable, is_doubling, is_increasing, Piece, Rational, TransformFunction, Verdict};

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

/// How a breakpoint is owned.
#[derive(Debug, Clone, Copy)]
enum Join {
    Left,
    Right,
    Point(i64),
}

#[derive(Debug, Clone)]
struct Blueprint {
    zero_point: Option<i64>,
    /// (width, left value, right value, join at the right end), in quarters.
    pieces: Vec<(i64, i64, i64, Join)>,
    tail_value: i64,
    tail_slope: Rational,
}

fn build(b: &Blueprint) -> TransformFunction {
    let mut out = Vec::new();
    let mut start = Rational::zero();
    let mut closed = true;
    if let Some(v) = b.zero_point {
        out.push(Piece::point(Rational::zero(), q(v, 4)));
        closed = false;
    }
    for &(w, vl, vr, join) in &b.pieces {
        let end = &start + &q(w, 4);
        let slope = (q(vr, 4) - q(vl, 4)) / q(w, 4);
        let intercept = q(vl, 4) - &slope * &start;
        out.push(Piece::new(
            start.clone(),
            Some(end.clone()),
            closed,
            matches!(join, Join::Left),
            slope,
            intercept,
        ));
        closed = matches!(join, Join::Right);
        if let Join::Point(v) = join {
            out.push(Piece::point(end.clone(), q(v, 4)));
        }
        start = end;
    }
    let intercept = q(b.tail_value, 4) - &b.tail_slope * &start;
    out.push(Piece::new(start, None, closed, false, b.tail_slope.clone(), intercept));
    TransformFunction::piecewise(out).expect("blueprint is a valid function")
}

fn level() -> impl Strategy<Value = i64> {
    prop_oneof![Just(0i64), 0i64..=12]
}

fn join() -> impl Strategy<Value = Join> {
    prop_oneof![Just(Join::Left), Just(Join::Right), level().prop_map(Join::Point)]
}

fn blueprint() -> impl Strategy<Value = Blueprint> {
    (
        proptest::option::of(level()),
        proptest::collection::vec((1i64..=4, level(), level(), join()), 0..=4),
        level(),
        prop_oneof![Just(int(0)), Just(q(1, 2)), Just(int(1)), Just(int(2))],
    )
        .prop_map(|(zero_point, pieces, tail_value, tail_slope)| Blueprint {
            zero_point,
            pieces,
            tail_value,
            tail_slope,
        })
}

/// Sample points: every attained endpoint, interior points, and points
/// approaching each endpoint from inside to within 2^-24.
fn grid(f: &TransformFunction) -> Vec<(Rational, Rational)> {
    let mut ts = Vec::new();
    for p in f.pieces().expect("piecewise") {
        if p.is_degenerate() {
            ts.push(p.from.clone());
            continue;
        }
        if p.from_closed {
            ts.push(p.from.clone());
        }
        for k in 3..=24 {
            ts.push(&p.from + &q(1, 1 << k));
        }
        match &p.to {
            Some(to) => {
                if p.to_closed {
                    ts.push(to.clone());
                }
                let w = to - &p.from;
                for j in 1..8 {
                    ts.push(&p.from + &(&w * &q(j, 8)));
                }
                for k in 3..=24 {
                    ts.push(to - &q(1, 1 << k));
                }
            }
            None => {
                for j in [1, 2, 3, 5, 8, 13, 1000] {
                    ts.push(&p.from + &int(j));
                }
            }
        }
    }
    ts.sort();
    ts.dedup();
    ts.into_iter()
        .map(|t| {
            let v = f.eval_exact(&t).unwrap();
            (t, v)
        })
        .collect()
}

fn grid_increasing(g: &[(Rational, Rational)]) -> bool {
    g.windows(2).all(|w| w[0].1 <= w[1].1)
}

fn grid_amenable(g: &[(Rational, Rational)]) -> bool {
    g.iter().all(|(t, v)| t.is_zero() == v.is_zero())
}

fn grid_doubling(g: &[(Rational, Rational)]) -> bool {
    let mut top = Rational::zero();
    for (_, v) in g {
        top = top.max(v.clone());
        if top > v.double() {
            return false;
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3_000))]

    #[test]
    fn increasing_matches_grid(b in blueprint()) {
        let f = build(&b);
        let g = grid(&f);
        let v = is_increasing(&f);
        prop_assert_eq!(v.holds(), grid_increasing(&g), "{:?}", f);
        if let Verdict::Fails((a, c)) = v {
            prop_assert!(a < c);
            prop_assert!(f.eval_exact(&a).unwrap() > f.eval_exact(&c).unwrap());
        }
    }

    #[test]
    fn amenable_matches_grid(b in blueprint()) {
        let f = build(&b);
        let g = grid(&f);
        let v = is_amenable(&f);
        prop_assert_eq!(v.holds(), grid_amenable(&g), "{:?}", f);
        if let Verdict::Fails(t) = v {
            let ft = f.eval_exact(&t).unwrap();
            if t.is_zero() {
                prop_assert!(!ft.is_zero());
            } else {
                prop_assert!(ft.is_zero());
            }
        }
    }

    #[test]
    fn doubling_matches_grid(b in blueprint()) {
        let f = build(&b);
        let g = grid(&f);
        let v = is_doubling(&f);
        prop_assert_eq!(v.holds(), grid_doubling(&g), "{:?}", f);
        if let Verdict::Fails((a, c)) = v {
            prop_assert!(a <= c);
            prop_assert!(f.eval_exact(&a).unwrap() > f.eval_exact(&c).unwrap().double());
        }
    }

    #[test]
    fn classes_follow_primitives(b in blueprint()) {
        let f = build(&b);
        let c = classify_function(&f);
        let zero = f.eval_exact(&Rational::zero()).unwrap().is_zero();
        prop_assert_eq!(c.zero_at_zero, zero);
        prop_assert_eq!(c.pseudoultrametric_preserving, c.increasing.holds() && zero);
        prop_assert_eq!(c.semimetric_preserving, c.amenable.holds());
        prop_assert_eq!(c.ultrametric_preserving, c.amenable.holds() && c.increasing.holds());
        prop_assert_eq!(c.ultrametric_metric_preserving, c.amenable.holds() && c.doubling.holds());
        // Increasing functions double trivially.
        if c.increasing.holds() {
            prop_assert!(c.doubling.holds());
        }
    }

    #[test]
    fn function_json_round_trip(b in blueprint()) {
        let f = build(&b);
        prop_assert_eq!(parse_function(&function_to_json(&f)).unwrap(), f);
    }
}

#[test]
fn named_functions() {
    for (a, b) in [(1, 3), (2, 1), (4, 2), (4, 1), (9, 2), (3, 7)] {
        let f = TransformFunction::fab(int(a), int(b)).unwrap();
        let c = classify_function(&f);
        assert!(c.amenable.holds());
        assert_eq!(c.increasing.holds(), 2 * b >= a, "f_{{{a},{b}}}");
        assert_eq!(c.doubling.holds(), 4 * b >= a, "f_{{{a},{b}}}");
    }
    let cap = classify_function(&TransformFunction::cap(int(2)).unwrap());
    assert!(cap.ultrametric_preserving && cap.ultrametric_metric_preserving);
    let th = classify_function(&TransformFunction::threshold(int(2)).unwrap());
    assert!(th.pseudoultrametric_preserving && !th.semimetric_preserving);
    assert_eq!(th.amenable, Verdict::Fails(int(1)));
    for alpha in [q(1, 3), q(1, 2), int(1), q(3, 2), int(7)] {
        let c = classify_function(&TransformFunction::power(alpha).unwrap());
        assert!(c.ultrametric_preserving && c.ultrametric_metric_preserving && c.pseudoultrametric_preserving);
    }
}

#[test]
fn hand_built_edge_cases() {
    // Jump down at a point piece between two flat pieces.
    let f = TransformFunction::piecewise(vec![
        Piece::new(int(0), Some(int(1)), true, false, int(1), int(0)),
        Piece::point(int(1), q(1, 4)),
        Piece::constant(int(1), None, false, false, int(1)),
    ])
    .unwrap();
    let Verdict::Fails((a, b)) = is_increasing(&f) else {
        panic!("not increasing")
    };
    assert_eq!(b, int(1));
    assert!(a < b && f.eval_exact(&a).unwrap() > q(1, 4));
    let Verdict::Fails((a, b)) = is_doubling(&f) else {
        panic!("not doubling")
    };
    assert_eq!(b, int(1));
    assert!(f.eval_exact(&a).unwrap() > q(1, 2));

    // Decreasing ramp that stays within a factor of two.
    let f = TransformFunction::piecewise(vec![
        Piece::point(int(0), int(0)),
        Piece::new(int(0), Some(int(1)), false, true, int(-1), int(2)),
        Piece::constant(int(1), None, false, false, int(1)),
    ])
    .unwrap();
    assert!(!is_increasing(&f).holds());
    assert!(is_doubling(&f).holds());
    assert!(is_amenable(&f).holds());
}
