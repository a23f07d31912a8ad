use ide_flows::stepfn::{
    decimal_string, format_q, integral_of_product, parse_q, q, ratio, rational_gcd, PiecewiseLinear, StepFunction, Q,
};
use proptest::prelude::*;

fn step(pieces: &[(i64, i64)]) -> StepFunction {
    StepFunction::from_pieces(pieces.iter().map(|&(b, v)| (q(b), q(v))))
}

fn pts(p: &[(i64, i64)]) -> Vec<(Q, Q)> {
    p.iter().map(|&(a, b)| (q(a), q(b))).collect()
}

#[test]
fn indicator_integrates_to_ramp() {
    let f = StepFunction::indicator(q(0), q(1), q(3));
    let g = f.integrate();
    assert_eq!(g.eval(&q(-1)), q(0));
    assert_eq!(g.eval(&ratio(1, 2)), ratio(3, 2));
    assert_eq!(g.eval(&q(1)), q(3));
    assert_eq!(g.eval(&q(10)), q(3));
    assert_eq!(f.integral(&q(0), &q(1)), q(3));
}

#[test]
fn step_is_right_continuous() {
    let f = step(&[(0, 2), (1, 5), (3, 0)]);
    assert_eq!(f.eval(&q(1)), q(5));
    assert_eq!(f.eval_left(&q(1)), q(2));
    assert_eq!(f.eval(&q(3)), q(0));
    assert_eq!(f.eval(&q(-1)), q(0));
    assert_eq!(f.support_end(), Some(q(3)));
}

#[test]
fn canonical_form_merges_equal_pieces() {
    let f = StepFunction::new(vec![q(0), q(1), q(2), q(3)], vec![q(0), q(2), q(2), q(0)]).unwrap();
    assert_eq!(f.breakpoints(), &[q(1), q(3)]);
    assert!(StepFunction::new(vec![q(1), q(1)], vec![q(1), q(0)]).is_err());
    assert!(StepFunction::new(vec![q(1)], vec![]).is_err());
}

#[test]
fn shifts_move_breakpoints() {
    let f = StepFunction::indicator(q(0), q(1), q(1));
    let g = f.shift(&q(2));
    assert_eq!(g.eval(&ratio(5, 2)), q(1));
    assert_eq!(g.eval(&ratio(1, 2)), q(0));
    let p = PiecewiseLinear::from_points(&pts(&[(0, 0), (1, 1)]), q(0));
    let ps = p.shift(&q(-1));
    assert_eq!(ps.eval(&q(0)), q(1));
    assert_eq!(ps.eval(&q(-1)), q(0));
}

#[test]
fn min_inserts_crossing() {
    let a = PiecewiseLinear::from_parts(vec![q(0)], vec![q(0)], vec![q(1)]).unwrap();
    let b = PiecewiseLinear::from_parts(vec![q(0)], vec![q(2)], vec![q(-1)]).unwrap();
    let m = a.min(&b);
    assert!(m.breakpoints().contains(&q(1)));
    assert_eq!(m.eval(&q(1)), q(1));
    assert_eq!(m.eval(&q(3)), q(-1));
    assert_eq!(m.eval(&ratio(1, 2)), ratio(1, 2));
    let mx = a.max(&b);
    assert_eq!(mx.eval(&q(0)), q(2));
    assert_eq!(mx.eval(&q(3)), q(3));
}

#[test]
fn first_root_of_decreasing_line() {
    let f = PiecewiseLinear::from_points(&pts(&[(4, 2), (6, 0)]), q(0));
    assert_eq!(f.first_root_at_or_after(&q(4), None), Some(q(6)));
    assert_eq!(f.first_root_at_or_after(&q(7), None), Some(q(7)));
    assert_eq!(f.first_root_at_or_after(&q(0), Some(&q(5))), None);
    let never = PiecewiseLinear::constant(q(1));
    assert_eq!(never.first_root_at_or_after(&q(0), None), None);
}

#[test]
fn pwl_rejects_discontinuity() {
    assert!(PiecewiseLinear::from_parts(vec![q(0), q(1)], vec![q(0), q(2)], vec![q(1), q(0)]).is_err());
    assert!(PiecewiseLinear::from_parts(vec![], vec![], vec![]).is_err());
}

#[test]
fn pwl_integral_and_product() {
    let g = PiecewiseLinear::from_points(&pts(&[(0, 0), (2, 2)]), q(0));
    assert_eq!(g.integral(&q(0), &q(2)), q(2));
    assert_eq!(g.integral(&q(0), &q(3)), q(4));
    let f = StepFunction::indicator(q(1), q(3), q(2));
    // ∫_1^3 2·g = 2·(∫_1^2 θ dθ + 2) = 2·(3/2 + 2)
    assert_eq!(integral_of_product(&g, &f, &q(0), &q(5)), q(7));
}

#[test]
fn moments_and_extrema() {
    let f = step(&[(0, 1), (2, -1), (3, 0)]);
    assert_eq!(f.moment(), Some(ratio(-1, 2)));
    assert_eq!(f.max_value(), q(1));
    assert_eq!(f.min_value(), q(-1));
    assert!(!f.is_nonnegative());
    assert_eq!(step(&[(0, 1)]).moment(), None);
}

#[test]
fn rational_literals() {
    assert_eq!(parse_q("1/2").unwrap(), ratio(1, 2));
    assert_eq!(parse_q("-0.25").unwrap(), ratio(-1, 4));
    assert_eq!(parse_q(" 7 ").unwrap(), q(7));
    assert!(parse_q("1/0").is_err());
    assert!(parse_q("abc").is_err());
    assert_eq!(format_q(&ratio(6, 4)), "3/2");
    assert_eq!(format_q(&q(-3)), "-3");
    assert_eq!(decimal_string(&ratio(1, 3), 4), "0.3333");
    assert_eq!(decimal_string(&ratio(-5, 2), 0), "-3");
    assert_eq!(rational_gcd(&ratio(1, 2), &ratio(1, 3)), ratio(1, 6));
    assert_eq!(rational_gcd(&q(4), &q(6)), q(2));
}

#[test]
fn serde_roundtrip_uses_strings() {
    let f = StepFunction::indicator(ratio(1, 3), q(2), ratio(5, 7));
    let s = serde_json::to_string(&f).unwrap();
    assert!(s.contains("\"1/3\""));
    let back: StepFunction = serde_json::from_str(&s).unwrap();
    assert_eq!(back, f);
    assert!(serde_json::from_str::<StepFunction>(r#"{"breakpoints":["1","0"],"values":["1","0"]}"#).is_err());
}

fn arb_q() -> impl Strategy<Value = Q> {
    (-40i64..40, 1i64..6).prop_map(|(n, d)| ratio(n, d))
}

fn arb_step() -> impl Strategy<Value = StepFunction> {
    prop::collection::vec((1i64..8, -4i64..5), 0..6).prop_map(|v| {
        let mut t = q(-3);
        StepFunction::from_pieces(v.into_iter().map(|(dt, val)| {
            t += ratio(dt, 2);
            (t.clone(), q(val))
        }))
    })
}

fn arb_pwl() -> impl Strategy<Value = PiecewiseLinear> {
    (prop::collection::vec((1i64..8, -6i64..7), 1..6), -3i64..4).prop_map(|(v, tail)| {
        let mut t = q(-3);
        let points: Vec<(Q, Q)> = v
            .into_iter()
            .map(|(dt, y)| {
                t += ratio(dt, 2);
                (t.clone(), ratio(y, 2))
            })
            .collect();
        PiecewiseLinear::from_points(&points, q(tail))
    })
}

proptest! {
    #[test]
    fn add_then_sub_is_identity(f in arb_step(), g in arb_step(), t in arb_q()) {
        prop_assert_eq!(f.add(&g).sub(&g), f.clone());
        prop_assert_eq!(f.add(&g).eval(&t), f.eval(&t) + g.eval(&t));
    }

    #[test]
    fn integral_is_additive(f in arb_step(), a in arb_q(), b in arb_q(), c in arb_q()) {
        prop_assert_eq!(f.integral(&a, &b) + f.integral(&b, &c), f.integral(&a, &c));
        let anti = f.integrate();
        prop_assert_eq!(anti.eval(&b) - anti.eval(&a), f.integral(&a, &b));
    }

    #[test]
    fn derivative_inverts_integrate(f in arb_step()) {
        prop_assert_eq!(f.integrate().derivative(), f);
    }

    #[test]
    fn shift_composes(f in arb_step(), d1 in arb_q(), d2 in arb_q(), t in arb_q()) {
        prop_assert_eq!(f.shift(&d1).shift(&d2), f.shift(&(&d1 + &d2)));
        prop_assert_eq!(f.shift(&d1).eval(&t), f.eval(&(&t - &d1)));
    }

    #[test]
    fn pwl_min_max_pointwise(a in arb_pwl(), b in arb_pwl(), t in arb_q()) {
        let (x, y) = (a.eval(&t), b.eval(&t));
        prop_assert_eq!(a.min(&b).eval(&t), x.clone().min(y.clone()));
        prop_assert_eq!(a.max(&b).eval(&t), x.max(y));
        prop_assert_eq!(a.add(&b).sub(&b), a.clone());
    }

    #[test]
    fn pwl_shift_evaluates(a in arb_pwl(), d in arb_q(), t in arb_q()) {
        prop_assert_eq!(a.shift(&d).eval(&t), a.eval(&(&t - &d)));
    }

    #[test]
    fn pwl_integral_matches_derivative(a in arb_pwl(), l in arb_q(), r in arb_q()) {
        let (l, r) = if l <= r { (l, r) } else { (r, l) };
        let d = a.derivative();
        prop_assert_eq!(a.eval(&r) - a.eval(&l), d.integral(&l, &r));
        prop_assert!(a.integral(&l, &r) >= a.min_on(&l, &r) * (&r - &l));
    }

    #[test]
    fn first_root_is_a_root(a in arb_pwl(), t0 in arb_q()) {
        if let Some(r) = a.first_root_at_or_after(&t0, Some(&q(40))) {
            prop_assert!(r >= t0);
            prop_assert_eq!(a.eval(&r), q(0));
        }
    }

    #[test]
    fn serde_roundtrips(f in arb_step(), p in arb_pwl()) {
        let sf: StepFunction = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(sf, f);
        let sp: PiecewiseLinear = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        prop_assert_eq!(sp, p);
    }

    #[test]
    fn format_parse_roundtrip(x in arb_q()) {
        prop_assert_eq!(parse_q(&format_q(&x)).unwrap(), x);
    }
}
