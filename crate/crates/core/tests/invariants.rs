use std::f64::consts::{PI, TAU};

use heatsleuth_core::sampler::accept_prob;
use heatsleuth_core::shape::{
    parameter_distance, to_physical, to_unconstrained, wrap_angle_diff, ShapeKind, ShapeParams,
};
use heatsleuth_core::strategy::{
    angular_derivative, check_stop, decide_direction, move_sensor, step_size, Direction, SensorState, StopFlag,
    StrategyParams,
};
use proptest::prelude::*;

fn offset_kind() -> impl Strategy<Value = ShapeKind> {
    prop_oneof![
        Just(ShapeKind::Circle),
        Just(ShapeKind::Kite),
        Just(ShapeKind::FourLeaf)
    ]
}

fn dir() -> impl Strategy<Value = Direction> {
    prop_oneof![Just(Direction::Cw), Just(Direction::Ccw)]
}

proptest! {
    #[test]
    fn unconstrained_round_trip(kind in offset_kind(), z in prop::collection::vec(-20.0f64..20.0, 3)) {
        let xi = to_physical(&z, kind, 0).unwrap();
        let back = to_unconstrained(&xi, kind);
        let again = to_physical(&back, kind, 0).unwrap();
        for (a, b) in xi.iter().zip(&again) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{xi:?} vs {again:?}");
        }
    }

    #[test]
    fn physical_parameters_stay_in_their_boxes(kind in offset_kind(), z in prop::collection::vec(-1e3f64..1e3, 3)) {
        let xi = to_physical(&z, kind, 0).unwrap();
        prop_assert!(xi.iter().all(|v| v.is_finite()));
        prop_assert!((0.0..=1.0).contains(&xi[0]));
        prop_assert!((0.0..=TAU).contains(&xi[1]));
        prop_assert!(xi[2] >= 0.0);
    }

    #[test]
    fn radial_function_is_periodic(a0 in 0.6f64..1.2, a in prop::collection::vec(-0.1f64..0.1, 4), th in -10.0f64..10.0) {
        let xi = vec![a0, a[0], a[1], a[2], a[3]];
        let s = ShapeParams::new(ShapeKind::FourierStar, xi, 2).unwrap();
        prop_assert!((s.radial_function(th) - s.radial_function(th + TAU)).abs() < 1e-12);
    }

    #[test]
    fn boundary_is_inside_the_enclosing_radius(kind in offset_kind(), r in 0.0f64..0.5, phi in 0.0f64..TAU, x3 in 0.05f64..0.3, th in 0.0f64..TAU) {
        let s = ShapeParams::new(kind, vec![r, phi, x3], 0).unwrap();
        let [x, y] = s.boundary_point(th);
        let [cx, cy] = s.center();
        prop_assert!(((x - cx).powi(2) + (y - cy).powi(2)).sqrt() <= s.enclosing_radius() + 1e-12);
    }

    #[test]
    fn acceptance_depends_on_misfit_differences(phi in -50.0f64..50.0, dphi in -20.0f64..20.0, shift in -100.0f64..100.0) {
        let a = accept_prob(phi, phi + dphi);
        let b = accept_prob(phi + shift, phi + shift + dphi);
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
        if dphi <= 0.0 {
            prop_assert_eq!(a, 1.0);
        }
    }

    #[test]
    fn direction_flips_with_the_derivative(v in prop::array::uniform3(-5.0f64..5.0), dth in 1e-3f64..1.0) {
        let fwd = angular_derivative(v, dth);
        let rev = angular_derivative([v[2], v[1], v[0]], dth);
        prop_assert_eq!(fwd, -rev);
        if fwd != 0.0 {
            prop_assert_ne!(decide_direction(fwd), decide_direction(rev));
        }
        prop_assert_eq!(angular_derivative(v.map(|x| -x), dth), fwd);
    }

    #[test]
    fn moves_stay_on_the_circle(theta in -20.0f64..20.0, d in 0.0f64..10.0, dir in dir()) {
        let s = SensorState::new(theta);
        let m = move_sensor(&s, dir, d);
        prop_assert!((0.0..TAU).contains(&m.theta));
        let expect = wrap_angle_diff(theta + dir.sign() * d - m.theta);
        prop_assert!(expect.abs() < 1e-9);
        prop_assert_eq!(m.k, s.k + 1);
        prop_assert_eq!(m.prev_dir, Some(dir));
    }

    #[test]
    fn travel_time_is_distance_over_speed(m in 1u32..40, c1 in 0.001f64..0.2, c in 1.0f64..200.0, dir in dir(), prev in prop::option::of(dir())) {
        let p = StrategyParams { m, c1, c, ..StrategyParams::standard(PI / 10.0) };
        let t = step_size(dir, prev, &p);
        prop_assert_eq!(t.b, t.d / c);
        let full = m as f64 * c1 * PI;
        let half = (m / 2) as f64 * c1 * PI;
        let expect = if prev.is_some_and(|q| q != dir) { half } else { full };
        prop_assert_eq!(t.d, expect);
    }

    #[test]
    fn local_max_wins_over_reversal(v in prop::array::uniform3(-5.0f64..5.0), dir in dir(), prev in prop::option::of(dir())) {
        let flag = check_stop(v, dir, prev);
        let peak = v[1].abs() > v[0].abs() && v[1].abs() > v[2].abs();
        if peak {
            prop_assert_eq!(flag, StopFlag::LocalMax);
        } else if prev.is_some_and(|q| q != dir) {
            prop_assert_eq!(flag, StopFlag::Reversal);
        } else {
            prop_assert_eq!(flag, StopFlag::Continue);
        }
    }

    #[test]
    fn distance_ignores_full_turns(a in prop::collection::vec(-3.0f64..3.0, 3), k in -3i32..3) {
        let mut b = a.clone();
        b[1] += TAU * k as f64;
        prop_assert!(parameter_distance(&a, &b, ShapeKind::Circle) < 1e-9);
    }
}
