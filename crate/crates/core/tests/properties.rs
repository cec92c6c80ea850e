//! Property tests for the library's structural invariants.

use asymlab::geometry::{hyp_distance, mobius_fix_ideal, IdealPoint, Model, Point};
use asymlab::operators::OperatorSpec;
use asymlab::profiles::singular_profile;
use proptest::prelude::*;

fn ball_point(x: f64, y: f64) -> Point {
    let n = (x * x + y * y).sqrt();
    let (x, y) = if n >= 0.9 { (0.89 * x / n, 0.89 * y / n) } else { (x, y) };
    Point::new(vec![x, y], Model::new(2, 1.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn p_laplacian_inversion_round_trips(p in 1.2f64..5.0, t in 0.0f64..50.0) {
        let spec = OperatorSpec::p_laplacian(p).unwrap();
        let s = spec.invert_a(t, 1e-12).unwrap();
        let back = spec.a(s);
        prop_assert!((back - t).abs() <= 1e-11 * t.max(1.0), "t = {t}, back = {back}");
    }

    #[test]
    fn minimal_graph_inversion_round_trips(frac in 0.0f64..0.99) {
        let spec = OperatorSpec::minimal_graph();
        let t = frac * spec.k0();
        let s = spec.invert_a(t, 1e-12).unwrap();
        prop_assert!((spec.a(s) - t).abs() <= 1e-11);
    }

    #[test]
    fn flux_is_order_preserving(p in 1.2f64..5.0, s1 in 1e-6f64..30.0, ds in 1e-6f64..5.0) {
        let spec = OperatorSpec::p_laplacian(p).unwrap();
        prop_assert!(spec.a(s1) < spec.a(s1 + ds));
        let mg = OperatorSpec::minimal_graph();
        prop_assert!(mg.a(s1) < mg.a(s1 + ds));
    }

    #[test]
    fn hyp_distance_is_symmetric_and_triangular(
        ax in -0.8f64..0.8, ay in -0.8f64..0.8,
        bx in -0.8f64..0.8, by in -0.8f64..0.8,
        cx in -0.8f64..0.8, cy in -0.8f64..0.8,
    ) {
        let (a, b, c) = (ball_point(ax, ay), ball_point(bx, by), ball_point(cx, cy));
        let ab = hyp_distance(&a, &b).unwrap();
        let ba = hyp_distance(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        let bc = hyp_distance(&b, &c).unwrap();
        let ac = hyp_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn axis_translations_compose_additively(
        angle in 0.0f64..std::f64::consts::TAU,
        s1 in -2.0f64..2.0,
        s2 in -2.0f64..2.0,
        px in -0.6f64..0.6,
        py in -0.6f64..0.6,
    ) {
        let model = Model::new(2, 1.0);
        let xi = IdealPoint::from_angle(angle, 2);
        let t1 = mobius_fix_ideal(&xi, s1, model);
        let t2 = mobius_fix_ideal(&xi, s2, model);
        let t12 = mobius_fix_ideal(&xi, s1 + s2, model);
        let x = ball_point(px, py);
        let via = t1.compose(&t2).apply(&x);
        let direct = t12.apply(&x);
        let drift: f64 = via
            .coords()
            .iter()
            .zip(direct.coords())
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt();
        prop_assert!(drift < 1e-10, "group law drift {drift}");
    }

    #[test]
    fn singular_profile_interpolation_stays_monotone(p in 1.5f64..4.0, shift in -2.0f64..0.5) {
        let spec = OperatorSpec::p_laplacian(p).unwrap();
        let g0 = singular_profile(&spec, 2, (shift - 2.0, shift + 1.0), 1e-9, 65).unwrap();
        let grid = g0.grid();
        let mut prev = g0.eval(grid[0]).unwrap();
        for k in 1..=120 {
            let d = grid[0] + (grid[grid.len() - 1] - grid[0]) * k as f64 / 120.0;
            let v = g0.eval(d).unwrap();
            prop_assert!(v >= prev - 1e-14, "interpolant must be monotone");
            prev = v;
        }
    }
}
