use std::f64::consts::PI;

use isospec::geometry::*;
use isospec::reproduce::pentagon_shooting;
use num_complex::Complex64;
use proptest::prelude::*;

fn metric() -> impl Strategy<Value = (f64, f64)> {
    (0.2f64..0.95, 0.1f64..0.9).prop_map(|(b, f)| (b, b * f))
}

#[test]
fn default_block_closes_with_right_angles() {
    let g = solve_block(0.75, 0.5).unwrap();
    let r = g.report();
    assert!(r.closure_residual < 1e-9);
    assert!(r.angle_residual < 1e-9);
    assert!((g.area() - 2.0 * PI).abs() < 1e-9);
    assert!(g.angles().iter().all(|x| (x - PI / 2.0).abs() < 1e-9));
}

#[test]
fn shooting_oracle_agrees_at_default_metric() {
    let g = solve_block(0.75, 0.5).unwrap();
    let a = pentagon_shooting(0.75, 0.5).unwrap();
    assert!((g.a - a).abs() < 1e-9, "{} vs {a}", g.a);
}

#[test]
fn metric_bounds_are_enforced() {
    for (b, c) in [(0.5, 0.75), (0.5, 0.5), (1.2, 0.5), (0.5, 0.0), (0.5, -0.1)] {
        assert!(matches!(solve_block(b, c), Err(isospec::Error::Metric { .. })), "({b}, {c})");
    }
}

#[test]
fn translation_and_glide_lengths() {
    for t in [0.1, 0.5, 2.0] {
        assert!((geodesic_length(&Isometry::translation(t)).unwrap() - t).abs() < 1e-12);
        let glide = Isometry::reflection().mul(&Isometry::translation(t));
        assert!((geodesic_length(&glide).unwrap() - t).abs() < 1e-12);
    }
    assert!(geodesic_length(&Isometry::rotation(0.3)).is_err());
    assert!(geodesic_length(&Isometry::IDENTITY).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn octagon_closes(m in metric()) {
        let g = solve_block(m.0, m.1).unwrap();
        let r = g.report();
        prop_assert!(r.closure_residual < 1e-9);
        prop_assert!(r.angle_residual < 1e-9);
        prop_assert!((g.area() - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn solver_matches_shooting(m in metric()) {
        let g = solve_block(m.0, m.1).unwrap();
        let a = pentagon_shooting(m.0, m.1).unwrap();
        prop_assert!((g.a - a).abs() < 1e-9);
    }

    #[test]
    fn length_is_conjugacy_invariant(t in 0.05f64..3.0, s in -2.0f64..2.0, th in 0.0f64..6.0) {
        let h = Isometry::translation(t);
        let g = Isometry::rotation(th).mul(&Isometry::translation(s));
        let conj = g.mul(&h).mul(&g.inverse());
        prop_assert!((geodesic_length(&conj).unwrap() - t).abs() < 1e-9);
    }

    #[test]
    fn iterates_multiply_length(t in 0.05f64..1.0, k in 1u32..6, th in 0.0f64..6.0) {
        let g = Isometry::rotation(th);
        let h = g.mul(&Isometry::translation(t)).mul(&g.inverse());
        prop_assert!((geodesic_length(&h.pow(k)).unwrap() - k as f64 * t).abs() < 1e-8);
        prop_assert!((geodesic_length(&h.inverse()).unwrap() - t).abs() < 1e-9);
    }

    #[test]
    fn axis_points_move_by_the_length(t in 0.05f64..2.0, s in -1.5f64..1.5, th in 0.0f64..6.0, u in -2.0f64..2.0) {
        let g = Isometry::rotation(th).mul(&Isometry::translation(s));
        let h = g.mul(&Isometry::translation(t)).mul(&g.inverse());
        let ax = axis(&h).unwrap();
        let z = from_hyperboloid(&ax.point_at(u));
        prop_assert!((distance(z, h.apply(z)) - t).abs() < 1e-7);
    }

    #[test]
    fn hyperboloid_round_trip(x in -3.0f64..3.0, y in 0.05f64..4.0) {
        let z = Complex64::new(x, y);
        let p = to_hyperboloid(z);
        prop_assert!((minkowski(&p, &p) - 1.0).abs() < 1e-8 * p[0] * p[0]);
        let w = from_hyperboloid(&p);
        prop_assert!((w - z).norm() < 1e-9 * (1.0 + z.norm()));
    }
}
