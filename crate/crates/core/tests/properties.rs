//! Property tests for the geometric primitives and exact polynomial ring.

use nalgebra::Vector3;
use proptest::prelude::*;
use rectify_core::geom::{
    circle_from_sphere_pair, circle_through_points, mobius_inner, power_of_point, scale_sphere,
    translate_sphere, CircleOrLine, Inversion, SphereEq, SphereGeometry,
};
use rectify_core::poly::{fundamental_factor, poly_divrem, rational, BivarPoly};

type Vec3 = Vector3<f64>;

fn coord() -> impl Strategy<Value = f64> {
    -3.0..3.0
}

fn point() -> impl Strategy<Value = Vec3> {
    (coord(), coord(), coord()).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn inversion() -> impl Strategy<Value = Inversion> {
    (point(), 0.2..2.5f64).prop_map(|(c, r)| Inversion::new(c, r).unwrap())
}

fn real_sphere() -> impl Strategy<Value = SphereEq> {
    (point(), 0.3..2.0f64).prop_map(|(c, r)| SphereEq::from_center_radius(c, r).unwrap())
}

fn any_surface() -> impl Strategy<Value = SphereEq> {
    prop_oneof![
        real_sphere(),
        (point(), -2.0..2.0f64).prop_filter_map("nonzero normal", |(n, d)| {
            (n.norm() > 0.1).then(|| SphereEq::plane(n.normalize(), d))
        }),
    ]
}

proptest! {
    /// Inversion is involutive away from its center.
    #[test]
    fn inversion_involution(inv in inversion(), x in point()) {
        let d = (x - inv.center).norm();
        prop_assume!(d > 1e-3 * inv.radius && d < 1e3 * inv.radius);
        let back = inv.apply(inv.apply(x).unwrap()).unwrap();
        prop_assert!((back - x).norm() < 1e-10 * (1.0 + x.norm()));
    }

    /// Orthogonal surfaces stay orthogonal under inversion.
    #[test]
    fn inversion_preserves_orthogonality(inv in inversion(), s in real_sphere(), n in point()) {
        prop_assume!(n.norm() > 0.1);
        // Build a surface orthogonal to s by adjusting the plane offset:
        // ⟨plane, s⟩ = n·b_s − 2·d·a_s, solvable for d.
        let normal = n.normalize();
        let offset = normal.dot(&s.b) / (2.0 * s.a);
        let t = SphereEq::plane(normal, offset);
        prop_assert!(mobius_inner(&s, &t).abs() < 1e-9);
        let si = inv.apply_sphere(&s).normalized();
        let ti = inv.apply_sphere(&t).normalized();
        prop_assert!(mobius_inner(&si, &ti).abs() < 1e-9);
    }

    /// Classification is invariant under projective rescaling.
    #[test]
    fn geometry_projectively_sound(s in any_surface(), scale in prop_oneof![-4.0..-0.1f64, 0.1..4.0f64]) {
        let t = SphereEq::new(scale * s.a, scale * s.b, scale * s.c);
        prop_assert_eq!(
            std::mem::discriminant(&s.geometry()),
            std::mem::discriminant(&t.geometry())
        );
    }

    /// Three sampled points of a sphere-pair intersection rebuild the same
    /// circle.
    #[test]
    fn pair_circle_matches_three_point_circle(
        c1 in point(),
        dir in point(),
        frac in 0.2..0.9f64,
        r1 in 0.5..2.0f64,
        r2 in 0.5..2.0f64,
    ) {
        prop_assume!(dir.norm() > 0.1);
        // Place the second center so the spheres genuinely overlap.
        let gap = (r1 - r2).abs() + frac * ((r1 + r2) - (r1 - r2).abs());
        let c2 = c1 + gap * dir.normalize();
        prop_assume!(gap > 1.05 * (r1 - r2).abs() && gap < 0.95 * (r1 + r2));
        let s1 = SphereEq::from_center_radius(c1, r1).unwrap();
        let s2 = SphereEq::from_center_radius(c2, r2).unwrap();
        let circle = circle_from_sphere_pair(&s1, &s2).unwrap();
        let pts = circle.sample_points(3, 1.0);
        let rebuilt = circle_through_points(pts[0], pts[1], pts[2]).unwrap();
        for p in rebuilt.sample_points(8, 1.0) {
            prop_assert!(circle.distance_to(p) < 1e-10 * (1.0 + p.norm()));
        }
    }

    /// The power of a point is the normalized equation value, exactly.
    #[test]
    fn power_is_normalized_eval(s in real_sphere(), x in point()) {
        let p = power_of_point(&s, x).unwrap();
        prop_assert_eq!(p, s.eval(x) / s.a);
    }

    /// Sphere classification agrees with geometric membership: sampled
    /// points of a real sphere's great circle satisfy the equation.
    #[test]
    fn real_sphere_geometry_round_trip(c in point(), r in 0.3..2.0f64) {
        let s = SphereEq::from_center_radius(c, r).unwrap();
        match s.geometry() {
            SphereGeometry::RealSphere { center, radius } => {
                prop_assert!((center - c).norm() < 1e-12 * (1.0 + c.norm()));
                prop_assert!((radius - r).abs() < 1e-12 * r);
            }
            g => prop_assert!(false, "expected real sphere, got {:?}", g),
        }
        let circle = CircleOrLine::circle(c, r, Vec3::new(0.0, 0.0, 1.0));
        for p in circle.sample_points(6, 1.0) {
            prop_assert!(s.eval(p).abs() < 1e-10 * (1.0 + p.norm_squared()));
        }
    }

    /// Möbius conjugation of the inner product rescales it positively.
    #[test]
    fn mobius_form_scales_positively(inv in inversion(), s in any_surface(), t in any_surface(), shift in point(), scale in 0.2..3.0f64) {
        let pair = |a: &SphereEq, b: &SphereEq| mobius_inner(&a.normalized(), &b.normalized());
        let before = pair(&s, &t);
        let map = |eq: &SphereEq| {
            let eq = translate_sphere(eq, shift);
            let eq = scale_sphere(&eq, scale);
            inv.apply_sphere(&eq)
        };
        let after = pair(&map(&s), &map(&t));
        // Signs agree (zero stays zero within tolerance).
        if before.abs() > 1e-9 {
            prop_assert!(before.signum() == after.signum(), "{} vs {}", before, after);
        } else {
            prop_assert!(after.abs() < 1e-7);
        }
    }
}

fn small_poly() -> impl Strategy<Value = BivarPoly> {
    proptest::collection::vec((0u32..4, 0u32..4, -9i64..=9, 1i64..=9), 0..6).prop_map(|terms| {
        let mut p = BivarPoly::zero();
        for (i, j, num, den) in terms {
            p = &p + &BivarPoly::monomial(i, j, rational(num, den));
        }
        p
    })
}

proptest! {
    /// Division with remainder reconstructs the dividend exactly.
    #[test]
    fn divrem_reconstructs(p in small_poly()) {
        let f = fundamental_factor();
        let (q, r) = poly_divrem(&p, &f).unwrap();
        prop_assert_eq!(&(&(&q * &f) + &r), &p);
        if let Some(rk) = r.degree_k() {
            prop_assert!(rk < 2);
        }
    }

    /// Ring operations commute with evaluation.
    #[test]
    fn poly_eval_is_a_homomorphism(a in small_poly(), b in small_poly(), k in -8i64..8, m in -8i64..8) {
        let (rk, rm) = (rational(k, 3), rational(m, 3));
        let sum = &a + &b;
        let prod = &a * &b;
        prop_assert_eq!(
            sum.eval_rational(&rk, &rm),
            a.eval_rational(&rk, &rm) + b.eval_rational(&rk, &rm)
        );
        prop_assert_eq!(
            prod.eval_rational(&rk, &rm),
            a.eval_rational(&rk, &rm) * b.eval_rational(&rk, &rm)
        );
    }

    /// JSON encoding round-trips surfaces up to scale.
    #[test]
    fn sphere_json_round_trip(s in any_surface()) {
        let js = serde_json::to_string(&s).unwrap();
        let back: SphereEq = serde_json::from_str(&js).unwrap();
        prop_assert!(back.approx_eq(&s));
    }
}
