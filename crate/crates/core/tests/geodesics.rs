use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use radcomp::{
    comparison_triangle, critical_angle_bound, distance, gauss_bonnet_residual, shoot,
    triangle_curvature_integral, Error, Formula, ModelSurface, RadialCurvature, SurfacePoint, Tail,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn flat() -> ModelSurface {
    ModelSurface::new(&RadialCurvature::zero(), 30.0, 1e-12).unwrap()
}

fn hyperbolic() -> ModelSurface {
    ModelSurface::new(&RadialCurvature::constant(-1.0), 30.0, 1e-12).unwrap()
}

fn bump() -> ModelSurface {
    let k = RadialCurvature::from_formula(
        Formula::Bump {
            amplitude: -0.5,
            center: 1.5,
            width: 1.0,
        },
        3.0,
        Tail::Zero,
    )
    .unwrap();
    ModelSurface::new(&k, 30.0, 1e-12).unwrap()
}

fn planar(r1: f64, r2: f64, dtheta: f64) -> f64 {
    (r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * dtheta.cos())
        .max(0.0)
        .sqrt()
}

fn hyperbolic_law(r1: f64, r2: f64, dtheta: f64) -> f64 {
    (r1.cosh() * r2.cosh() - r1.sinh() * r2.sinh() * dtheta.cos())
        .max(1.0)
        .acosh()
}

/// Angle opposite side `c` in a hyperbolic triangle with sides `a, b, c`.
fn hyperbolic_angle(a: f64, b: f64, c: f64) -> f64 {
    ((a.cosh() * b.cosh() - c.cosh()) / (a.sinh() * b.sinh())).acos()
}

/// Uniform draws in `[0, 1)` from a seeded generator.
fn uniform(seed: u64) -> impl FnMut() -> f64 {
    let mut rng = StdRng::seed_from_u64(seed);
    move || rng.random::<f64>()
}

#[test]
fn shooting_examples() {
    let f = flat();
    let p = shoot(&f, SurfacePoint::new(1.0, 0.0), FRAC_PI_2, 2.0).unwrap();
    let end = p.point_at(2.0).unwrap();
    // the line x = 1 in the plane, at height 2
    assert!((end.t - 5f64.sqrt()).abs() < 1e-8);
    assert!((end.theta - 2f64.atan()).abs() < 1e-8);

    let radial = shoot(&f, SurfacePoint::new(1.0, 0.0), 0.0, 2.0).unwrap();
    let end = radial.point_at(2.0).unwrap();
    assert!((end.t - 3.0).abs() < 1e-12 && end.theta == 0.0);

    let h = hyperbolic();
    let p = shoot(&h, SurfacePoint::new(1.0, 0.3), 1.1, 5.0).unwrap();
    assert!(p.clairaut_drift(&h, 400) < 1e-8);
    assert!(p.speed_defect(&h, 400) < 1e-8);
}

#[test]
fn distance_examples() {
    let f = flat();
    let d = distance(
        &f,
        SurfacePoint::new(3.0, 0.0),
        SurfacePoint::new(4.0, FRAC_PI_2),
    )
    .unwrap();
    assert!((d - 5.0).abs() < 1e-8);
    let a = SurfacePoint::new(2.0, 1.0);
    assert_eq!(distance(&f, a, a).unwrap(), 0.0);
    let h = hyperbolic();
    let d = distance(&h, SurfacePoint::new(1.0, 0.0), SurfacePoint::new(2.0, 1.2)).unwrap();
    assert!((d - hyperbolic_law(1.0, 2.0, 1.2)).abs() < 1e-7);
}

#[test]
fn distances_match_laws_of_cosines() {
    let (f, h) = (flat(), hyperbolic());
    let mut rnd = uniform(7);
    for _ in 0..100 {
        let (r1, r2) = (0.05 + 4.95 * rnd(), 0.05 + 4.95 * rnd());
        let (a1, a2) = (PI * rnd(), PI * rnd());
        let (p, q) = (SurfacePoint::new(r1, a1), SurfacePoint::new(r2, a2));
        let dtheta = (a1 - a2).abs();
        let df = distance(&f, p, q).unwrap();
        assert!(
            (df - planar(r1, r2, dtheta)).abs() <= 1e-8,
            "flat {r1} {r2} {dtheta}"
        );
        let dh = distance(&h, p, q).unwrap();
        assert!(
            (dh - hyperbolic_law(r1, r2, dtheta)).abs() <= 1e-7,
            "hyp {r1} {r2} {dtheta}"
        );
    }
}

#[test]
fn flat_and_hyperbolic_triangles() {
    let t = comparison_triangle(&flat(), 3.0, 4.0, 5.0).unwrap();
    assert!((t.angles[0] - FRAC_PI_2).abs() < 1e-8);
    assert!((t.angles[1] - (4.0f64 / 3.0).atan()).abs() < 1e-8);
    assert!((t.angles[2] - 0.75f64.atan()).abs() < 1e-8);
    assert!(matches!(
        comparison_triangle(&flat(), 3.0, 4.0, 7.0),
        Err(Error::DegenerateTriangle(_))
    ));

    let h = hyperbolic();
    let t = comparison_triangle(&h, 1.0, 1.0, 1.0).unwrap();
    let a = hyperbolic_angle(1.0, 1.0, 1.0);
    for angle in t.angles {
        assert!((angle - a).abs() < 1e-8);
    }
    let t = comparison_triangle(&h, 2.0, 3.0, 4.0).unwrap();
    assert!((t.angles[0] - hyperbolic_angle(2.0, 3.0, 4.0)).abs() < 1e-8);
    assert!((t.angles[1] - hyperbolic_angle(2.0, 4.0, 3.0)).abs() < 1e-8);
    assert!((t.angles[2] - hyperbolic_angle(3.0, 4.0, 2.0)).abs() < 1e-8);
    let area = PI - t.angle_sum();
    assert!((triangle_curvature_integral(&h, &t).unwrap() + area).abs() < 1e-7);
}

#[test]
fn triangle_sides_round_trip() {
    let s = bump();
    for (a, b, c) in [
        (1.0, 2.0, 2.5),
        (2.5, 2.5, 0.4),
        (0.3, 4.0, 3.9),
        (3.0, 3.0, 5.5),
    ] {
        let t = comparison_triangle(&s, a, b, c).unwrap();
        let [o, x, y] = t.vertices;
        assert!((distance(&s, o, x).unwrap() - a).abs() < 1e-7);
        assert!((distance(&s, o, y).unwrap() - b).abs() < 1e-7);
        assert!((distance(&s, x, y).unwrap() - c).abs() < 1e-7);
        assert!((t.angles[0] - y.theta).abs() < 1e-12);
    }
}

#[test]
fn gauss_bonnet_on_three_surfaces() {
    let mut rnd = uniform(11);
    for s in [flat(), hyperbolic(), bump()] {
        for _ in 0..30 {
            let a = 0.2 + 3.8 * rnd();
            let b = 0.2 + 3.8 * rnd();
            // keep the third side strictly inside the triangle inequality
            let lo = (a - b).abs();
            let c = lo + (a + b - lo) * (0.05 + 0.9 * rnd());
            let t = comparison_triangle(&s, a, b, c).unwrap();
            let r = gauss_bonnet_residual(&s, &t).unwrap();
            assert!(r.abs() <= 1e-6, "sides ({a}, {b}, {c}): residual {r}");
        }
    }
}

/// `∫_0^t K m` by composite Simpson on the dense warping function.
fn radial_mass(s: &ModelSurface, t: f64) -> f64 {
    let cells = 400;
    let h = t / cells as f64;
    let k = s.curvature();
    let w = s.warping();
    let f = |u: f64| k.eval(u).unwrap() * w.m(u).unwrap();
    let mut acc = f(0.0) + f(t);
    for i in 1..cells {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn bump_curvature_integral_matches_oracle() {
    // The region is star-shaped from the pole, so it is swept by rays in θ;
    // sum the radial masses along the sampled far side.
    let s = bump();
    let t = comparison_triangle(&s, 1.2, 2.0, 1.5).unwrap();
    let pts = t.side_xy.samples(3001);
    let mut oracle = 0.0;
    for pair in pts.windows(2) {
        let (p, q) = (pair[0].1, pair[1].1);
        oracle += 0.5 * (radial_mass(&s, p.t) + radial_mass(&s, q.t)) * (q.theta - p.theta);
    }
    let value = triangle_curvature_integral(&s, &t).unwrap();
    assert!((value - oracle).abs() < 1e-6, "{value} vs {oracle}");
    assert!((t.angle_sum() - PI - value).abs() < 1e-6);
}

#[test]
fn comparison_angles_are_ordered() {
    let shallow = [
        RadialCurvature::zero(),
        RadialCurvature::hat(0.5, 2.0).unwrap(),
        RadialCurvature::constant(-0.25),
    ];
    let deep = [
        RadialCurvature::hat(1.0, 2.0).unwrap(),
        RadialCurvature::hat(1.0, 3.0).unwrap(),
        RadialCurvature::constant(-1.0),
    ];
    let mut rnd = uniform(3);
    for (k1, k2) in shallow.iter().zip(&deep) {
        let s1 = ModelSurface::new(k1, 30.0, 1e-12).unwrap();
        let s2 = ModelSurface::new(k2, 30.0, 1e-12).unwrap();
        for _ in 0..10 {
            let a = 0.3 + 3.0 * rnd();
            let b = 0.3 + 3.0 * rnd();
            let lo = (a - b).abs();
            let c = lo + (a + b - lo) * (0.05 + 0.9 * rnd());
            let t1 = comparison_triangle(&s1, a, b, c).unwrap();
            let t2 = comparison_triangle(&s2, a, b, c).unwrap();
            for i in 0..3 {
                assert!(
                    t1.angles[i] >= t2.angles[i] - 1e-7,
                    "angle {i} for ({a}, {b}, {c})"
                );
            }
        }
    }
}

#[test]
fn critical_angle_examples() {
    assert!((critical_angle_bound(&flat(), 0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
    let hat = ModelSurface::new(&RadialCurvature::hat(1.0, 1.0).unwrap(), 10.0, 1e-12).unwrap();
    let expected = FRAC_PI_2 * (-1.0f64 / 6.0).exp();
    assert!((critical_angle_bound(&hat, 0.0).unwrap() - expected).abs() < 1e-12);
    assert_eq!(critical_angle_bound(&hat, FRAC_PI_2).unwrap(), 0.0);
    assert_eq!(critical_angle_bound(&hyperbolic(), 0.3).unwrap(), 0.0);
    assert!(critical_angle_bound(&hat, 2.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn clairaut_is_conserved(t in 0.1f64..4.0, theta in 0.0f64..PI, phi in 0.0f64..PI, len in 0.1f64..6.0) {
        for s in [hyperbolic(), bump()] {
            let p = shoot(&s, SurfacePoint::new(t, theta), phi, len).unwrap();
            prop_assert!(p.clairaut_drift(&s, 200) <= 1e-8);
            prop_assert!(p.speed_defect(&s, 200) <= 1e-8);
        }
    }

    #[test]
    fn distance_is_symmetric(r1 in 0.1f64..4.0, r2 in 0.1f64..4.0, a1 in 0.0f64..PI, a2 in 0.0f64..PI) {
        let s = bump();
        let (p, q) = (SurfacePoint::new(r1, a1), SurfacePoint::new(r2, a2));
        let d = distance(&s, p, q).unwrap();
        prop_assert!((d - distance(&s, q, p).unwrap()).abs() <= 1e-8);
        prop_assert!(d >= (r1 - r2).abs() - 1e-9 && d <= r1 + r2 + 1e-9);
    }

    #[test]
    fn pole_angle_grows_with_far_side(a in 0.5f64..3.0, b in 0.5f64..3.0, u in 0.1f64..0.8, du in 0.02f64..0.15) {
        let s = bump();
        let lo = (a - b).abs();
        let c1 = lo + (a + b - lo) * u;
        let c2 = lo + (a + b - lo) * (u + du);
        let t1 = comparison_triangle(&s, a, b, c1).unwrap();
        let t2 = comparison_triangle(&s, a, b, c2).unwrap();
        prop_assert!(t2.angles[0] > t1.angles[0]);
    }
}
