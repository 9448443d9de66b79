mod common;

use common::{compact_nonpositive, rk4_warping};
use proptest::prelude::*;
use radcomp::{
    moment_integral, slope_limit, solve_warping, total_curvature_direct,
    total_curvature_isoperimetric, Error, RadialCurvature, Tail,
};

#[test]
fn closed_forms() {
    let flat = solve_warping(&RadialCurvature::zero(), 10.0, 1e-12).unwrap();
    let hyp = solve_warping(&RadialCurvature::constant(-1.0), 10.0, 1e-12).unwrap();
    for i in 0..=100 {
        let t = i as f64 * 0.1;
        assert!((flat.m(t).unwrap() - t).abs() <= 1e-12 * t.max(1.0));
        assert!((flat.m_prime(t).unwrap() - 1.0).abs() <= 1e-12);
        assert!((hyp.m(t).unwrap() - t.sinh()).abs() <= 1e-10 * t.cosh());
        assert!((hyp.m_prime(t).unwrap() - t.cosh()).abs() <= 1e-10 * t.cosh());
    }
}

#[test]
fn hat_matches_refined_rk4() {
    let k = RadialCurvature::hat(1.0, 1.0).unwrap();
    let w = solve_warping(&k, 10.0, 1e-12).unwrap();
    // RK4 is fourth order, so the 10x refinement shrinks its error by 1e4;
    // the finer run serves as the reference.
    let (coarse, _) = rk4_warping(&k, 3.0, 3_000);
    let (fine, fine_slope) = rk4_warping(&k, 3.0, 30_000);
    assert!((coarse - fine).abs() < 1e-10);
    assert!((w.m(3.0).unwrap() - fine).abs() < 1e-10);
    assert!((w.m_prime(3.0).unwrap() - fine_slope).abs() < 1e-10);
}

#[test]
fn hat_slope_inside_bracket() {
    let k = RadialCurvature::hat(1.0, 1.0).unwrap();
    let w = solve_warping(&k, 10.0, 1e-12).unwrap();
    let s = slope_limit(&w).unwrap().value;
    assert!(s >= 1.0 && s <= (1.0f64 / 6.0).exp());
    // m'' = 0 past the support
    assert!((s - w.m_prime(1.0).unwrap()).abs() < 1e-13);
    let c = total_curvature_direct(&w).unwrap().value;
    assert!((c - total_curvature_isoperimetric(&w).unwrap()).abs() < 1e-6);
}

#[test]
fn power_law_tail_sandwich() {
    let k = RadialCurvature::linear(
        &[0.0, 2.0],
        &[-0.5, -0.5],
        Tail::PowerLaw { c: -0.5, p: 4.0 },
    )
    .unwrap();
    let w = solve_warping(&k, 10.0, 1e-12).unwrap();
    let s = slope_limit(&w).unwrap();
    let bound = (-moment_integral(&k).unwrap().value).exp();
    assert!(s.value >= 1.0 && s.value <= bound);
    let c = total_curvature_direct(&w).unwrap().value;
    assert!((c - total_curvature_isoperimetric(&w).unwrap()).abs() < 1e-6);
}

#[test]
fn constant_negative_tail_is_unbounded() {
    let w = solve_warping(&RadialCurvature::constant(-1.0), 20.0, 1e-12).unwrap();
    assert_eq!(slope_limit(&w), Err(Error::Unbounded));
    assert_eq!(total_curvature_direct(&w), Err(Error::Unbounded));
}

#[test]
fn positive_curvature_hits_conjugate_point() {
    let err = solve_warping(&RadialCurvature::constant(1.0), 5.0, 1e-12).unwrap_err();
    match err {
        Error::ConjugatePoint { t } => assert!((t - std::f64::consts::PI).abs() < 1e-8),
        other => panic!("unexpected {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sandwich_and_identity(k in compact_nonpositive()) {
        let w = solve_warping(&k, 10.0, 1e-12).unwrap();
        let s = slope_limit(&w).unwrap().value;
        let upper = (-moment_integral(&k).unwrap().value).exp();
        prop_assert!(s >= 1.0 - 1e-9);
        prop_assert!(s <= upper + 1e-6);
        let direct = total_curvature_direct(&w).unwrap().value;
        prop_assert!((direct - 2.0 * std::f64::consts::PI * (1.0 - s)).abs() <= 1e-6);
    }

    #[test]
    fn convex_and_above_flat(k in compact_nonpositive()) {
        let w = solve_warping(&k, 10.0, 1e-12).unwrap();
        let grid = w.grid();
        let mut prev = 1.0;
        for &t in &grid {
            let slope = w.m_prime(t).unwrap();
            prop_assert!(slope >= prev - 1e-12);
            prop_assert!(w.m(t).unwrap() >= t - 1e-12);
            prev = slope;
        }
    }

    #[test]
    fn sturm_domination(k in compact_nonpositive(), scale in 1.0f64..3.0) {
        // scaling a nonpositive curvature by s ≥ 1 makes it pointwise smaller
        let knots = k.knots();
        let values: Vec<f64> = knots.iter().map(|&t| scale * k.eval(t).unwrap()).collect();
        let deeper = RadialCurvature::linear(&knots, &values, Tail::Zero).unwrap();
        let a = solve_warping(&deeper, 10.0, 1e-12).unwrap();
        let b = solve_warping(&k, 10.0, 1e-12).unwrap();
        for i in 1..=100 {
            let t = i as f64 * 0.1;
            prop_assert!(a.m(t).unwrap() >= b.m(t).unwrap() * (1.0 - 1e-11));
        }
    }
}
