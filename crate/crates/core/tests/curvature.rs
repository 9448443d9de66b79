mod common;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use radcomp::{gminus, kstar, moment_integral, Formula, RadialCurvature, Tail};

#[test]
fn hat_moment_matches_high_order_oracle() {
    let hat = RadialCurvature::hat(1.0, 1.0).unwrap();
    // Simpson's rule on a fine grid: ∫0^1 -t(1-t) dt
    let n = 10_000;
    let h = 1.0 / n as f64;
    let f = |t: f64| -t * (1.0 - t);
    let simpson: f64 = (0..n)
        .map(|i| {
            let a = i as f64 * h;
            h / 6.0 * (f(a) + 4.0 * f(a + h / 2.0) + f(a + h))
        })
        .sum();
    let m = moment_integral(&hat).unwrap();
    assert_abs_diff_eq!(m.value, -1.0 / 6.0, epsilon = 1e-14);
    assert_abs_diff_eq!(m.value, simpson, epsilon = 1e-13);
}

#[test]
fn gminus_of_cosine_matches_grid_sampler() {
    let g = RadialCurvature::from_formula(
        Formula::Cosine {
            amplitude: 1.0,
            frequency: 1.0,
            phase: 0.0,
            offset: 0.0,
        },
        std::f64::consts::PI,
        Tail::Constant { c: -1.0 },
    )
    .unwrap();
    let r = gminus(&g);
    for i in 0..=31_416 {
        let t = i as f64 * 1e-4;
        assert_abs_diff_eq!(r.eval(t).unwrap(), t.cos().min(0.0), epsilon = 1e-10);
    }
    assert!(moment_integral(&r).unwrap().is_divergent());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kstar_is_below_everything(g in common::signed_curvature(), k in common::signed_curvature()) {
        let r = kstar(&g, &k);
        for i in 0..=600 {
            let t = i as f64 * 0.01;
            let v = r.eval(t).unwrap();
            prop_assert!(v <= 0.0);
            prop_assert!(v <= g.eval(t).unwrap() + 1e-12);
            prop_assert!(v <= k.eval(t).unwrap() + 1e-12);
            let expect = 0f64.min(g.eval(t).unwrap()).min(k.eval(t).unwrap());
            prop_assert!((v - expect).abs() <= 1e-10, "t={} got {} want {}", t, v, expect);
        }
        prop_assert!(r.is_nonpositive());
    }

    #[test]
    fn moment_is_monotone(a in common::compact_nonpositive(), b in common::compact_nonpositive()) {
        // min(a, b) ≤ a pointwise
        let lower = kstar(&a, &b);
        let ml = moment_integral(&lower).unwrap().value;
        let ma = moment_integral(&a).unwrap().value;
        prop_assert!(ml <= ma + 1e-14);
        prop_assert!(ma <= 0.0);
    }

    #[test]
    fn moment_matches_riemann_sum(k in common::compact_nonpositive()) {
        let exact = moment_integral(&k).unwrap();
        let riemann = common::riemann_moment(&k, k.t_tail(), 200_000);
        prop_assert!((exact.value - riemann).abs() <= 1e-8, "{} vs {}", exact.value, riemann);
        prop_assert!(exact.abs_error >= 0.0);
    }

    #[test]
    fn json_round_trip(k in common::signed_curvature()) {
        let text = serde_json::to_string(&k).unwrap();
        let back: RadialCurvature = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, k);
    }
}
