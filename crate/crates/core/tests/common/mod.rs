#![allow(dead_code)]

use proptest::prelude::*;
use radcomp::{RadialCurvature, Tail};

/// Nonpositive piecewise-linear curvature supported in `[0, support]`.
pub fn compact_nonpositive() -> impl Strategy<Value = RadialCurvature> {
    (0.5f64..4.0, prop::collection::vec(0.0f64..1.5, 1..6)).prop_map(|(support, depths)| {
        let count = depths.len() + 1;
        let mut knots: Vec<f64> = (0..=count)
            .map(|i| support * i as f64 / count as f64)
            .collect();
        knots[count] = support;
        let mut values: Vec<f64> = depths.iter().map(|d| -d).collect();
        values.insert(0, values[0]);
        values.truncate(count);
        values.push(0.0);
        RadialCurvature::linear(&knots, &values, Tail::Zero).unwrap()
    })
}

/// Piecewise-linear curvature of either sign with an optional negative
/// constant tail.
pub fn signed_curvature() -> impl Strategy<Value = RadialCurvature> {
    (
        0.5f64..5.0,
        prop::collection::vec(-2.0f64..2.0, 2..7),
        prop::bool::ANY,
    )
        .prop_map(|(span, values, constant_tail)| {
            let n = values.len();
            let knots: Vec<f64> = (0..n).map(|i| span * i as f64 / (n - 1) as f64).collect();
            let tail = if constant_tail {
                Tail::Constant { c: values[n - 1] }
            } else {
                Tail::Zero
            };
            let mut values = values;
            if !constant_tail {
                values[n - 1] = 0.0;
            }
            RadialCurvature::linear(&knots, &values, tail).unwrap()
        })
}

/// Midpoint rule for `∫_0^b t k(t) dt`.
pub fn riemann_moment(k: &RadialCurvature, b: f64, cells: usize) -> f64 {
    let h = b / cells as f64;
    (0..cells)
        .map(|i| {
            let t = (i as f64 + 0.5) * h;
            t * k.eval(t).unwrap() * h
        })
        .sum()
}

/// Classical fixed-step RK4 for `m'' = -K m`, returning `(m, m')` at `t_end`.
pub fn rk4_warping(k: &RadialCurvature, t_end: f64, steps: usize) -> (f64, f64) {
    let h = t_end / steps as f64;
    let f = |t: f64, y: [f64; 2]| [y[1], -k.eval(t.max(0.0)).unwrap() * y[0]];
    let mut y = [0.0, 1.0];
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = f(t, y);
        let k2 = f(
            t + h / 2.0,
            [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]],
        );
        let k3 = f(
            t + h / 2.0,
            [y[0] + h / 2.0 * k2[0], y[1] + h / 2.0 * k2[1]],
        );
        let k4 = f(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for j in 0..2 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    (y[0], y[1])
}
