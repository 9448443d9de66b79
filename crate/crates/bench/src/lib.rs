//! Shared fixtures for the benchmarks.

use radcomp::{Formula, ModelSurface, RadialCurvature, Tail};

/// `-(1 - t)₊`, the standard compactly supported example.
pub fn hat() -> RadialCurvature {
    RadialCurvature::hat(1.0, 1.0).expect("valid hat")
}

/// Smooth negative bump centred at 1.5.
pub fn bump() -> RadialCurvature {
    RadialCurvature::from_formula(
        Formula::Bump {
            amplitude: -0.5,
            center: 1.5,
            width: 1.0,
        },
        3.0,
        Tail::Zero,
    )
    .expect("valid bump")
}

/// Spline core with a power-law tail.
pub fn spline_with_tail() -> RadialCurvature {
    RadialCurvature::spline(
        &[0.0, 0.5, 1.5, 3.0],
        &[-0.8, -0.3, -0.6, -0.2],
        Tail::PowerLaw { c: -0.2, p: 3.0 },
    )
    .expect("valid spline")
}

pub fn surface(k: &RadialCurvature) -> ModelSurface {
    ModelSurface::new(k, 30.0, 1e-12).expect("nonpositive curvature")
}
