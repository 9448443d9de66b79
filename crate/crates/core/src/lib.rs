//! Radial curvature comparison on rotationally symmetric model surfaces.
//!
//! Given a pole-centred radial curvature `K(t)` on `[0, ∞)`, the model surface
//! is `dt² + m(t)² dθ²` with `m'' + K m = 0`, `m(0) = 0`, `m'(0) = 1`. The
//! crate computes the warping function, the topology threshold
//! `1 - F(δ(K*))`, volume growth ratios against a model, geodesic comparison
//! triangles, and the sufficient conditions for a manifold with
//! radial curvature bounded below to be diffeomorphic to `Rⁿ`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod error;
pub mod numeric;
mod serde_ext;

pub mod criteria;
pub mod curvature;
pub mod geodesics;
pub mod synthetic;
pub mod volume;
pub mod warping;

pub use criteria::{
    corollary_check, delta_threshold, main_theorem_check, threshold, B2Status, CheckOptions,
    Criterion, CriterionReport, GrowthSource, Verdict,
};
pub use curvature::{
    gminus, kstar, moment_integral, CurvatureSpec, Formula, MomentIntegral, Piece, RadialCurvature,
    Segment, Tail,
};
pub use error::{Error, Result};
pub use geodesics::{
    comparison_triangle, critical_angle_bound, distance, gauss_bonnet_residual, shoot,
    triangle_curvature_integral, GeodesicPath, GeodesicTriangle, SurfacePoint, TriangleRecord,
};
pub use synthetic::{curvature_envelope, ManifoldSpec, RotSymManifold};
pub use volume::{
    bishop_monotonicity_check, cap_volume, growth_ratio, model_ball_volume, model_volume_growth,
    net_function, sphere_volume, GrowthRatio, ModelVolume, MonotonicityCheck,
};
pub use warping::{
    slope_limit, solve_warping, total_curvature_direct, total_curvature_isoperimetric,
    ModelSurface, SlopeLimit, WarpingSolution,
};
