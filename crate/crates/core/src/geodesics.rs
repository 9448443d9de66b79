//! Geodesics and comparison triangles on a model surface `dt² + m(t)² dθ²`
//! with nonpositive curvature.
//!
//! Geodesics are integrated in arclength with state `(t, θ, φ)`, where `φ`
//! is the angle from the outward radial direction:
//! `t' = cos φ`, `θ' = sin φ / m`, `φ' = -m' sin φ / m`. The Clairaut
//! quantity `m sin φ` is a first integral of this system.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::ode::{locate, DenseStep, Stepper, Tolerance};
use crate::numeric::{quad, roots};
use crate::warping::ModelSurface;

const GEODESIC_TOL: f64 = 1e-13;
const ANGLE_XTOL: f64 = 1e-14;

/// A point in polar coordinates about the pole.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub t: f64,
    pub theta: f64,
}

impl SurfacePoint {
    /// The pole has no angular coordinate; it is stored with `theta = 0`.
    pub fn new(t: f64, theta: f64) -> Self {
        Self {
            t,
            theta: if t == 0.0 { 0.0 } else { theta },
        }
    }

    pub fn pole() -> Self {
        Self { t: 0.0, theta: 0.0 }
    }

    pub fn is_pole(&self) -> bool {
        self.t == 0.0
    }
}

#[derive(Clone, Debug)]
enum PathKind {
    /// Radial line `t = t0 + dir s`, continuing through the pole if `dir < 0`.
    Meridian { dir: f64 },
    /// Integrated in a frame where `θ` increases; actual `θ = θ0 + sign θ_frame`.
    Integrated { steps: Vec<DenseStep<3>>, sign: f64 },
}

/// A unit-speed geodesic segment.
#[derive(Clone, Debug)]
pub struct GeodesicPath {
    pub start: SurfacePoint,
    /// Angle from the outward radial direction, positive toward increasing `θ`.
    pub initial_angle: f64,
    /// `m(t) sin φ`, conserved along the path.
    pub clairaut_constant: f64,
    pub length: f64,
    kind: PathKind,
}

impl GeodesicPath {
    fn frame_state(&self, s: f64) -> [f64; 3] {
        match &self.kind {
            PathKind::Meridian { .. } => unreachable!("meridians have no frame state"),
            PathKind::Integrated { steps, .. } => {
                if steps.is_empty() {
                    return [self.start.t, 0.0, self.initial_angle.abs()];
                }
                steps[locate(steps, s)].eval(s)
            }
        }
    }

    fn check(&self, s: f64) -> Result<()> {
        if !(s >= 0.0 && s <= self.length * (1.0 + 1e-12) + 1e-15) {
            return Err(Error::Domain {
                what: "arclength along path",
                value: s,
            });
        }
        Ok(())
    }

    pub fn point_at(&self, s: f64) -> Result<SurfacePoint> {
        self.check(s)?;
        Ok(match &self.kind {
            PathKind::Meridian { dir } => {
                let t = self.start.t + dir * s;
                if t >= 0.0 {
                    SurfacePoint::new(t, self.start.theta)
                } else {
                    SurfacePoint::new(-t, self.start.theta + PI)
                }
            }
            PathKind::Integrated { sign, .. } => {
                let y = self.frame_state(s);
                SurfacePoint::new(y[0], self.start.theta + sign * y[1])
            }
        })
    }

    /// Angle of the tangent from the outward radial direction at arclength `s`.
    pub fn heading_at(&self, s: f64) -> Result<f64> {
        self.check(s)?;
        Ok(match &self.kind {
            PathKind::Meridian { dir } => {
                if *dir > 0.0 || self.start.t + dir * s < 0.0 {
                    0.0
                } else {
                    PI
                }
            }
            PathKind::Integrated { sign, .. } => sign * self.frame_state(s)[2],
        })
    }

    /// Points at `count + 1` equally spaced arclengths.
    pub fn samples(&self, count: usize) -> Vec<(f64, SurfacePoint)> {
        let count = count.max(1);
        (0..=count)
            .map(|i| {
                let s = self.length * i as f64 / count as f64;
                (s, self.point_at(s).expect("inside path"))
            })
            .collect()
    }

    /// Largest deviation of `m sin φ` from its initial value over the samples.
    pub fn clairaut_drift(&self, surface: &ModelSurface, count: usize) -> f64 {
        if let PathKind::Meridian { .. } = self.kind {
            return 0.0;
        }
        self.samples(count)
            .into_iter()
            .map(|(s, p)| {
                let nu = surface.state(p.t)[0] * self.heading_at(s).unwrap().sin();
                (nu - self.clairaut_constant).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest deviation of the metric speed `√(t'² + m² θ'²)` from 1, using
    /// the derivative of the dense output.
    pub fn speed_defect(&self, surface: &ModelSurface, count: usize) -> f64 {
        let PathKind::Integrated { steps, .. } = &self.kind else {
            return 0.0;
        };
        if steps.is_empty() {
            return 0.0;
        }
        self.samples(count)
            .into_iter()
            .map(|(s, p)| {
                let d = steps[locate(steps, s)].eval_derivative(s);
                let m = surface.state(p.t)[0];
                ((d[0] * d[0] + m * m * d[1] * d[1]).sqrt() - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Writes `s,t,theta` rows with a header.
    pub fn write_csv<W: Write>(&self, mut w: W, count: usize) -> io::Result<()> {
        writeln!(w, "s,t,theta")?;
        for (s, p) in self.samples(count) {
            writeln!(w, "{s},{},{}", p.t, p.theta)?;
        }
        Ok(())
    }
}

enum Outcome {
    Reached,
    /// `θ` reached the target at arclength `s`.
    Crossed {
        s: f64,
    },
    /// `t` exceeded the limit before `θ` reached the target.
    Escaped {
        t: f64,
        theta: f64,
    },
}

/// Integrates a non-meridian geodesic from `(t0, 0)` with heading
/// `phi0 ∈ (0, π)`, so that `θ` increases.
fn integrate(
    surface: &ModelSurface,
    t0: f64,
    phi0: f64,
    s_max: f64,
    theta_target: f64,
    t_limit: f64,
) -> Result<(Vec<DenseStep<3>>, Outcome)> {
    let rhs = |_s: f64, y: &[f64; 3]| {
        let [m, mp] = surface.state(y[0].max(0.0));
        let m = m.max(f64::MIN_POSITIVE);
        let (sn, cs) = y[2].sin_cos();
        [cs, sn / m, -mp * sn / m]
    };
    let tol = Tolerance::new(GEODESIC_TOL, GEODESIC_TOL);
    let mut st = Stepper::new(rhs, 0.0, [t0, 0.0, phi0], s_max, tol);
    let mut steps = Vec::new();
    while let Some(step) = st.step()? {
        let end = step.y1();
        if end[1] >= theta_target {
            let (a, b) = (step.t0, step.t1());
            let fa = step.y0()[1] - theta_target;
            let fb = end[1] - theta_target;
            let s = roots::brent(|s| step.eval(s)[1] - theta_target, a, b, fa, fb, 1e-15, 200)?;
            steps.push(step);
            return Ok((steps, Outcome::Crossed { s }));
        }
        if end[0] > t_limit {
            steps.push(step);
            return Ok((
                steps,
                Outcome::Escaped {
                    t: end[0],
                    theta: end[1],
                },
            ));
        }
        steps.push(step);
    }
    Ok((steps, Outcome::Reached))
}

fn check_point(surface: &ModelSurface, p: &SurfacePoint) -> Result<()> {
    if !(p.t >= 0.0) || !p.theta.is_finite() {
        return Err(Error::Domain {
            what: "surface point",
            value: p.t,
        });
    }
    if p.t > surface.horizon() {
        return Err(Error::HorizonExceeded {
            t: p.t,
            horizon: surface.horizon(),
        });
    }
    Ok(())
}

/// Wraps an angle into `(-π, π]`.
fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Geodesic of the given length from `start`, leaving at `angle` from the
/// outward radial direction (positive toward increasing `θ`). From the pole,
/// `angle` is the `θ` of the meridian taken.
pub fn shoot(
    surface: &ModelSurface,
    start: SurfacePoint,
    angle: f64,
    length: f64,
) -> Result<GeodesicPath> {
    check_point(surface, &start)?;
    if !(length >= 0.0 && length.is_finite()) {
        return Err(Error::Domain {
            what: "geodesic length",
            value: length,
        });
    }
    let horizon = surface.horizon();
    if start.is_pole() {
        if length > horizon {
            return Err(Error::HorizonExceeded { t: length, horizon });
        }
        return Ok(GeodesicPath {
            start: SurfacePoint {
                t: 0.0,
                theta: angle,
            },
            initial_angle: 0.0,
            clairaut_constant: 0.0,
            length,
            kind: PathKind::Meridian { dir: 1.0 },
        });
    }
    let angle = wrap(angle);
    let m0 = surface.state(start.t)[0];
    if angle == 0.0 || angle == PI {
        let dir = if angle == 0.0 { 1.0 } else { -1.0 };
        let far = (start.t + dir * length).abs();
        if far > horizon {
            return Err(Error::HorizonExceeded { t: far, horizon });
        }
        return Ok(GeodesicPath {
            start,
            initial_angle: angle,
            clairaut_constant: 0.0,
            length,
            kind: PathKind::Meridian { dir },
        });
    }
    let sign = angle.signum();
    let (steps, outcome) = integrate(
        surface,
        start.t,
        angle.abs(),
        length,
        f64::INFINITY,
        horizon,
    )?;
    if let Outcome::Escaped { t, .. } = outcome {
        return Err(Error::HorizonExceeded { t, horizon });
    }
    Ok(GeodesicPath {
        start,
        initial_angle: angle,
        clairaut_constant: m0 * angle.sin(),
        length,
        kind: PathKind::Integrated { steps, sign },
    })
}

/// Geodesic from `(ta, 0)` to `(tb, delta)` with `0 < delta < π`, both
/// points off the pole. Returns the path in that frame.
fn connect(surface: &ModelSurface, ta: f64, tb: f64, delta: f64) -> Result<GeodesicPath> {
    // Distance from the pole is convex along geodesics in nonpositive
    // curvature, so the connecting segment stays below max(ta, tb).
    let t_limit = surface.horizon().min(ta.max(tb) + 1.0);
    let s_max = 4.0 * t_limit + 10.0;
    let residual = |phi: f64| -> f64 {
        match integrate(surface, ta, phi, s_max, delta, t_limit) {
            Ok((steps, Outcome::Crossed { s })) => steps[locate(&steps, s)].eval(s)[0] - tb,
            Ok((_, Outcome::Escaped { t, theta })) => (t - tb).max(0.0) + (delta - theta),
            Ok((_, Outcome::Reached)) => t_limit - tb + delta,
            // Only near-pole shots can fail, and those cross before the pole
            // side of the bracket.
            Err(_) => -tb,
        }
    };
    // Outward radial shot never turns; the inward one passes through the
    // pole and meets the target ray at t = 0.
    let phi = roots::brent(
        residual,
        0.0,
        PI,
        t_limit - tb + delta,
        -tb,
        ANGLE_XTOL,
        200,
    )?;
    let (steps, outcome) = integrate(surface, ta, phi, s_max, delta, t_limit)?;
    let Outcome::Crossed { s } = outcome else {
        return Err(Error::Unresolved(format!(
            "geodesic shot at angle {phi} does not reach the target ray"
        )));
    };
    Ok(GeodesicPath {
        start: SurfacePoint::new(ta, 0.0),
        initial_angle: phi,
        clairaut_constant: surface.state(ta)[0] * phi.sin(),
        length: s,
        kind: PathKind::Integrated { steps, sign: 1.0 },
    })
}

/// Riemannian distance between two points, by shooting on the initial angle.
pub fn distance(surface: &ModelSurface, a: SurfacePoint, b: SurfacePoint) -> Result<f64> {
    check_point(surface, &a)?;
    check_point(surface, &b)?;
    if a.is_pole() {
        return Ok(b.t);
    }
    if b.is_pole() {
        return Ok(a.t);
    }
    let delta = wrap(b.theta - a.theta).abs();
    if delta <= 1e-15 {
        return Ok((a.t - b.t).abs());
    }
    if PI - delta <= 1e-15 {
        return Ok(a.t + b.t);
    }
    Ok(connect(surface, a.t, b.t, delta)?.length)
}

/// Angle between tangent vectors `u`, `v` (components `(dt, dθ)`) at a point
/// where the warping function equals `m`.
fn metric_angle(m: f64, u: [f64; 2], v: [f64; 2]) -> f64 {
    let g = u[0] * v[0] + m * m * u[1] * v[1];
    let cross = m * (u[0] * v[1] - u[1] * v[0]);
    cross.abs().atan2(g)
}

/// Geodesic triangle with one vertex at the pole.
#[derive(Clone, Debug)]
pub struct GeodesicTriangle {
    /// Pole, `x̃ = (d_ox, 0)`, `ỹ = (d_oy, θ*)`.
    pub vertices: [SurfacePoint; 3],
    /// `[d(õ, x̃), d(õ, ỹ), d(x̃, ỹ)]`.
    pub side_lengths: [f64; 3],
    /// Interior angles at `õ`, `x̃`, `ỹ`.
    pub angles: [f64; 3],
    /// Whether the `x̃ỹ` side is available for area integration.
    pub area_integrand_ready: bool,
    /// The side from `x̃` to `ỹ`.
    pub side_xy: GeodesicPath,
}

/// Serializable summary of a triangle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleRecord {
    pub vertices: [SurfacePoint; 3],
    pub side_lengths: [f64; 3],
    pub angles: [f64; 3],
    pub angle_sum: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauss_bonnet_residual: Option<f64>,
}

impl GeodesicTriangle {
    pub fn angle_sum(&self) -> f64 {
        self.angles.iter().sum()
    }

    pub fn record(&self, residual: Option<f64>) -> TriangleRecord {
        TriangleRecord {
            vertices: self.vertices,
            side_lengths: self.side_lengths,
            angles: self.angles,
            angle_sum: self.angle_sum(),
            gauss_bonnet_residual: residual,
        }
    }
}

/// Triangle on the model surface with a vertex at the pole and the given
/// side lengths.
pub fn comparison_triangle(
    surface: &ModelSurface,
    d_ox: f64,
    d_oy: f64,
    d_xy: f64,
) -> Result<GeodesicTriangle> {
    let sides = [d_ox, d_oy, d_xy];
    let strict = sides.iter().all(|d| d.is_finite() && *d > 0.0)
        && d_xy < d_ox + d_oy
        && d_ox < d_oy + d_xy
        && d_oy < d_ox + d_xy;
    if !strict {
        return Err(Error::DegenerateTriangle(sides));
    }
    for d in [d_ox, d_oy] {
        if d > surface.horizon() {
            return Err(Error::HorizonExceeded {
                t: d,
                horizon: surface.horizon(),
            });
        }
    }
    let x = SurfacePoint::new(d_ox, 0.0);
    let gap = |theta: f64| -> f64 {
        match distance(surface, x, SurfacePoint::new(d_oy, theta)) {
            Ok(d) => d - d_xy,
            Err(_) => f64::NAN,
        }
    };
    let (g0, gpi) = ((d_ox - d_oy).abs() - d_xy, d_ox + d_oy - d_xy);
    if gpi <= 0.0 {
        return Err(Error::SectorExceeded { theta: PI });
    }
    let theta = roots::brent(gap, 0.0, PI, g0, gpi, ANGLE_XTOL, 200)?;
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::SectorExceeded { theta });
    }
    let side = connect(surface, d_ox, d_oy, theta)?;

    let m_x = surface.state(d_ox)[0];
    let phi0 = side.initial_angle;
    let at_x = metric_angle(m_x, [-1.0, 0.0], [phi0.cos(), phi0.sin() / m_x]);

    let end = side.frame_state(side.length);
    let m_y = surface.state(end[0])[0];
    let back = [-end[2].cos(), -end[2].sin() / m_y];
    let at_y = metric_angle(m_y, [-1.0, 0.0], back);

    Ok(GeodesicTriangle {
        vertices: [SurfacePoint::pole(), x, SurfacePoint::new(d_oy, theta)],
        side_lengths: [d_ox, d_oy, side.length],
        angles: [theta, at_x, at_y],
        area_integrand_ready: true,
        side_xy: side,
    })
}

/// `∬_△ K dA`, integrating `K(t) m(t) dt` out to the `x̃ỹ` side for each
/// `θ ∈ [0, θ*]`.
pub fn triangle_curvature_integral(surface: &ModelSurface, tri: &GeodesicTriangle) -> Result<f64> {
    if !tri.area_integrand_ready {
        return Err(Error::Unsupported("triangle side not available".into()));
    }
    let k = surface.curvature();
    let side = &tri.side_xy;
    let theta_star = tri.angles[0];
    let length = side.length;
    // θ is strictly increasing along the side.
    let side_radius = |theta: f64| -> f64 {
        if theta <= 0.0 {
            return side.frame_state(0.0)[0];
        }
        if theta >= theta_star {
            return side.frame_state(length)[0];
        }
        let s = roots::brent(
            |s| side.frame_state(s)[1] - theta,
            0.0,
            length,
            -theta,
            theta_star - theta,
            1e-15,
            200,
        )
        .unwrap_or(0.0);
        side.frame_state(s)[0]
    };
    let column = |theta: f64| -> f64 {
        let top = side_radius(theta);
        let mut knots = vec![0.0];
        knots.extend(k.knots_between(0.0, top));
        knots.push(top);
        quad::integrate_piecewise(|t| k.value(t) * surface.state(t)[0], &knots, 1e-15, 1e-13).value
    };
    Ok(quad::integrate(column, 0.0, theta_star, 1e-13, 1e-12).value)
}

/// `(angle sum - π) - ∬_△ K dA`; zero by Gauss–Bonnet.
pub fn gauss_bonnet_residual(surface: &ModelSurface, tri: &GeodesicTriangle) -> Result<f64> {
    Ok(tri.angle_sum() - PI - triangle_curvature_integral(surface, tri)?)
}

/// `(π/2 - apex) exp(∫ t K dt)`: lower bound on the angle at the base point
/// between a ray and a minimal geodesic to a critical point. Zero when the
/// moment integral diverges.
pub fn critical_angle_bound(surface: &ModelSurface, apex: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_2).contains(&apex) {
        return Err(Error::Domain {
            what: "apex angle (must lie in [0, π/2])",
            value: apex,
        });
    }
    let moment = surface.curvature().moment_integral()?;
    if moment.is_divergent() {
        return Ok(0.0);
    }
    Ok((FRAC_PI_2 - apex) * moment.value.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::RadialCurvature;
    use approx::assert_abs_diff_eq;

    fn flat() -> ModelSurface {
        ModelSurface::new(&RadialCurvature::zero(), 20.0, 1e-13).unwrap()
    }

    fn hyperbolic() -> ModelSurface {
        ModelSurface::new(&RadialCurvature::constant(-1.0), 12.0, 1e-13).unwrap()
    }

    #[test]
    fn flat_shot_is_a_straight_line() {
        let s = flat();
        let p = shoot(&s, SurfacePoint::new(1.0, 0.0), FRAC_PI_2, 2.0).unwrap();
        let end = p.point_at(2.0).unwrap();
        // from (1, 0) heading +y by 2: (1, 2)
        assert_abs_diff_eq!(end.t, 5f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(end.theta, 2f64.atan(), epsilon = 1e-9);
    }

    #[test]
    fn radial_shot() {
        let s = flat();
        let p = shoot(&s, SurfacePoint::new(1.0, 0.0), 0.0, 2.0).unwrap();
        assert_eq!(p.point_at(2.0).unwrap(), SurfacePoint::new(3.0, 0.0));
        let back = shoot(&s, SurfacePoint::new(1.0, 0.0), PI, 3.0).unwrap();
        let end = back.point_at(3.0).unwrap();
        assert_eq!(end.t, 2.0);
        assert_abs_diff_eq!(end.theta, PI);
    }

    #[test]
    fn hyperbolic_clairaut_and_speed() {
        let s = hyperbolic();
        let p = shoot(&s, SurfacePoint::new(1.0, 0.3), 2.0, 5.0).unwrap();
        assert!(p.clairaut_drift(&s, 400) < 1e-8);
        assert!(p.speed_defect(&s, 400) < 1e-8);
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
        assert_abs_diff_eq!(d, 5.0, epsilon = 1e-10);
        let a = SurfacePoint::new(2.0, 1.0);
        assert_eq!(distance(&f, a, a).unwrap(), 0.0);

        let h = hyperbolic();
        let (r1, r2, th) = (1.3f64, 2.1f64, 1.1f64);
        let exact = (r1.cosh() * r2.cosh() - r1.sinh() * r2.sinh() * th.cos()).acosh();
        let d = distance(
            &h,
            SurfacePoint::new(r1, 0.2),
            SurfacePoint::new(r2, 0.2 + th),
        )
        .unwrap();
        assert_abs_diff_eq!(d, exact, epsilon = 1e-9);
        let d2 = distance(
            &h,
            SurfacePoint::new(r2, 0.2 + th),
            SurfacePoint::new(r1, 0.2),
        )
        .unwrap();
        assert_abs_diff_eq!(d, d2, epsilon = 1e-10);
    }

    #[test]
    fn flat_345_triangle() {
        let f = flat();
        let tri = comparison_triangle(&f, 3.0, 4.0, 5.0).unwrap();
        assert_abs_diff_eq!(tri.angles[0], FRAC_PI_2, epsilon = 1e-10);
        assert_abs_diff_eq!(tri.angles[1], (4.0f64 / 3.0).atan(), epsilon = 1e-9);
        assert_abs_diff_eq!(tri.angles[2], (3.0f64 / 4.0).atan(), epsilon = 1e-9);
        assert!(gauss_bonnet_residual(&f, &tri).unwrap().abs() < 1e-9);
    }

    #[test]
    fn degenerate_triangle_rejected() {
        assert!(matches!(
            comparison_triangle(&flat(), 1.0, 2.0, 3.0),
            Err(Error::DegenerateTriangle(_))
        ));
    }

    #[test]
    fn hyperbolic_equilateral() {
        let h = hyperbolic();
        let tri = comparison_triangle(&h, 1.0, 1.0, 1.0).unwrap();
        let c = 1f64.cosh();
        let exact = ((c * c - c) / (1f64.sinh().powi(2))).acos();
        for a in tri.angles {
            assert_abs_diff_eq!(a, exact, epsilon = 1e-9);
        }
        let r = gauss_bonnet_residual(&h, &tri).unwrap();
        assert!(r.abs() < 1e-8, "{r}");
    }

    #[test]
    fn critical_angle_examples() {
        let f = flat();
        assert_abs_diff_eq!(critical_angle_bound(&f, 0.0).unwrap(), FRAC_PI_2);
        assert_eq!(critical_angle_bound(&f, FRAC_PI_2).unwrap(), 0.0);
        let hat = ModelSurface::new(&RadialCurvature::hat(1.0, 1.0).unwrap(), 10.0, 1e-12).unwrap();
        assert_abs_diff_eq!(
            critical_angle_bound(&hat, 0.0).unwrap(),
            FRAC_PI_2 * (-1.0f64 / 6.0).exp(),
            epsilon = 1e-12
        );
        assert_eq!(critical_angle_bound(&hyperbolic(), 0.0).unwrap(), 0.0);
    }
}
