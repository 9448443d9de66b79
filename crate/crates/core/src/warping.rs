//! The warping ODE `m'' + K m = 0`, `m(0) = 0`, `m'(0) = 1`, and the scalars
//! of the model surface `dt² + m(t)² dθ²` derived from it.

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::curvature::{RadialCurvature, Tail};
use crate::error::{Error, Result};
use crate::numeric::ode::{locate, DenseStep, Stepper, Tolerance};
use crate::numeric::{quad, roots};

pub const DEFAULT_REL_TOL: f64 = 1e-12;

/// `max(10, 5 t_tail)`.
pub fn default_horizon(k: &RadialCurvature) -> f64 {
    10f64.max(5.0 * k.t_tail())
}

/// Dense solution of the warping ODE on `[0, horizon]`.
#[derive(Clone, Debug)]
pub struct WarpingSolution {
    curvature: RadialCurvature,
    steps: Vec<DenseStep<2>>,
    horizon: f64,
    rel_tol: f64,
}

pub fn solve_warping(k: &RadialCurvature, horizon: f64, rel_tol: f64) -> Result<WarpingSolution> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Domain {
            what: "horizon",
            value: horizon,
        });
    }
    if !(1e-14..=1e-3).contains(&rel_tol) {
        return Err(Error::Domain {
            what: "rel_tol (must lie in [1e-14, 1e-3])",
            value: rel_tol,
        });
    }
    let mut knots: Vec<f64> = std::iter::once(0.0)
        .chain(k.knots_between(0.0, horizon))
        .collect();
    knots.push(horizon);

    let tol = Tolerance::new(rel_tol, rel_tol * 1e-3);
    let mut steps: Vec<DenseStep<2>> = Vec::new();
    let mut y = [0.0, 1.0];
    let mut h_prev = 0.0;
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        // Each knot interval has a single smooth piece; stopping at knots keeps
        // the step-size control away from derivative jumps.
        let piece = k.piece_at(a, b);
        let rhs = |t: f64, y: &[f64; 2]| [y[1], -piece.eval(t) * y[0]];
        let mut st = Stepper::new(rhs, a, y, b, tol).with_initial_step(h_prev);
        while let Some(step) = st.step()? {
            let end = step.y1();
            if end[0] <= 0.0 {
                let t = roots::bisect(|t| step.eval(t)[0], step.t0, step.t1(), 1e-14);
                return Err(Error::ConjugatePoint { t });
            }
            steps.push(step);
        }
        y = st.state();
        h_prev = st.step_size();
    }
    Ok(WarpingSolution {
        curvature: k.clone(),
        steps,
        horizon,
        rel_tol,
    })
}

impl WarpingSolution {
    pub fn curvature(&self) -> &RadialCurvature {
        &self.curvature
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    /// Accepted step boundaries, from 0 to the horizon.
    pub fn grid(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.steps.iter().map(|s| s.t1()))
            .collect()
    }

    fn check(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) {
            return Err(Error::Domain {
                what: "radial coordinate t",
                value: t,
            });
        }
        if t > self.horizon * (1.0 + 1e-12) {
            return Err(Error::HorizonExceeded {
                t,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    /// `(m, m')` at `t ∈ [0, horizon]` without range checks.
    pub(crate) fn state(&self, t: f64) -> [f64; 2] {
        if t <= 0.0 {
            return [0.0, 1.0];
        }
        self.steps[locate(&self.steps, t)].eval(t)
    }

    pub fn m(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.state(t)[0])
    }

    pub fn m_prime(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.state(t)[1])
    }

    /// `m''` by differentiating the dense output of `m'`, without using the
    /// curvature.
    pub fn m_second(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let i = locate(&self.steps, t.max(0.0));
        Ok(self.steps[i].eval_derivative(t.max(0.0))[1])
    }

    /// Writes `t,m,m_prime` at every grid point, with a header row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,m,m_prime")?;
        for t in self.grid() {
            let [m, mp] = self.state(t);
            writeln!(w, "{t},{m},{mp}")?;
        }
        Ok(())
    }

    /// Same curvature solved to a longer horizon (or `self` if already far
    /// enough).
    pub fn extended(&self, horizon: f64) -> Result<WarpingSolution> {
        if horizon <= self.horizon {
            return Ok(self.clone());
        }
        solve_warping(&self.curvature, horizon, self.rel_tol)
    }
}

/// Estimate of `lim m'(t)` with a bound on its distance to the true limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeLimit {
    pub value: f64,
    pub error_bound: f64,
}

/// `∫_T^∞ s |K(s)| ds` for a tail, with `T ≥ t_tail`.
fn tail_tau(k: &RadialCurvature, t: f64) -> f64 {
    match k.tail() {
        Tail::Zero => 0.0,
        Tail::PowerLaw { c, p } => c.abs() * k.t_tail().powf(p) * t.powf(2.0 - p) / (p - 2.0),
        Tail::Constant { c: 0.0 } => 0.0,
        Tail::Constant { .. } => f64::INFINITY,
    }
}

/// Horizon used to read off asymptotic quantities. For a power-law tail it
/// is pushed out until `∫_T^∞ s|K| ≤ 1e-4` (within a cap), so that the
/// tangent-line tail corrections below are accurate to second order.
fn asymptotic_horizon(w: &WarpingSolution) -> f64 {
    let k = w.curvature();
    match k.tail() {
        Tail::PowerLaw { c, p } => {
            let a = k.t_tail();
            let target = (c.abs() * a.powf(p) / ((p - 2.0) * 1e-4)).powf(1.0 / (p - 2.0));
            let cap = 1e4 * a.max(1.0);
            w.horizon().max(8.0 * a).max(target.min(cap))
        }
        _ => w.horizon().max(k.t_tail()),
    }
}

/// `lim m'(t)` for `K ≤ 0` with a finite moment integral.
///
/// Past the support of `K` the slope is constant and read off exactly. For a
/// power-law tail the slope at the horizon `T` is corrected by integrating
/// `-K m` over `[T, ∞)` with `m` replaced by the line of the unknown limiting
/// slope through `(T, m(T))`, which gives a linear equation for the limit.
/// The result is clamped into the rigorous bracket
/// `[m'(T), m'(T) exp(∫_T^∞ s|K|)]` (from `m(s) ≤ s m'(s)`), whose width is
/// reported as the error bound.
pub fn slope_limit(w: &WarpingSolution) -> Result<SlopeLimit> {
    let k = w.curvature();
    k.check_nonpositive()?;
    if let Tail::Constant { c } = k.tail() {
        if c < 0.0 {
            return Err(Error::Unbounded);
        }
    }
    let t_max = asymptotic_horizon(w);
    let w = w.extended(t_max)?;
    let [m, top] = w.state(t_max);
    match k.tail() {
        Tail::PowerLaw { c, p } => {
            let scale = c.abs() * k.t_tail().powf(p);
            let tau = scale * t_max.powf(2.0 - p) / (p - 2.0);
            let beta = scale * t_max.powf(1.0 - p) / (p - 1.0);
            let hi = top * tau.exp();
            let est = ((top + beta * m) / (1.0 + beta * t_max - tau)).clamp(top, hi);
            Ok(SlopeLimit {
                value: est,
                error_bound: hi - top,
            })
        }
        _ => Ok(SlopeLimit {
            value: top,
            error_bound: w.rel_tol() * top.abs(),
        }),
    }
}

/// A scalar together with an absolute error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
}

/// `c = 2π ∫_0^∞ K m dt` by quadrature of the curvature against the dense
/// warping function, plus a closed-form tail term.
pub fn total_curvature_direct(w: &WarpingSolution) -> Result<Estimate> {
    let k = w.curvature();
    k.check_nonpositive()?;
    if let Tail::Constant { c } = k.tail() {
        if c < 0.0 {
            return Err(Error::Unbounded);
        }
    }
    let t_max = asymptotic_horizon(w);
    let w = w.extended(t_max)?;
    let core_end = match k.tail() {
        Tail::PowerLaw { .. } => t_max,
        _ => k.t_tail(),
    };
    let mut knots: Vec<f64> = std::iter::once(0.0)
        .chain(k.knots_between(0.0, core_end))
        .collect();
    knots.push(core_end);
    let mut value = 0.0;
    let mut abs_error = 0.0;
    for seg in knots.windows(2) {
        let piece = k.piece_at(seg[0], seg[1]);
        let r = quad::integrate(
            |t| piece.eval(t) * w.state(t)[0],
            seg[0],
            seg[1],
            1e-14,
            1e-13,
        );
        value += r.value;
        abs_error += r.abs_error;
    }
    if let Tail::PowerLaw { c, p } = k.tail() {
        // m on [T, ∞) replaced by its tangent line at T; m' grows by at most
        // the factor exp(τ) there, which bounds the error.
        let t = t_max;
        let [m, mp] = w.state(t);
        let scale = c * k.t_tail().powf(p);
        value +=
            scale * ((m - t * mp) * t.powf(1.0 - p) / (p - 1.0) + mp * t.powf(2.0 - p) / (p - 2.0));
        let tau = tail_tau(k, t);
        abs_error += mp * tau.exp_m1() * scale.abs() * t.powf(2.0 - p) / (p - 2.0);
    }
    abs_error += w.rel_tol() * value.abs();
    Ok(Estimate {
        value: 2.0 * PI * value,
        abs_error: 2.0 * PI * abs_error,
    })
}

/// `c = 2π (1 - lim m')`.
pub fn total_curvature_isoperimetric(w: &WarpingSolution) -> Result<f64> {
    Ok(2.0 * PI * (1.0 - slope_limit(w)?.value))
}

/// Model surface of revolution `dt² + m(t)² dθ²` over a nonpositive radial
/// curvature.
#[derive(Clone, Debug)]
pub struct ModelSurface {
    warping: WarpingSolution,
    slope_limit: Option<SlopeLimit>,
    total_curvature: Option<f64>,
}

impl ModelSurface {
    pub fn new(k: &RadialCurvature, horizon: f64, rel_tol: f64) -> Result<Self> {
        k.check_nonpositive()?;
        let warping = solve_warping(k, horizon, rel_tol)?;
        Self::from_warping(warping)
    }

    pub fn from_warping(warping: WarpingSolution) -> Result<Self> {
        warping.curvature().check_nonpositive()?;
        let slope = match slope_limit(&warping) {
            Ok(s) => Some(s),
            Err(Error::Unbounded) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            total_curvature: slope.map(|s| 2.0 * PI * (1.0 - s.value)),
            slope_limit: slope,
            warping,
        })
    }

    pub fn warping(&self) -> &WarpingSolution {
        &self.warping
    }

    pub fn curvature(&self) -> &RadialCurvature {
        self.warping.curvature()
    }

    pub fn horizon(&self) -> f64 {
        self.warping.horizon()
    }

    /// `None` when the moment integral diverges.
    pub fn slope_limit(&self) -> Option<SlopeLimit> {
        self.slope_limit
    }

    /// Total curvature `c(M*)`; `None` when unbounded.
    pub fn total_curvature(&self) -> Option<f64> {
        self.total_curvature
    }

    pub(crate) fn state(&self, t: f64) -> [f64; 2] {
        self.warping.state(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hat() -> RadialCurvature {
        RadialCurvature::hat(1.0, 1.0).unwrap()
    }

    #[test]
    fn flat_solution() {
        let w = solve_warping(&RadialCurvature::zero(), 10.0, 1e-12).unwrap();
        for t in [0.0, 0.5, 3.0, 10.0] {
            assert_relative_eq!(w.m(t).unwrap(), t, max_relative = 1e-12);
            assert_relative_eq!(w.m_prime(t).unwrap(), 1.0, max_relative = 1e-12);
        }
        assert_eq!(w.m(0.0).unwrap(), 0.0);
        assert_eq!(w.m_prime(0.0).unwrap(), 1.0);
    }

    #[test]
    fn hyperbolic_solution() {
        let w = solve_warping(&RadialCurvature::constant(-1.0), 10.0, 1e-12).unwrap();
        for t in [0.1, 1.0, 2.5, 7.0, 10.0] {
            assert_relative_eq!(w.m(t).unwrap(), t.sinh(), max_relative = 1e-10);
            assert_relative_eq!(w.m_prime(t).unwrap(), t.cosh(), max_relative = 1e-10);
            assert_relative_eq!(w.m_second(t).unwrap(), t.sinh(), max_relative = 1e-7);
        }
    }

    #[test]
    fn spherical_curvature_hits_conjugate_point() {
        match solve_warping(&RadialCurvature::constant(1.0), 5.0, 1e-10) {
            Err(Error::ConjugatePoint { t }) => assert!((t - PI).abs() < 1e-8, "{t}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn horizon_and_tolerance_checks() {
        let w = solve_warping(&hat(), 4.0, 1e-10).unwrap();
        assert!(matches!(w.m(4.5), Err(Error::HorizonExceeded { .. })));
        assert!(solve_warping(&hat(), 4.0, 1e-2).is_err());
        assert!(solve_warping(&hat(), -1.0, 1e-8).is_err());
    }

    #[test]
    fn slope_of_hat_is_inside_bracket_and_exact_past_support() {
        let w = solve_warping(&hat(), 10.0, 1e-12).unwrap();
        let s = slope_limit(&w).unwrap();
        assert!(s.value >= 1.0 && s.value <= (1.0f64 / 6.0).exp());
        assert_eq!(s.value, w.m_prime(10.0).unwrap());
        assert_relative_eq!(s.value, w.m_prime(1.0).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn divergent_slope_is_unbounded() {
        let w = solve_warping(&RadialCurvature::constant(-1.0), 5.0, 1e-10).unwrap();
        assert_eq!(slope_limit(&w), Err(Error::Unbounded));
        assert_eq!(total_curvature_direct(&w), Err(Error::Unbounded));
    }

    #[test]
    fn isoperimetric_identity_on_hat() {
        let w = solve_warping(&hat(), 10.0, 1e-12).unwrap();
        let d = total_curvature_direct(&w).unwrap();
        let i = total_curvature_isoperimetric(&w).unwrap();
        assert!((d.value - i).abs() < 1e-9, "{} vs {}", d.value, i);
        assert!(d.value < 0.0);
    }

    #[test]
    fn power_law_tail_slope_is_bracketed() {
        let k = RadialCurvature::linear(
            &[0.0, 1.0],
            &[-0.5, -0.5],
            Tail::PowerLaw { c: -0.5, p: 4.0 },
        )
        .unwrap();
        let w = solve_warping(&k, 10.0, 1e-12).unwrap();
        let s = slope_limit(&w).unwrap();
        // reference: integrate much further out
        let far = solve_warping(&k, 2000.0, 1e-12).unwrap();
        let reference = far.m_prime(2000.0).unwrap();
        assert!((s.value - reference).abs() <= s.error_bound + 1e-9);
        assert!(
            (s.value - reference).abs() < 1e-6,
            "{} vs {reference}",
            s.value
        );
        let moment = k.moment_integral().unwrap().value;
        assert!(s.value >= 1.0 && s.value <= (-moment).exp());
        let d = total_curvature_direct(&w).unwrap();
        assert!((d.value - 2.0 * PI * (1.0 - s.value)).abs() < 1e-5);
    }

    #[test]
    fn csv_has_header_and_grid() {
        let w = solve_warping(&hat(), 3.0, 1e-8).unwrap();
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,m,m_prime"));
        assert_eq!(lines.next(), Some("0,0,1"));
        assert_eq!(text.lines().count(), w.grid().len() + 1);
    }
}
