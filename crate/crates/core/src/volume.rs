//! Unit-sphere volumes, the net function, cap and model-ball volumes, and
//! volume growth ratios between models.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::curvature::Tail;
use crate::error::{Error, Result};
use crate::numeric::quad;
use crate::warping::WarpingSolution;

/// Bishop–Gromov monotonicity slack.
pub const MONOTONE_TOL: f64 = 1e-9;

/// `∫_0^π sin^j`, by the Wallis recurrence.
fn full_sin_power(j: usize) -> f64 {
    let (mut even, mut odd) = (PI, 2.0);
    for i in 2..=j {
        let v = (i as f64 - 1.0) / i as f64;
        if i % 2 == 0 {
            even *= v;
        } else {
            odd *= v;
        }
    }
    if j.is_multiple_of(2) {
        even
    } else {
        odd
    }
}

/// `∫_0^x cos^j`, by the reduction formula.
fn cos_power_integral(j: usize, x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    let mut prev = x; // j = 0
    let mut cur = s; // j = 1
    if j == 0 {
        return prev;
    }
    let mut cpow = 1.0; // cos^{i-1}
    for i in 2..=j {
        cpow *= c;
        let next = cpow * s / i as f64 + (i as f64 - 1.0) / i as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Volume of the unit `k`-sphere: `ω_0 = 2`, `ω_k = ω_{k-1} ∫_0^π sin^{k-1}`.
pub fn sphere_volume(k: usize) -> f64 {
    let mut omega = 2.0;
    for j in 1..=k {
        omega *= full_sin_power(j - 1);
    }
    omega
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereVolume {
    pub dim: usize,
    pub omega: f64,
}

impl SphereVolume {
    pub fn of(dim: usize) -> Self {
        Self {
            dim,
            omega: sphere_volume(dim),
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain {
            what: "dimension n (must be at least 2)",
            value: n as f64,
        });
    }
    Ok(())
}

fn check_angle(r: f64) -> Result<()> {
    if !(0.0..=PI).contains(&r) {
        return Err(Error::Domain {
            what: "angle (must lie in [0, π])",
            value: r,
        });
    }
    Ok(())
}

/// Fraction of the unit `(n-1)`-sphere within angle `r` of a point:
/// `F(r) = ∫_0^r sin^{n-2} / ∫_0^π sin^{n-2}`.
///
/// Written about `π/2` as `1/2 ± ∫_0^{|π/2 - r|} cos^{n-2} / I`, which makes
/// `F(π/2) = 1/2` and `F(π - r) = 1 - F(r)` hold exactly.
pub fn net_function(n: usize, r: f64) -> Result<f64> {
    check_n(n)?;
    check_angle(r)?;
    let j = n - 2;
    let x = FRAC_PI_2 - r;
    let half = cos_power_integral(j, x.abs()) / full_sin_power(j);
    let v = if x >= 0.0 { 0.5 - half } else { 0.5 + half };
    Ok(v.clamp(0.0, 1.0))
}

/// Volume of the geodesic ball of radius `delta` in the unit `(n-1)`-sphere,
/// `ω_{n-2} ∫_0^δ sin^{n-2}`, by adaptive quadrature.
pub fn cap_volume(n: usize, delta: f64) -> Result<f64> {
    check_n(n)?;
    check_angle(delta)?;
    let j = (n - 2) as i32;
    let r = quad::integrate(|t| t.sin().powi(j), 0.0, delta, 1e-15, 1e-14);
    Ok(sphere_volume(n - 2) * r.value)
}

/// `ω_{n-1} ∫_0^t m^{n-1}`, the volume of the radius-`t` ball in the n-model
/// with warping function `m`.
pub fn model_ball_volume(n: usize, w: &WarpingSolution, t: f64) -> Result<f64> {
    check_n(n)?;
    w.m(t)?;
    Ok(sphere_volume(n - 1) * warped_integral(n, w, 0.0, t))
}

/// `∫_a^b m^{n-1}` split at the solver's step boundaries, where the dense
/// output is polynomial.
fn warped_integral(n: usize, w: &WarpingSolution, a: f64, b: f64) -> f64 {
    let e = (n - 1) as i32;
    let mut knots = vec![a];
    knots.extend(w.grid().into_iter().filter(|&s| s > a && s < b));
    knots.push(b);
    quad::integrate_piecewise(|s| w.state(s)[0].powi(e), &knots, 0.0, 1e-13).value
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthSample {
    pub t: f64,
    pub vol_num: f64,
    pub vol_den: f64,
    pub ratio: f64,
}

/// Sampled `vol B_t(p) / vol B_t(p̃)` with a bracketed limit estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRatio {
    pub samples: Vec<GrowthSample>,
    /// Ratio at the last horizon.
    pub limit_estimate: f64,
    /// `[last - |last - previous|, last]` (lower end clamped at 0); the upper
    /// end is widened by the same amount when the sequence is not monotone.
    pub bracket: [f64; 2],
    pub monotone_nonincreasing: bool,
}

impl GrowthRatio {
    /// Writes `t,vol_num,vol_den,ratio` rows with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,vol_num,vol_den,ratio")?;
        for s in &self.samples {
            writeln!(w, "{},{},{},{}", s.t, s.vol_num, s.vol_den, s.ratio)?;
        }
        Ok(())
    }
}

/// Ratios of model ball volumes at each horizon.
///
/// Fails with [`Error::ConditionB1Violated`] when the denominator model is
/// classified as having finite total volume.
pub fn growth_ratio(
    n: usize,
    numerator: &WarpingSolution,
    denominator: &WarpingSolution,
    horizons: &[f64],
) -> Result<GrowthRatio> {
    check_n(n)?;
    if horizons.is_empty() {
        return Err(Error::InvalidArgument("no horizons given".into()));
    }
    if horizons.iter().any(|&t| !(t > 0.0)) || horizons.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "horizons must be positive and strictly increasing".into(),
        ));
    }
    if let Ok(ModelVolume::Finite { .. }) = model_volume_growth(denominator, n) {
        return Err(Error::ConditionB1Violated);
    }
    ratio_series(n, numerator, denominator, horizons)
}

/// [`growth_ratio`] without the finite-volume check on the denominator.
pub(crate) fn ratio_series(
    n: usize,
    numerator: &WarpingSolution,
    denominator: &WarpingSolution,
    horizons: &[f64],
) -> Result<GrowthRatio> {
    let mut samples = Vec::with_capacity(horizons.len());
    for &t in horizons {
        let vol_num = model_ball_volume(n, numerator, t)?;
        let vol_den = model_ball_volume(n, denominator, t)?;
        samples.push(GrowthSample {
            t,
            vol_num,
            vol_den,
            ratio: vol_num / vol_den,
        });
    }
    let monotone = first_violation(&samples).is_none();
    let last = samples.last().unwrap().ratio;
    let gap = if samples.len() > 1 {
        (last - samples[samples.len() - 2].ratio).abs()
    } else {
        0.0
    };
    let hi = if monotone { last } else { last + gap };
    Ok(GrowthRatio {
        samples,
        limit_estimate: last,
        bracket: [(last - gap).max(0.0), hi],
        monotone_nonincreasing: monotone,
    })
}

fn first_violation(samples: &[GrowthSample]) -> Option<(GrowthSample, GrowthSample)> {
    samples
        .windows(2)
        .find(|w| w[1].ratio > w[0].ratio + MONOTONE_TOL)
        .map(|w| (w[0], w[1]))
}

/// Result of [`bishop_monotonicity_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityCheck {
    pub holds: bool,
    /// First consecutive pair whose ratio increases by more than the slack.
    pub violation: Option<(GrowthSample, GrowthSample)>,
}

/// Whether the sampled ratios are nonincreasing within [`MONOTONE_TOL`].
pub fn bishop_monotonicity_check(r: &GrowthRatio) -> MonotonicityCheck {
    let violation = first_violation(&r.samples);
    MonotonicityCheck {
        holds: violation.is_none(),
        violation,
    }
}

/// Whether the total volume of an n-model is infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelVolume {
    Divergent,
    Finite { limit: f64 },
}

/// A decaying solution is accepted as exactly decaying when its growing
/// exponential coefficient is below this fraction of `m(T)`.
const DECAY_TOL: f64 = 1e-8;

/// Classifies `lim_{t→∞} vol B_t(p̃)` from the warping solution at the start
/// of the declared tail, where the ODE is solved in closed form (zero and
/// constant tails) or bounded (power-law tails).
pub fn model_volume_growth(w: &WarpingSolution, n: usize) -> Result<ModelVolume> {
    check_n(n)?;
    let k = w.curvature();
    if k.is_nonpositive() {
        // m'' ≥ 0 gives m(t) ≥ t.
        return Ok(ModelVolume::Divergent);
    }
    let t = k.t_tail();
    let w = w.extended(t)?;
    let [m, mp] = w.state(t);
    match k.tail() {
        Tail::Zero => {
            if mp < 0.0 {
                return Err(Error::ConjugatePoint { t: t + m / -mp });
            }
            Ok(ModelVolume::Divergent)
        }
        Tail::Constant { c } if c > 0.0 => {
            let l = c.sqrt();
            // m = m(T) cos(l s) + m'(T)/l sin(l s) vanishes first at
            // s = (π - atan2(m l, m')) / l … shifted into (0, π/l].
            let phase = (m * l).atan2(mp);
            Err(Error::ConjugatePoint {
                t: t + (PI - phase) / l,
            })
        }
        Tail::Constant { c } => {
            let l = (-c).sqrt();
            let a = 0.5 * (m + mp / l);
            let b = 0.5 * (m - mp / l);
            if a.abs() <= DECAY_TOL * m {
                let e = (n - 1) as i32;
                let core = warped_integral(n, &w, 0.0, t);
                let tail = b.powi(e) / ((n - 1) as f64 * l);
                Ok(ModelVolume::Finite {
                    limit: sphere_volume(n - 1) * (core + tail),
                })
            } else if a > 0.0 {
                Ok(ModelVolume::Divergent)
            } else {
                Err(Error::ConjugatePoint {
                    t: t + (-b / a).ln() / (2.0 * l),
                })
            }
        }
        Tail::PowerLaw { c, p } => {
            if c < 0.0 {
                if mp >= 0.0 {
                    return Ok(ModelVolume::Divergent);
                }
            } else if mp > 0.0 {
                // While m' > 0 the tail is concave, m ≤ m(T) + m'(T)(s - T),
                // so m' drops by at most the integral of K against that line.
                let scale = c * t.powf(p);
                let drop = scale
                    * ((m - t * mp) * t.powf(1.0 - p) / (p - 1.0)
                        + mp * t.powf(2.0 - p) / (p - 2.0));
                if drop < mp {
                    return Ok(ModelVolume::Divergent);
                }
            }
            Err(Error::Unresolved(format!(
                "power-law tail with m'({t}) = {mp} does not determine the model volume"
            )))
        }
    }
}
