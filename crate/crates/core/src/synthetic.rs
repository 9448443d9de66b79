//! Rotationally symmetric pole manifolds `dt² + g(t)² dθ²_{S^{n-1}}` used as
//! ground truth: their radial curvatures, ray sets and volumes are all
//! computable.

use serde::{Deserialize, Serialize};

use crate::curvature::{CoreSpec, CurvatureSpec, Piece, RadialCurvature, Segment, Tail};
use crate::error::{Error, Result};
use crate::volume::sphere_volume;
use crate::warping::{solve_warping, WarpingSolution};

/// Offset used to take the `t → 0` limit of `-g''/g`.
const POLE_OFFSET: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct RotSymManifold {
    n: usize,
    warping: WarpingSolution,
}

/// Wire format: a curvature plus the dimension.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    pub n: usize,
    pub core: CoreSpec,
    pub tail: Tail,
    pub t_tail: f64,
}

impl ManifoldSpec {
    pub fn curvature(&self) -> Result<RadialCurvature> {
        RadialCurvature::try_from(CurvatureSpec {
            core: self.core.clone(),
            tail: self.tail,
            t_tail: self.t_tail,
        })
    }
}

impl RotSymManifold {
    /// Solves for the warping function generated by `curvature`.
    pub fn new(n: usize, curvature: &RadialCurvature, horizon: f64, rel_tol: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain {
                what: "dimension n (must be at least 2)",
                value: n as f64,
            });
        }
        Ok(Self {
            n,
            warping: solve_warping(curvature, horizon, rel_tol)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
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

    /// Radial sectional curvature `-g''/g`, read from the generating
    /// curvature (exact).
    pub fn radial_sectional(&self, t: f64) -> Result<f64> {
        self.warping.m(t)?;
        self.curvature().eval(t)
    }

    /// Normalized radial Ricci curvature; all radial sectional curvatures
    /// coincide on a rotationally symmetric metric, so it equals
    /// [`radial_sectional`](Self::radial_sectional).
    pub fn radial_ricci(&self, t: f64) -> Result<f64> {
        self.radial_sectional(t)
    }

    /// `-g''/g` from the metric alone, differentiating the dense output of
    /// `g'`. At the pole the limit is taken by linear extrapolation from
    /// two nearby points.
    pub fn radial_sectional_from_metric(&self, t: f64) -> Result<f64> {
        let w = &self.warping;
        let ratio = |s: f64| -> Result<f64> { Ok(-w.m_second(s)? / w.m(s)?) };
        if t < POLE_OFFSET {
            w.m(t)?;
            let (a, b) = (ratio(POLE_OFFSET)?, ratio(2.0 * POLE_OFFSET)?);
            let slope = (b - a) / POLE_OFFSET;
            return Ok(a + slope * (t - POLE_OFFSET));
        }
        ratio(t)
    }

    /// Volume of the set of ray directions at the pole.
    ///
    /// Every meridian is a ray when `g' > 0` everywhere; that is certified
    /// when the curvature is nonpositive, or when `g'` is positive on the
    /// solved range and the declared tail is nonpositive (so `g'` cannot
    /// decrease afterwards). Other instances are rejected.
    pub fn ray_mass(&self) -> Result<f64> {
        let full = sphere_volume(self.n - 1);
        let k = self.curvature();
        if k.is_nonpositive() {
            return Ok(full);
        }
        let tail_ok = match k.tail() {
            Tail::Zero => true,
            Tail::PowerLaw { c, .. } | Tail::Constant { c } => c <= 0.0,
        };
        if !tail_ok {
            return Err(Error::Unsupported(
                "positive curvature tail: ray set not determined".into(),
            ));
        }
        let w = self.warping.extended(k.t_tail())?;
        let grid = w.grid();
        for pair in grid.windows(2) {
            for i in 0..8 {
                let t = pair[0] + (pair[1] - pair[0]) * i as f64 / 8.0;
                if w.state(t)[1] <= 0.0 {
                    return Err(Error::Unsupported(format!(
                        "g' ≤ 0 at t = {t}: ray set not determined"
                    )));
                }
            }
        }
        if w.state(w.horizon())[1] <= 0.0 {
            return Err(Error::Unsupported("g' ≤ 0 at the horizon".into()));
        }
        Ok(full)
    }
}

/// `min_v Ric(γ_v')` on a pole manifold: the metric curvature `-g''/g`
/// sampled on a grid of spacing at most `grid_step` and interpolated by local
/// cubics. Stencils never straddle a knot of the generating curvature, where
/// it may only be continuous. The tail is the generating curvature's tail
/// re-anchored at `t_max`.
pub fn curvature_envelope(
    mfd: &RotSymManifold,
    t_max: f64,
    grid_step: f64,
) -> Result<RadialCurvature> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::Domain {
            what: "grid step",
            value: grid_step,
        });
    }
    if !(t_max > 0.0) {
        return Err(Error::Domain {
            what: "envelope horizon",
            value: t_max,
        });
    }
    let k = mfd.curvature();
    let mut breaks = vec![0.0];
    breaks.extend(k.knots_between(0.0, t_max));
    breaks.push(t_max);

    let mut pieces = Vec::with_capacity(breaks.len() - 1);
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let count = ((b - a) / grid_step).ceil().max(1.0) as usize;
        let nodes: Vec<f64> = (0..=count)
            .map(|i| {
                if i == count {
                    b
                } else {
                    a + (b - a) * i as f64 / count as f64
                }
            })
            .collect();
        let values = nodes
            .iter()
            .map(|&t| mfd.radial_sectional_from_metric(t))
            .collect::<Result<Vec<_>>>()?;
        pieces.push((nodes, values));
    }

    let tail = if t_max >= k.t_tail() {
        let v = k.tail().value(k.t_tail(), t_max);
        // The sampled value agrees with the tail to solver accuracy; snap it
        // so the junction is exact.
        let last = pieces.last_mut().expect("at least one piece");
        *last.1.last_mut().expect("nonempty") = v;
        match k.tail() {
            Tail::PowerLaw { p, .. } => Tail::PowerLaw { c: v, p },
            other => other,
        }
    } else {
        Tail::Constant {
            c: *pieces.last().and_then(|p| p.1.last()).expect("nonempty"),
        }
    };

    let mut segments = Vec::new();
    for (nodes, values) in &pieces {
        let cells = nodes.len() - 1;
        let width = nodes.len().min(4);
        for i in 0..cells {
            let j = i.saturating_sub(1).min(nodes.len() - width);
            let origin = nodes[i];
            segments.push(Segment {
                start: origin,
                end: nodes[i + 1],
                piece: Piece::Cubic {
                    origin,
                    coeffs: interpolating_cubic(
                        &nodes[j..j + width],
                        &values[j..j + width],
                        origin,
                    ),
                },
            });
        }
    }
    RadialCurvature::from_segments(segments, tail, t_max)
}

/// Monomial coefficients about `origin` of the polynomial through up to four
/// points, from its Newton form.
fn interpolating_cubic(x: &[f64], y: &[f64], origin: f64) -> [f64; 4] {
    let n = x.len();
    let mut d = y.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            d[i] = (d[i] - d[i - 1]) / (x[i] - x[i - level]);
        }
    }
    // Horner on the Newton form: p = d0 + (u - a0)(d1 + (u - a1)(d2 + ...)).
    let mut c = [0.0; 4];
    c[0] = d[n - 1];
    for i in (0..n - 1).rev() {
        let shift = x[i] - origin;
        let mut next = [0.0; 4];
        for p in 0..3 {
            next[p + 1] += c[p];
            next[p] -= shift * c[p];
        }
        next[0] += d[i];
        c = next;
    }
    c
}
