//! Decision procedures: the critical angle `δ(K*)`, the volume-growth
//! threshold `1 - F(δ)`, and the sufficient conditions for a manifold with
//! radial curvature bounded below by a model to be diffeomorphic to `Rⁿ`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::curvature::{gminus, kstar, MomentIntegral, RadialCurvature};
use crate::error::{Error, Result};
use crate::synthetic::RotSymManifold;
use crate::volume::{model_volume_growth, net_function, ratio_series, GrowthRatio, ModelVolume};
use crate::warping::{solve_warping, WarpingSolution};

/// Slack when comparing a growth bracket against the threshold.
const THRESHOLD_SLACK: f64 = 1e-12;

/// Slack when checking that a synthetic manifold's curvature dominates the
/// model's.
const DOMINATION_SLACK: f64 = 1e-12;

/// `δ(K*) = (π/2) exp(∫ t K* dt)`, or 0 when the integral diverges.
pub fn delta_threshold(kstar: &RadialCurvature) -> Result<f64> {
    let moment = kstar.moment_integral()?;
    Ok(delta_from_moment(&moment))
}

fn delta_from_moment(moment: &MomentIntegral) -> f64 {
    if moment.is_divergent() {
        0.0
    } else {
        FRAC_PI_2 * moment.value.exp()
    }
}

/// `1 - F(δ)`: the lower bound the volume growth must meet.
pub fn threshold(n: usize, delta: f64) -> Result<f64> {
    Ok(1.0 - net_function(n, delta)?)
}

/// Where the volume growth of `(M, p)` comes from.
#[derive(Clone, Copy, Debug)]
pub enum GrowthSource<'a> {
    /// A synthetic pole manifold; ratios are computed.
    Manifold(&'a RotSymManifold),
    /// An externally asserted bracket `[lo, hi]` for the limit.
    Bracket { lo: f64, hi: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum B2Status {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    DiffeoRn,
    Inconclusive,
    DegenerateRigidity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Radial Ricci bound `G`, radial sectional bound `K`, threshold from
    /// `K* = min{0, G, K}`.
    Main,
    /// Radial sectional bound `G`, threshold from `G₋ = min{0, G}`.
    Corollary,
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub rel_tol: f64,
    /// Radii at which ball volumes are compared.
    pub horizons: Vec<f64>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            horizons: vec![2.0, 4.0, 8.0, 16.0],
        }
    }
}

/// Outcome of a criterion check. Field order is fixed for diffing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: Criterion,
    pub n: usize,
    pub moment: MomentIntegral,
    pub delta: f64,
    pub threshold: f64,
    /// Whether the manifold's curvature was checked (or declared) to be
    /// bounded below by the model's.
    pub curvature_bounds_hold: bool,
    pub b1_holds: bool,
    pub finite_model_volume: bool,
    pub growth: Option<GrowthRatio>,
    pub growth_limit: Option<[f64; 2]>,
    pub b2: B2Status,
    pub verdict: Verdict,
    pub diagnostics: Vec<String>,
}

fn b2_status(bracket: [f64; 2], threshold: f64) -> B2Status {
    if bracket[0] >= threshold - THRESHOLD_SLACK {
        B2Status::Holds
    } else if bracket[1] < threshold - THRESHOLD_SLACK {
        B2Status::Fails
    } else {
        B2Status::Inconclusive
    }
}

fn check_options(opts: &CheckOptions) -> Result<f64> {
    let h = &opts.horizons;
    if h.is_empty() || h.iter().any(|&t| !(t > 0.0)) || h.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(
            "horizons must be nonempty, positive and strictly increasing".into(),
        ));
    }
    Ok(*h.last().unwrap())
}

/// Lowest value of `k(t) - bound(t)` over a uniform sample of `[0, t_max]`
/// and the declared tails, with where it occurs.
fn domination_gap(k: &RadialCurvature, bound: &RadialCurvature, t_max: f64) -> (f64, f64) {
    let far = t_max.max(k.t_tail()).max(bound.t_tail());
    let count = 2000;
    (0..=count)
        .map(|i| {
            let t = far * i as f64 / count as f64;
            (t, k.value(t) - bound.value(t))
        })
        .chain(std::iter::once((f64::INFINITY, tail_gap(k, bound))))
        .fold(
            (0.0, f64::INFINITY),
            |acc, (t, d)| if d < acc.1 { (t, d) } else { acc },
        )
}

/// `lim (k - bound)` as `t → ∞` from the declared tails.
fn tail_gap(k: &RadialCurvature, bound: &RadialCurvature) -> f64 {
    use crate::curvature::Tail;
    let limit = |t: Tail| match t {
        Tail::Constant { c } => c,
        _ => 0.0,
    };
    limit(k.tail()) - limit(bound.tail())
}

struct Assembly<'a> {
    criterion: Criterion,
    n: usize,
    lower: &'a RadialCurvature,
    bounds: Vec<&'a RadialCurvature>,
    reduced: RadialCurvature,
    numerator: GrowthSource<'a>,
}

fn assemble(a: Assembly<'_>, opts: &CheckOptions) -> Result<CriterionReport> {
    let t_max = check_options(opts)?;
    if a.n < 2 {
        return Err(Error::Domain {
            what: "dimension n (must be at least 2)",
            value: a.n as f64,
        });
    }
    let mut diagnostics = Vec::new();
    let moment = a.reduced.moment_integral()?;
    let delta = delta_from_moment(&moment);
    let threshold = threshold(a.n, delta)?;

    // Condition (B-1): classify the n-model's volume from its warping
    // function at the start of the declared tail.
    let classify_at = a.lower.t_tail().max(1e-3);
    let head = solve_warping(a.lower, classify_at, opts.rel_tol)?;
    let volume = model_volume_growth(&head, a.n);
    let (b1_holds, finite_model_volume) = match &volume {
        Ok(ModelVolume::Divergent) => (true, false),
        Ok(ModelVolume::Finite { limit }) => {
            diagnostics.push(format!(
                "FiniteModelVolume: n-model volume converges to {limit}"
            ));
            (false, true)
        }
        Err(Error::Unresolved(msg)) => {
            diagnostics.push(format!("model volume growth unresolved: {msg}"));
            (false, false)
        }
        Err(e) => return Err(e.clone()),
    };

    let mut curvature_bounds_hold = true;
    let (growth, growth_limit) = match a.numerator {
        GrowthSource::Bracket { lo, hi } => {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
                return Err(Error::InvalidArgument(format!(
                    "growth bracket [{lo}, {hi}] must satisfy 0 ≤ lo ≤ hi"
                )));
            }
            diagnostics.push("growth bracket and curvature bounds declared by caller".into());
            (None, Some([lo, hi]))
        }
        GrowthSource::Manifold(mfd) => {
            if mfd.dim() != a.n {
                return Err(Error::InvalidArgument(format!(
                    "manifold dimension {} differs from n = {}",
                    mfd.dim(),
                    a.n
                )));
            }
            for bound in &a.bounds {
                let (t, gap) = domination_gap(mfd.curvature(), bound, t_max);
                if gap < -DOMINATION_SLACK {
                    curvature_bounds_hold = false;
                    diagnostics.push(format!(
                        "manifold curvature falls below the model bound by {} at t = {t}",
                        -gap
                    ));
                }
            }
            if b1_holds {
                let model = solve_warping(a.lower, t_max.max(classify_at), opts.rel_tol)?;
                let own: WarpingSolution = mfd.warping().extended(t_max)?;
                let g = ratio_series(a.n, &own, &model, &opts.horizons)?;
                if !g.monotone_nonincreasing {
                    diagnostics
                        .push("volume ratio increases between horizons; bracket widened".into());
                }
                let bracket = g.bracket;
                (Some(g), Some(bracket))
            } else {
                diagnostics
                    .push("growth ratio not evaluated: model volume does not diverge".into());
                (None, None)
            }
        }
    };

    let b2 = match growth_limit {
        Some(b) => b2_status(b, threshold),
        None => B2Status::Inconclusive,
    };
    let met = curvature_bounds_hold && b1_holds && b2 == B2Status::Holds;
    let verdict =
        if a.criterion == Criterion::Corollary && finite_model_volume && curvature_bounds_hold {
            Verdict::DiffeoRn
        } else if moment.is_divergent() {
            if met {
                Verdict::DegenerateRigidity
            } else {
                Verdict::Inconclusive
            }
        } else if met {
            Verdict::DiffeoRn
        } else {
            Verdict::Inconclusive
        };
    if b2 == B2Status::Fails {
        diagnostics.push(
            "growth is below the threshold; the criterion is only sufficient, so nothing follows"
                .into(),
        );
    }
    Ok(CriterionReport {
        criterion: a.criterion,
        n: a.n,
        moment,
        delta,
        threshold,
        curvature_bounds_hold,
        b1_holds,
        finite_model_volume,
        growth,
        growth_limit,
        b2,
        verdict,
        diagnostics,
    })
}

/// Radial Ricci curvature bounded below by `g`, radial sectional by `k`.
pub fn main_theorem_check(
    n: usize,
    g: &RadialCurvature,
    k: &RadialCurvature,
    numerator: GrowthSource<'_>,
    opts: &CheckOptions,
) -> Result<CriterionReport> {
    assemble(
        Assembly {
            criterion: Criterion::Main,
            n,
            lower: g,
            bounds: vec![g, k],
            reduced: kstar(g, k),
            numerator,
        },
        opts,
    )
}

/// Radial sectional curvature bounded below by `g`.
pub fn corollary_check(
    n: usize,
    g: &RadialCurvature,
    numerator: GrowthSource<'_>,
    opts: &CheckOptions,
) -> Result<CriterionReport> {
    assemble(
        Assembly {
            criterion: Criterion::Corollary,
            n,
            lower: g,
            bounds: vec![g],
            reduced: gminus(g),
            numerator,
        },
        opts,
    )
}
