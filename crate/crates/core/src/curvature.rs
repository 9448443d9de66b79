//! Radial curvature functions on `[0, ∞)`.
//!
//! A [`RadialCurvature`] is a contiguous list of core segments covering
//! `[0, t_tail]` followed by a declared tail model on `[t_tail, ∞)`. Tails are
//! never inferred from samples: the improper integral `∫ t K(t) dt` is only
//! decidable when the behaviour at infinity is stated, so each function
//! carries one of three tail classes ([`Tail`]).
//!
//! Core segments are either cubic polynomials (from linear or cubic-spline
//! interpolation, or exact restrictions of other cubics) or one of a handful
//! of closed-form [`Formula`]s. Both admit exact pointwise minima: on every
//! interval between merged breakpoints and refined crossings the minimum is
//! one of the inputs, so [`kstar`] and [`gminus`] return the selected pieces
//! themselves rather than a resampled approximation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{quad, roots};

/// Relative tolerance for value continuity at segment joints and at the
/// core/tail junction.
const JOINT_TOL: f64 = 1e-9;

/// Values at or below this are treated as nonpositive.
const SIGN_TOL: f64 = 1e-12;

/// Crossing points of the pointwise minimum are bisected until the bracket
/// cannot shrink further in floating point.
const CROSSING_XTOL: f64 = 0.0;

/// Closed-form core pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Formula {
    Constant {
        value: f64,
    },
    /// `amplitude * cos(frequency * t + phase) + offset`
    Cosine {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Smooth compactly supported bump, `amplitude * exp(1 - 1/(1 - u²))`
    /// with `u = (t - center) / width`, zero for `|u| ≥ 1`.
    Bump {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `amplitude * (1 + (t/scale)²)^(-power)`
    Lorentzian {
        amplitude: f64,
        scale: f64,
        power: f64,
    },
    /// `coefficient * (anchor / t)^exponent`
    PowerDecay {
        coefficient: f64,
        anchor: f64,
        exponent: f64,
    },
}

impl Formula {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Formula::Constant { value } => value,
            Formula::Cosine {
                amplitude,
                frequency,
                phase,
                offset,
            } => amplitude * (frequency * t + phase).cos() + offset,
            Formula::Bump {
                amplitude,
                center,
                width,
            } => {
                let u = (t - center) / width;
                let s = 1.0 - u * u;
                if s <= 0.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / s).exp()
                }
            }
            Formula::Lorentzian {
                amplitude,
                scale,
                power,
            } => amplitude * (1.0 + (t / scale).powi(2)).powf(-power),
            Formula::PowerDecay {
                coefficient,
                anchor,
                exponent,
            } => coefficient * (anchor / t.max(f64::MIN_POSITIVE)).powf(exponent),
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            Formula::Constant { value } => vec![value],
            Formula::Cosine {
                amplitude,
                frequency,
                phase,
                offset,
            } => vec![amplitude, frequency, phase, offset],
            Formula::Bump {
                amplitude,
                center,
                width,
            } => vec![amplitude, center, width],
            Formula::Lorentzian {
                amplitude,
                scale,
                power,
            } => vec![amplitude, scale, power],
            Formula::PowerDecay {
                coefficient,
                anchor,
                exponent,
            } => vec![coefficient, anchor, exponent],
        }
    }

    fn validate(&self) -> Result<()> {
        if self.params().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCurvature(format!(
                "non-finite formula parameter in {self:?}"
            )));
        }
        let bad = match *self {
            Formula::Bump { width, .. } => width <= 0.0,
            Formula::Lorentzian { scale, .. } => scale <= 0.0,
            Formula::PowerDecay { anchor, .. } => anchor <= 0.0,
            _ => false,
        };
        if bad {
            return Err(Error::InvalidCurvature(format!(
                "formula scale parameters must be positive: {self:?}"
            )));
        }
        Ok(())
    }

    /// Points inside `(a, b)` where the formula attains interior extrema.
    fn critical_points(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = Vec::new();
        match *self {
            Formula::Cosine {
                frequency, phase, ..
            } if frequency != 0.0 => {
                // extrema where frequency * t + phase = k π
                let (lo, hi) = {
                    let x = (frequency * a + phase) / std::f64::consts::PI;
                    let y = (frequency * b + phase) / std::f64::consts::PI;
                    (x.min(y), x.max(y))
                };
                let mut k = lo.ceil();
                while k <= hi && out.len() < 100_000 {
                    let t = (k * std::f64::consts::PI - phase) / frequency;
                    if t > a && t < b {
                        out.push(t);
                    }
                    k += 1.0;
                }
            }
            Formula::Bump { center, width, .. } => {
                for t in [center - width, center, center + width] {
                    if t > a && t < b {
                        out.push(t);
                    }
                }
            }
            _ => {}
        }
        out
    }

    fn sample_count(&self, a: f64, b: f64) -> usize {
        let len = (b - a).abs();
        let n = match *self {
            Formula::Constant { .. } => 1.0,
            Formula::Cosine { frequency, .. } => {
                64.0_f64.max(32.0 * frequency.abs() * len / std::f64::consts::PI)
            }
            Formula::Bump { width, .. } => 64.0_f64.max(64.0 * len / width),
            Formula::Lorentzian { scale, .. } => 64.0_f64.max(16.0 * len / scale),
            Formula::PowerDecay { .. } => 64.0,
        };
        n.min(1e6) as usize
    }
}

/// One core piece.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Piece {
    /// `Σ coeffs[i] (t - origin)^i`
    Cubic {
        origin: f64,
        coeffs: [f64; 4],
    },
    Formula {
        formula: Formula,
    },
}

impl Piece {
    pub fn zero() -> Self {
        Piece::Cubic {
            origin: 0.0,
            coeffs: [0.0; 4],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Piece::Cubic { origin, coeffs } => {
                let x = t - origin;
                coeffs[0] + x * (coeffs[1] + x * (coeffs[2] + x * coeffs[3]))
            }
            Piece::Formula { formula } => formula.eval(t),
        }
    }

    /// Taylor coefficients about `a` (cubics only).
    fn shifted(&self, a: f64) -> Option<[f64; 4]> {
        match self {
            Piece::Cubic { origin, coeffs } => {
                let x = a - origin;
                let c = coeffs;
                Some([
                    c[0] + x * (c[1] + x * (c[2] + x * c[3])),
                    c[1] + x * (2.0 * c[2] + 3.0 * x * c[3]),
                    c[2] + 3.0 * x * c[3],
                    c[3],
                ])
            }
            Piece::Formula { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Piece::Cubic { origin, coeffs } => {
                if !origin.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidCurvature(
                        "non-finite cubic coefficient".into(),
                    ));
                }
                Ok(())
            }
            Piece::Formula { formula } => formula.validate(),
        }
    }

    fn critical_points(&self, a: f64, b: f64) -> Vec<f64> {
        match self {
            Piece::Cubic { .. } => {
                let c = self.shifted(a).expect("cubic");
                quadratic_roots(c[1], 2.0 * c[2], 3.0 * c[3])
                    .into_iter()
                    .map(|x| a + x)
                    .filter(|&t| t > a && t < b)
                    .collect()
            }
            Piece::Formula { formula } => formula.critical_points(a, b),
        }
    }

    fn sample_count(&self, a: f64, b: f64) -> usize {
        match self {
            Piece::Cubic { .. } => 1,
            Piece::Formula { formula } => formula.sample_count(a, b),
        }
    }

    /// Exact supremum over `[a, b]`; every piece kind is monotone between
    /// the points returned by `critical_points`.
    fn sup_on(&self, a: f64, b: f64) -> (f64, f64) {
        let mut best = (a, self.eval(a));
        for t in self
            .critical_points(a, b)
            .into_iter()
            .chain(std::iter::once(b))
        {
            let v = self.eval(t);
            if v > best.1 {
                best = (t, v);
            }
        }
        best
    }
}

/// Real roots of `c0 + c1 x + c2 x²`, ascending.
fn quadratic_roots(c0: f64, c1: f64, c2: f64) -> Vec<f64> {
    if c2 == 0.0 {
        if c1 == 0.0 {
            return vec![];
        }
        return vec![-c0 / c1];
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return vec![];
    }
    let sq = disc.sqrt();
    let q = -0.5 * (c1 + sq.copysign(c1));
    let mut r = if q == 0.0 {
        vec![0.0]
    } else {
        vec![q / c2, c0 / q]
    };
    r.sort_by(f64::total_cmp);
    r
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub piece: Piece,
}

/// Behaviour of the curvature on `[t_tail, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail {
    Zero,
    /// `c (t_tail / t)^p` with `p > 2`.
    PowerLaw {
        c: f64,
        p: f64,
    },
    /// Constant `c`. A negative constant makes `∫ t K dt` diverge.
    Constant {
        c: f64,
    },
}

impl Tail {
    pub fn value(&self, anchor: f64, t: f64) -> f64 {
        match *self {
            Tail::Zero => 0.0,
            Tail::PowerLaw { c, p } => c * (anchor / t).powf(p),
            Tail::Constant { c } => c,
        }
    }

    fn as_piece(&self, anchor: f64) -> Piece {
        match *self {
            Tail::Zero => Piece::zero(),
            Tail::Constant { c } => Piece::Formula {
                formula: Formula::Constant { value: c },
            },
            Tail::PowerLaw { c, p } => Piece::Formula {
                formula: Formula::PowerDecay {
                    coefficient: c,
                    anchor,
                    exponent: p,
                },
            },
        }
    }

    /// `∫_anchor^∞ t K(t) dt` in closed form.
    pub fn moment(&self, anchor: f64) -> f64 {
        match *self {
            Tail::Zero => 0.0,
            Tail::PowerLaw { c, p } => c * anchor * anchor / (p - 2.0),
            Tail::Constant { c } if c < 0.0 => f64::NEG_INFINITY,
            Tail::Constant { c } if c > 0.0 => f64::INFINITY,
            Tail::Constant { .. } => 0.0,
        }
    }

    /// Supremum over `[anchor, ∞)`.
    fn sup(&self) -> f64 {
        match *self {
            Tail::Zero => 0.0,
            Tail::PowerLaw { c, .. } => c.max(0.0),
            Tail::Constant { c } => c,
        }
    }

    fn normalized(self) -> Self {
        match self {
            Tail::PowerLaw { c, .. } | Tail::Constant { c } if c == 0.0 => Tail::Zero,
            t => t,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Tail::Zero => Ok(()),
            Tail::PowerLaw { c, p } => {
                if !c.is_finite() || !p.is_finite() {
                    return Err(Error::InvalidCurvature(
                        "non-finite power-law tail parameter".into(),
                    ));
                }
                if p <= 2.0 {
                    return Err(Error::InvalidCurvature(format!(
                        "power-law tail exponent must satisfy p > 2 so that the moment integral converges (got p = {p})"
                    )));
                }
                Ok(())
            }
            Tail::Constant { c } => {
                if !c.is_finite() {
                    return Err(Error::InvalidCurvature("non-finite constant tail".into()));
                }
                Ok(())
            }
        }
    }
}

/// A locally Lipschitz radial curvature function with a declared tail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurvatureSpec", into = "CurvatureSpec")]
pub struct RadialCurvature {
    segments: Vec<Segment>,
    tail: Tail,
    t_tail: f64,
}

/// Wire format for [`RadialCurvature`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureSpec {
    pub core: CoreSpec,
    pub tail: Tail,
    pub t_tail: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoreSpec {
    /// Natural cubic spline through `(breakpoints[i], values[i])`.
    Spline {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// Piecewise linear interpolation.
    Linear {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// One formula on `[0, t_tail]`, optionally split at interior breakpoints.
    Formula {
        formula: Formula,
        #[serde(default)]
        breakpoints: Vec<f64>,
    },
    Piecewise {
        segments: Vec<Segment>,
    },
}

impl TryFrom<CurvatureSpec> for RadialCurvature {
    type Error = Error;

    fn try_from(spec: CurvatureSpec) -> Result<Self> {
        let t_tail = spec.t_tail;
        let segments = match spec.core {
            CoreSpec::Spline {
                breakpoints,
                values,
            } => {
                check_nodes(&breakpoints, &values, t_tail)?;
                natural_spline(&breakpoints, &values)
            }
            CoreSpec::Linear {
                breakpoints,
                values,
            } => {
                check_nodes(&breakpoints, &values, t_tail)?;
                linear_segments(&breakpoints, &values)
            }
            CoreSpec::Formula {
                formula,
                breakpoints,
            } => {
                let mut knots = vec![0.0];
                for &b in &breakpoints {
                    if !(b > *knots.last().unwrap() && b < t_tail) {
                        return Err(Error::InvalidCurvature(
                            "formula breakpoints must be increasing inside (0, t_tail)".into(),
                        ));
                    }
                    knots.push(b);
                }
                knots.push(t_tail);
                knots
                    .windows(2)
                    .map(|w| Segment {
                        start: w[0],
                        end: w[1],
                        piece: Piece::Formula {
                            formula: formula.clone(),
                        },
                    })
                    .collect()
            }
            CoreSpec::Piecewise { segments } => segments,
        };
        RadialCurvature::from_segments(segments, spec.tail, t_tail)
    }
}

impl From<RadialCurvature> for CurvatureSpec {
    fn from(k: RadialCurvature) -> Self {
        CurvatureSpec {
            core: CoreSpec::Piecewise {
                segments: k.segments,
            },
            tail: k.tail,
            t_tail: k.t_tail,
        }
    }
}

fn check_nodes(breakpoints: &[f64], values: &[f64], t_tail: f64) -> Result<()> {
    if breakpoints.len() < 2 || breakpoints.len() != values.len() {
        return Err(Error::InvalidCurvature(format!(
            "need at least two breakpoints with matching values (got {} breakpoints, {} values)",
            breakpoints.len(),
            values.len()
        )));
    }
    if breakpoints[0] != 0.0 {
        return Err(Error::InvalidCurvature("first breakpoint must be 0".into()));
    }
    if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidCurvature(
            "breakpoints must be strictly increasing".into(),
        ));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidCurvature("non-finite value".into()));
    }
    let last = *breakpoints.last().unwrap();
    if last != t_tail {
        return Err(Error::InvalidCurvature(format!(
            "last breakpoint {last} must equal t_tail {t_tail}"
        )));
    }
    Ok(())
}

fn linear_segments(x: &[f64], y: &[f64]) -> Vec<Segment> {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| Segment {
            start: xs[0],
            end: xs[1],
            piece: Piece::Cubic {
                origin: xs[0],
                coeffs: [ys[0], (ys[1] - ys[0]) / (xs[1] - xs[0]), 0.0, 0.0],
            },
        })
        .collect()
}

/// Natural cubic spline (zero second derivative at both ends).
fn natural_spline(x: &[f64], y: &[f64]) -> Vec<Segment> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    // Second derivatives; Thomas algorithm on the interior system.
    let mut m = vec![0.0; n];
    if n > 2 {
        let k = n - 2;
        let mut diag = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            diag[i] = 2.0 * (h[i] + h[i + 1]);
            rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h[i + 1] - (y[i + 1] - y[i]) / h[i]);
        }
        for i in 1..k {
            let w = h[i] / diag[i - 1];
            diag[i] -= w * h[i];
            rhs[i] -= w * rhs[i - 1];
        }
        m[k] = rhs[k - 1] / diag[k - 1];
        for i in (0..k - 1).rev() {
            m[i + 1] = (rhs[i] - h[i + 1] * m[i + 2]) / diag[i];
        }
    }
    (0..n - 1)
        .map(|i| Segment {
            start: x[i],
            end: x[i + 1],
            piece: Piece::Cubic {
                origin: x[i],
                coeffs: [
                    y[i],
                    (y[i + 1] - y[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0,
                    0.5 * m[i],
                    (m[i + 1] - m[i]) / (6.0 * h[i]),
                ],
            },
        })
        .collect()
}

impl RadialCurvature {
    /// Builds from explicit segments, validating contiguity, continuity at
    /// every joint and at the core/tail junction, and the tail class.
    pub fn from_segments(segments: Vec<Segment>, tail: Tail, t_tail: f64) -> Result<Self> {
        if !(t_tail.is_finite() && t_tail > 0.0) {
            return Err(Error::InvalidCurvature(format!(
                "t_tail must be positive and finite (got {t_tail})"
            )));
        }
        tail.validate()?;
        let tail = tail.normalized();
        let Some(first) = segments.first() else {
            return Err(Error::InvalidCurvature("empty core".into()));
        };
        if first.start != 0.0 {
            return Err(Error::InvalidCurvature("core must start at t = 0".into()));
        }
        for s in &segments {
            if !(s.end > s.start) {
                return Err(Error::InvalidCurvature(format!(
                    "segment [{}, {}] is empty or reversed",
                    s.start, s.end
                )));
            }
            s.piece.validate()?;
        }
        for w in segments.windows(2) {
            if w[0].end != w[1].start {
                return Err(Error::InvalidCurvature(format!(
                    "gap between segments at {} and {}",
                    w[0].end, w[1].start
                )));
            }
            let l = w[0].piece.eval(w[0].end);
            let r = w[1].piece.eval(w[1].start);
            check_joint(l, r, w[0].end, "segment joint")?;
        }
        let last = segments.last().unwrap();
        if last.end != t_tail {
            return Err(Error::InvalidCurvature(format!(
                "core ends at {} but t_tail is {t_tail}",
                last.end
            )));
        }
        check_joint(
            last.piece.eval(t_tail),
            tail.value(t_tail, t_tail),
            t_tail,
            "core/tail junction",
        )?;
        Ok(Self {
            segments,
            tail,
            t_tail,
        })
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Constant curvature `c` everywhere.
    pub fn constant(c: f64) -> Self {
        Self::from_formula(Formula::Constant { value: c }, 1.0, Tail::Constant { c })
            .expect("constant curvature is valid")
    }

    pub fn from_formula(formula: Formula, t_tail: f64, tail: Tail) -> Result<Self> {
        Self::from_segments(
            vec![Segment {
                start: 0.0,
                end: t_tail,
                piece: Piece::Formula { formula },
            }],
            tail,
            t_tail,
        )
    }

    /// Piecewise-linear interpolation; `t_tail` is the last breakpoint.
    pub fn linear(breakpoints: &[f64], values: &[f64], tail: Tail) -> Result<Self> {
        let t_tail = breakpoints.last().copied().unwrap_or(0.0);
        check_nodes(breakpoints, values, t_tail)?;
        Self::from_segments(linear_segments(breakpoints, values), tail, t_tail)
    }

    /// Natural cubic spline; `t_tail` is the last breakpoint.
    pub fn spline(breakpoints: &[f64], values: &[f64], tail: Tail) -> Result<Self> {
        let t_tail = breakpoints.last().copied().unwrap_or(0.0);
        check_nodes(breakpoints, values, t_tail)?;
        Self::from_segments(natural_spline(breakpoints, values), tail, t_tail)
    }

    /// `-amplitude * (1 - t/width)₊`, a compactly supported hat.
    pub fn hat(amplitude: f64, width: f64) -> Result<Self> {
        Self::linear(&[0.0, width], &[-amplitude, 0.0], Tail::Zero)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn t_tail(&self) -> f64 {
        self.t_tail
    }

    /// Segment boundaries, from 0 through `t_tail`.
    pub fn knots(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.segments.iter().map(|s| s.start).collect();
        k.push(self.t_tail);
        k
    }

    /// Knots inside `(a, b)`.
    pub fn knots_between(&self, a: f64, b: f64) -> impl Iterator<Item = f64> + '_ {
        let lo = self.segments.partition_point(|s| s.start <= a);
        self.segments[lo..]
            .iter()
            .map(|s| s.start)
            .chain(std::iter::once(self.t_tail))
            .take_while(move |&k| k < b)
            .filter(move |&k| k > a)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain {
                what: "radial coordinate t",
                value: t,
            });
        }
        Ok(self.value(t))
    }

    /// Evaluation without the domain check; negative `t` is mirrored.
    pub(crate) fn value(&self, t: f64) -> f64 {
        let t = t.abs();
        if t > self.t_tail {
            return self.tail.value(self.t_tail, t);
        }
        let i = self.segments.partition_point(|s| s.end < t);
        let i = i.min(self.segments.len() - 1);
        self.segments[i].piece.eval(t)
    }

    /// Piece active on `[a, b]`, with `[a, b]` inside one segment or the tail.
    pub(crate) fn piece_at(&self, a: f64, b: f64) -> Piece {
        let mid = 0.5 * (a + b);
        if mid >= self.t_tail {
            return self.tail.as_piece(self.t_tail);
        }
        let i = self.segments.partition_point(|s| s.end <= mid);
        self.segments[i.min(self.segments.len() - 1)].piece.clone()
    }

    /// Largest value over `[0, ∞)` (supremum on the tail) and where it occurs.
    pub fn sup(&self) -> (f64, f64) {
        let mut best = (self.t_tail, self.tail.sup());
        for s in &self.segments {
            let (t, v) = s.piece.sup_on(s.start, s.end);
            if v > best.1 {
                best = (t, v);
            }
        }
        best
    }

    pub fn is_nonpositive(&self) -> bool {
        self.sup().1 <= SIGN_TOL
    }

    pub fn check_nonpositive(&self) -> Result<()> {
        let (t, value) = self.sup();
        if value > SIGN_TOL {
            return Err(Error::NotNonpositive { t, value });
        }
        Ok(())
    }

    /// `∫_0^∞ t K(t) dt` for `K ≤ 0`.
    pub fn moment_integral(&self) -> Result<MomentIntegral> {
        moment_integral(self)
    }
}

fn check_joint(left: f64, right: f64, at: f64, what: &str) -> Result<()> {
    let scale = 1f64.max(left.abs()).max(right.abs());
    if (left - right).abs() > JOINT_TOL * scale {
        return Err(Error::InvalidCurvature(format!(
            "{what} at t = {at} is discontinuous ({left} vs {right})"
        )));
    }
    Ok(())
}

/// `∫_0^∞ t K(t) dt`, or `-∞` for a negative constant tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentIntegral {
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub value: f64,
    pub abs_error: f64,
}

impl MomentIntegral {
    pub fn is_divergent(&self) -> bool {
        self.value == f64::NEG_INFINITY
    }
}

pub fn moment_integral(k: &RadialCurvature) -> Result<MomentIntegral> {
    k.check_nonpositive()?;
    let mut value = 0.0;
    let mut abs_error = 0.0;
    for s in &k.segments {
        let r = quad::integrate(|t| t * s.piece.eval(t), s.start, s.end, 1e-14, 1e-14);
        value += r.value;
        abs_error += r.abs_error;
    }
    let tail = k.tail.moment(k.t_tail);
    if tail == f64::NEG_INFINITY {
        return Ok(MomentIntegral {
            value: f64::NEG_INFINITY,
            abs_error: 0.0,
        });
    }
    Ok(MomentIntegral {
        value: value + tail,
        abs_error,
    })
}

pub fn eval(k: &RadialCurvature, t: f64) -> Result<f64> {
    k.eval(t)
}

/// `K* = min{0, g, k}`.
pub fn kstar(g: &RadialCurvature, k: &RadialCurvature) -> RadialCurvature {
    pointwise_min_with_zero(&[g, k])
}

/// `G₋ = min{0, g}`.
pub fn gminus(g: &RadialCurvature) -> RadialCurvature {
    pointwise_min_with_zero(&[g])
}

/// Pointwise minimum of zero and the inputs.
pub fn pointwise_min_with_zero(inputs: &[&RadialCurvature]) -> RadialCurvature {
    let core_end = inputs.iter().map(|k| k.t_tail).fold(0.0, f64::max);
    let (tail, crossover) = tail_minimum(inputs, core_end);
    let end = crossover.max(core_end);

    let mut knots: Vec<f64> = inputs.iter().flat_map(|k| k.knots()).collect();
    knots.push(end);
    knots.retain(|&t| t <= end);
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let mut segments: Vec<Segment> = Vec::new();
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut candidates = vec![Piece::zero()];
        candidates.extend(inputs.iter().map(|k| k.piece_at(a, b)));

        let mut cuts = vec![a, b];
        for i in 0..candidates.len() {
            for j in i + 1..candidates.len() {
                cuts.extend(crossings(&candidates[i], &candidates[j], a, b));
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        for c in cuts.windows(2) {
            if !(c[1] > c[0]) {
                continue;
            }
            let mid = 0.5 * (c[0] + c[1]);
            let chosen = candidates
                .iter()
                .min_by(|p, q| p.eval(mid).total_cmp(&q.eval(mid)))
                .expect("nonempty")
                .clone();
            match segments.last_mut() {
                Some(last) if last.piece == chosen => last.end = c[1],
                _ => segments.push(Segment {
                    start: c[0],
                    end: c[1],
                    piece: chosen,
                }),
            }
        }
    }
    RadialCurvature::from_segments(segments, tail, end)
        .expect("pointwise minimum of valid curvatures is valid")
}

/// Zeros of `p - q` inside `(a, b)`, refined by bisection.
fn crossings(p: &Piece, q: &Piece, a: f64, b: f64) -> Vec<f64> {
    let diff = |t: f64| p.eval(t) - q.eval(t);
    let mut grid = vec![a, b];
    match (p.shifted(a), q.shifted(a)) {
        (Some(cp), Some(cq)) => {
            // Difference is a cubic; it is monotone between its critical points.
            let d = [cp[0] - cq[0], cp[1] - cq[1], cp[2] - cq[2], cp[3] - cq[3]];
            grid.extend(
                quadratic_roots(d[1], 2.0 * d[2], 3.0 * d[3])
                    .into_iter()
                    .map(|x| a + x)
                    .filter(|&t| t > a && t < b),
            );
        }
        _ => {
            let n = p.sample_count(a, b).max(q.sample_count(a, b)).max(64);
            grid.extend((1..n).map(|i| a + (b - a) * i as f64 / n as f64));
            grid.extend(p.critical_points(a, b));
            grid.extend(q.critical_points(a, b));
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut out = Vec::new();
    let vals: Vec<f64> = grid.iter().map(|&t| diff(t)).collect();
    for i in 0..grid.len() - 1 {
        let (l, r) = (vals[i], vals[i + 1]);
        if l == 0.0 && i > 0 {
            out.push(grid[i]);
        }
        if l * r < 0.0 {
            out.push(roots::bisect(diff, grid[i], grid[i + 1], CROSSING_XTOL));
        }
    }
    out
}

/// The eventual minimum of zero and the input tails, re-anchored at the
/// returned crossover point beyond which it is the minimum everywhere.
fn tail_minimum(inputs: &[&RadialCurvature], core_end: f64) -> (Tail, f64) {
    // Candidates as (tail, anchor).
    let mut cands: Vec<(Tail, f64)> = inputs.iter().map(|k| (k.tail, k.t_tail)).collect();
    cands.push((Tail::Zero, core_end));

    // Eventual ordering key: negative constants first (most negative wins),
    // then negative power laws by slowest decay, then zero.
    let rank = |t: &(Tail, f64)| -> (u8, f64, f64) {
        match t.0 {
            Tail::Constant { c } if c < 0.0 => (0, c, 0.0),
            Tail::PowerLaw { c, p } if c < 0.0 => (1, p, c * t.1.powf(p)),
            _ => (2, 0.0, 0.0),
        }
    };
    let winner = *cands
        .iter()
        .min_by(|x, y| {
            let (a, b) = (rank(x), rank(y));
            a.0.cmp(&b.0)
                .then(a.1.total_cmp(&b.1))
                .then(a.2.total_cmp(&b.2))
        })
        .expect("zero candidate present");

    let mut crossover = core_end;
    for c in &cands {
        let t = last_below(c, &winner);
        if t > crossover {
            crossover = t;
        }
    }
    let tail = match winner.0 {
        Tail::PowerLaw { c, p } if c < 0.0 => Tail::PowerLaw {
            c: c * (winner.1 / crossover).powf(p),
            p,
        },
        Tail::Constant { c } if c < 0.0 => Tail::Constant { c },
        _ => Tail::Zero,
    };
    (tail, crossover)
}

/// Supremum of `{t : cand(t) < winner(t)}`, or 0 if empty.
fn last_below(cand: &(Tail, f64), winner: &(Tail, f64)) -> f64 {
    let (Tail::PowerLaw { c, p }, a) = *cand else {
        return 0.0;
    };
    if c >= 0.0 {
        return 0.0;
    }
    match winner.0 {
        Tail::Constant { c: cw } if cw < 0.0 => {
            // c (a/t)^p < cw  <=>  t < a (c / cw)^{1/p}
            a * (c / cw).powf(1.0 / p)
        }
        Tail::PowerLaw { c: cw, p: pw } if cw < 0.0 && p > pw => {
            let ratio = (c * a.powf(p)) / (cw * winner.1.powf(pw));
            ratio.powf(1.0 / (p - pw))
        }
        _ => 0.0,
    }
}
