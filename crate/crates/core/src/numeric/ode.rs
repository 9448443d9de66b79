//! Dormand–Prince 5(4) with Hairer's continuous extension.
//!
//! The stepper hands out one accepted step at a time so callers can watch
//! for events (sign changes, boundary crossings) and stop early. Each step
//! carries its own interpolant.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its quartic interpolant.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn y0(&self) -> [f64; N] {
        self.rcont[0]
    }

    pub fn y1(&self) -> [f64; N] {
        let mut y = [0.0; N];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.rcont[0][i] + self.rcont[1][i];
        }
        y
    }

    /// Interpolated state. Also usable slightly outside the step, where it
    /// extrapolates the same polynomial.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let mut y = [0.0; N];
        for (i, yi) in y.iter_mut().enumerate() {
            let r = &self.rcont;
            *yi = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
        }
        y
    }

    /// Time derivative of the interpolant.
    pub fn eval_derivative(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let d3 = 1.0 - 2.0 * s;
        let d4 = s * (2.0 - 3.0 * s);
        let d5 = 2.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
        let mut y = [0.0; N];
        for (i, yi) in y.iter_mut().enumerate() {
            let r = &self.rcont;
            *yi = (r[1][i] + d3 * r[2][i] + d4 * r[3][i] + d5 * r[4][i]) / self.h;
        }
        y
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Self {
        Self { rel, abs }
    }
}

pub struct Stepper<F, const N: usize> {
    f: F,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    t_end: f64,
    tol: Tolerance,
    pub evaluations: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl<F, const N: usize> Stepper<F, N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(mut f: F, t0: f64, y0: [f64; N], t_end: f64, tol: Tolerance) -> Self {
        let k1 = f(t0, &y0);
        let mut st = Self {
            f,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            t_end,
            tol,
            evaluations: 1,
        };
        st.h = st.initial_step();
        st
    }

    pub fn with_initial_step(mut self, h: f64) -> Self {
        if h > 0.0 {
            self.h = h.min(self.t_end - self.t);
        }
        self
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> [f64; N] {
        self.y
    }

    /// Last proposed step size; useful to warm-start a follow-on stepper.
    pub fn step_size(&self) -> f64 {
        self.h
    }

    fn scale(&self, a: &[f64; N], b: &[f64; N]) -> [f64; N] {
        let mut s = [0.0; N];
        for i in 0..N {
            s[i] = self.tol.abs + self.tol.rel * a[i].abs().max(b[i].abs());
        }
        s
    }

    fn rms(v: &[f64; N], sk: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            acc += (v[i] / sk[i]).powi(2);
        }
        (acc / N as f64).sqrt()
    }

    fn initial_step(&mut self) -> f64 {
        let span = self.t_end - self.t;
        if span <= 0.0 {
            return 0.0;
        }
        let sk = self.scale(&self.y, &self.y);
        let d0 = Self::rms(&self.y, &sk);
        let d1 = Self::rms(&self.k1, &sk);
        let h0 = if d0 < 1e-10 || d1 < 1e-10 {
            1e-6
        } else {
            0.01 * d0 / d1
        }
        .min(span);
        let y1 = axpy(&self.y, h0, &[(1.0, &self.k1)]);
        let f1 = (self.f)(self.t + h0, &y1);
        self.evaluations += 1;
        let mut diff = [0.0; N];
        for i in 0..N {
            diff[i] = f1[i] - self.k1[i];
        }
        let d2 = Self::rms(&diff, &sk) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    }

    /// Advances one accepted step. `Ok(None)` once `t_end` is reached.
    pub fn step(&mut self) -> Result<Option<DenseStep<N>>> {
        let span = self.t_end - self.t;
        if span <= 0.0 {
            return Ok(None);
        }
        let mut h = self.h.min(span);
        let mut rejected = false;
        loop {
            if h <= 16.0 * f64::EPSILON * self.t.abs().max(1.0) {
                return Err(Error::Integration {
                    at: self.t,
                    reason: "step size underflow".into(),
                });
            }
            // Land exactly on t_end when close, instead of leaving a sliver.
            let last = h >= span * (1.0 - 1e-12);
            if last {
                h = span;
            }
            let t = self.t;
            let y = &self.y;
            let k1 = self.k1;
            let k2 = (self.f)(t + C2 * h, &axpy(y, h, &[(A21, &k1)]));
            let k3 = (self.f)(t + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = (self.f)(
                t + C4 * h,
                &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = (self.f)(
                t + C5 * h,
                &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = (self.f)(
                t + h,
                &axpy(
                    y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y1 = axpy(
                y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let t1 = if last { self.t_end } else { t + h };
            let k7 = (self.f)(t1, &y1);
            self.evaluations += 6;

            let mut err = [0.0; N];
            for i in 0..N {
                err[i] = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let sk = self.scale(y, &y1);
            let e = Self::rms(&err, &sk);
            if !e.is_finite() {
                h *= 0.2;
                rejected = true;
                continue;
            }
            if e <= 1.0 {
                let mut rcont = [[0.0; N]; 5];
                for i in 0..N {
                    let dy = y1[i] - y[i];
                    let bspl = h * k1[i] - dy;
                    rcont[0][i] = y[i];
                    rcont[1][i] = dy;
                    rcont[2][i] = bspl;
                    rcont[3][i] = dy - h * k7[i] - bspl;
                    rcont[4][i] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                let step = DenseStep {
                    t0: t,
                    h: t1 - t,
                    rcont,
                };
                let mut fac = 0.9 * e.max(1e-10).powf(-0.2);
                fac = fac.clamp(0.2, 10.0);
                if rejected {
                    fac = fac.min(1.0);
                }
                self.h = h * fac;
                self.t = t1;
                self.y = y1;
                self.k1 = k7;
                return Ok(Some(step));
            }
            let fac = (0.9 * e.powf(-0.2)).clamp(0.2, 1.0);
            h *= fac;
            rejected = true;
        }
    }
}

/// Locates the step containing `t` in a contiguous run of steps.
pub fn locate<const N: usize>(steps: &[DenseStep<N>], t: f64) -> usize {
    let idx = steps.partition_point(|s| s.t1() < t);
    idx.min(steps.len().saturating_sub(1))
}
