//! Dormand–Prince 5(4) with Hairer's fourth-order continuous extension.

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

#[derive(Debug, Clone, Copy)]
pub struct Tolerances<const N: usize> {
    pub atol: [f64; N],
    pub rtol: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Options<const N: usize> {
    pub tol: Tolerances<N>,
    pub h_init: Option<f64>,
    pub h_max: f64,
    /// Steps below `h_min_rel · |t|` (or 1e-300 near zero) abort.
    pub h_min_rel: f64,
    pub max_steps: usize,
}

impl<const N: usize> Options<N> {
    pub fn new(atol: f64, rtol: f64) -> Self {
        Self {
            tol: Tolerances { atol: [atol; N], rtol },
            h_init: None,
            h_max: f64::INFINITY,
            h_min_rel: 1e-14,
            max_steps: 2_000_000,
        }
    }
}

/// One accepted step with its interpolating polynomial.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let c = &self.rcont;
        std::array::from_fn(|i| {
            c[0][i] + th * (c[1][i] + th1 * (c[2][i] + th * (c[3][i] + th1 * c[4][i])))
        })
    }

    /// Derivative of the interpolant with respect to `t`.
    pub fn deriv(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let c = &self.rcont;
        std::array::from_fn(|i| {
            let q = c[3][i] + th1 * c[4][i];
            let dq = -c[4][i];
            let s = c[2][i] + th * q;
            let ds = q + th * dq;
            let tt = c[1][i] + th1 * s;
            let dt = -s + th1 * ds;
            (tt + th * dt) / self.h
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Status {
    /// Reached `t_end`.
    Finished,
    /// The step observer asked to stop.
    Stopped,
    /// Step size collapsed at `t`.
    StepTooSmall { t: f64 },
    /// Derivative evaluation produced a non-finite value at `t`.
    NonFinite { t: f64 },
    MaxSteps { t: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub status: Status,
    pub accepted: usize,
    pub rejected: usize,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(a, k)| a * k[i]).sum::<f64>())
}

fn finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Integrates `y′ = rhs(t, y)` from `t0` to `t_end` (`t_end > t0`). Every
/// accepted step is handed to `on_step`, which may stop the integration.
pub fn integrate<const N: usize, F, C>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &Options<N>,
    mut on_step: C,
) -> Outcome<N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    C: FnMut(&DenseStep<N>) -> Control,
{
    let tol = &opts.tol;
    let scale = |a: &[f64; N], b: &[f64; N], i: usize| {
        tol.atol[i] + tol.rtol * a[i].abs().max(b[i].abs())
    };

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut evals = 1;
    let mut accepted = 0;
    let mut rejected = 0;
    let done = |t: f64, y: [f64; N], status, accepted, rejected, evals| Outcome {
        t,
        y,
        status,
        accepted,
        rejected,
        evals,
    };
    if !finite(&k1) {
        return done(t, y, Status::NonFinite { t }, 0, 0, evals);
    }

    let span = t_end - t0;
    let mut h = match opts.h_init {
        Some(h) => h,
        None => {
            // Hairer's starting-step heuristic.
            let d0 = (0..N).map(|i| (y[i] / scale(&y, &y, i)).powi(2)).sum::<f64>() / N as f64;
            let d1 = (0..N).map(|i| (k1[i] / scale(&y, &y, i)).powi(2)).sum::<f64>() / N as f64;
            let h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * (d0 / d1).sqrt() };
            let h0 = h0.min(span);
            let y1 = axpy(&y, h0, &[(1.0, &k1)]);
            let k2 = rhs(t + h0, &y1);
            evals += 1;
            let d2 = ((0..N)
                .map(|i| ((k2[i] - k1[i]) / scale(&y, &y, i)).powi(2))
                .sum::<f64>()
                / N as f64)
                .sqrt()
                / h0;
            let dm = d1.sqrt().max(d2);
            let h1 = if dm <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / dm).powf(0.2) };
            (100.0 * h0).min(h1)
        }
    };
    h = h.min(opts.h_max).min(span);

    let mut last_rejected = false;
    loop {
        if accepted + rejected >= opts.max_steps {
            return done(t, y, Status::MaxSteps { t }, accepted, rejected, evals);
        }
        let remaining = t_end - t;
        if remaining <= 0.0 {
            return done(t, y, Status::Finished, accepted, rejected, evals);
        }
        let mut last = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            last = true;
        }
        let h_min = opts.h_min_rel * t.abs().max(f64::MIN_POSITIVE);
        if h < h_min.max(1e-300) {
            return done(t, y, Status::StepTooSmall { t }, accepted, rejected, evals);
        }

        let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            t + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let t_new = if last { t_end } else { t + h };
        let k7 = rhs(t_new, &y_new);
        evals += 6;

        let stages_ok = finite(&y_new) && finite(&k7);
        let err = if stages_ok {
            let s: f64 = (0..N)
                .map(|i| {
                    let e = h
                        * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                            + E7 * k7[i]);
                    (e / scale(&y, &y_new, i)).powi(2)
                })
                .sum();
            (s / N as f64).sqrt()
        } else {
            f64::INFINITY
        };

        if err <= 1.0 {
            let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
            let rcont = [
                y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
                std::array::from_fn(|i| {
                    h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i])
                }),
            ];
            let step = DenseStep { t0: t, h: t_new - t, y0: y, y1: y_new, rcont };
            accepted += 1;
            t = t_new;
            y = y_new;
            k1 = k7;
            if on_step(&step) == Control::Stop {
                return done(t, y, Status::Stopped, accepted, rejected, evals);
            }
            if last {
                return done(t, y, Status::Finished, accepted, rejected, evals);
            }
            let mut fac = 0.9 * err.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h = (h * fac).min(opts.h_max);
            last_rejected = false;
        } else {
            rejected += 1;
            if !stages_ok {
                if h <= h_min.max(1e-300) * 2.0 {
                    return done(t, y, Status::NonFinite { t }, accepted, rejected, evals);
                }
                h *= 0.1;
            } else {
                let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                h *= fac;
            }
            last_rejected = true;
        }
    }
}

/// Bisects the dense output of `step` for the root of `f(t, y(t))`, which
/// must change sign over the step. Returns the left end of the final
/// bracket of width ≤ `tol`.
pub fn locate_root<const N: usize>(
    step: &DenseStep<N>,
    f: impl Fn(f64, &[f64; N]) -> f64,
    tol: f64,
) -> f64 {
    let mut lo = step.t0;
    let mut hi = step.t1();
    let f_lo = f(lo, &step.y0);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid, &step.eval(mid));
        if (fm > 0.0) == (f_lo > 0.0) && fm != 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let opts = Options::<2>::new(1e-12, 1e-12);
        let mut steps = Vec::new();
        let out = integrate(
            |_t, y| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            10.0,
            &opts,
            |s| {
                steps.push(*s);
                Control::Continue
            },
        );
        assert_eq!(out.status, Status::Finished);
        assert!((out.y[0] - 10f64.sin()).abs() < 1e-9);
        for s in &steps {
            let tm = s.t0 + 0.37 * s.h;
            let y = s.eval(tm);
            assert!((y[0] - tm.sin()).abs() < 1e-9);
            let dy = s.deriv(tm);
            assert!((dy[0] - tm.cos()).abs() < 1e-7);
        }
    }

    #[test]
    fn dense_output_hits_endpoints() {
        let opts = Options::<1>::new(1e-10, 1e-10);
        integrate(|_t, y| [y[0]], 0.0, [1.0], 2.0, &opts, |s| {
            let a = s.eval(s.t0);
            let b = s.eval(s.t1());
            assert!((a[0] - s.y0[0]).abs() < 1e-14);
            assert!((b[0] - s.y1[0]).abs() < 1e-13 * s.y1[0]);
            Control::Continue
        });
    }

    #[test]
    fn root_location() {
        let opts = Options::<2>::new(1e-12, 1e-12);
        let mut root = None;
        integrate(|_t, y| [y[1], -y[0]], 0.0, [0.0, 1.0], 5.0, &opts, |s| {
            if s.t0 > 0.0 && s.y0[0] > 0.0 && s.y1[0] <= 0.0 {
                root = Some(locate_root(s, |_t, y| y[0], 1e-13));
                return Control::Stop;
            }
            Control::Continue
        });
        assert!((root.unwrap() - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn blow_up_is_reported() {
        let opts = Options::<1>::new(1e-10, 1e-10);
        let out = integrate(|_t, y| [y[0] * y[0]], 0.0, [1.0], 2.0, &opts, |_| Control::Continue);
        assert!(matches!(out.status, Status::StepTooSmall { .. } | Status::NonFinite { .. }));
        assert!(out.t < 1.0 && out.t > 0.99);
    }
}
