//! The change of variables `v = φ_g(u)` with `φ_g(s) = ∫₀^s e^{G(t)} dt`,
//! `G(t) = ∫₀^t g`, and the transformed source
//! `h(s) = e^{G(φ_g⁻¹(s))} f(φ_g⁻¹(s))` of the gradient-free equation
//! `M±(D²v) + h(v) = 0`.
//!
//! `G` and `φ_g` are integrated together as the system `G′ = g`, `φ′ = e^G`
//! with Dormand–Prince; the dense output of the accepted steps is kept in a
//! [`TransformTable`] and reused for evaluation and inversion.

use std::cell::RefCell;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::expr::{EvalError, GradientPair};
use crate::ode::{self, Control, DenseStep, Options};
use crate::quad;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_T_MAX: f64 = 50.0;
/// Integration stops once `G` exceeds this (e^700 is close to f64::MAX).
pub const G_OVERFLOW: f64 = 700.0;

/// Start offset used when `g` is not finite at 0.
const SINGULAR_SEED: f64 = 1e-12;

/// Dense representation of `(G, φ_g)` on `[0, t_end]`.
#[derive(Debug, Clone)]
pub struct TransformTable {
    pair: GradientPair,
    tol: f64,
    /// `(t_s, G(t_s), φ(t_s))` when the table starts past a singularity of g at 0.
    seed: Option<(f64, f64, f64)>,
    steps: Vec<DenseStep<2>>,
    t_end: f64,
    /// Set when integration stopped at the overflow guard.
    overflow_at: Option<f64>,
}

enum Stop {
    AtT(f64),
    AtPhi(f64),
}

impl TransformTable {
    /// Table on `[0, t_max]`; errors if `G` overflows before `t_max`.
    pub fn build(pair: &GradientPair, t_max: f64, tol: f64) -> Result<Self> {
        if !(t_max >= 0.0) {
            return invalid(format!("t_max must be nonnegative, got {t_max}"));
        }
        let table = Self::integrate(pair, Stop::AtT(t_max), tol)?;
        table.require_reached_t(t_max)?;
        Ok(table)
    }

    /// Table extending at least to where `φ_g` reaches `v`.
    pub fn covering(pair: &GradientPair, v: f64, tol: f64) -> Result<Self> {
        let table = Self::covering_truncated(pair, v, tol)?;
        if table.phi_max() < v {
            let t = table.overflow_at.unwrap_or(table.t_end);
            return Err(Error::Overflow { t, limit: G_OVERFLOW });
        }
        Ok(table)
    }

    /// Like [`covering`](Self::covering) but returns whatever range was
    /// reachable before the overflow guard.
    pub fn covering_truncated(pair: &GradientPair, v: f64, tol: f64) -> Result<Self> {
        if !(v >= 0.0) {
            return invalid(format!("phi value must be nonnegative, got {v}"));
        }
        Self::integrate(pair, Stop::AtPhi(v), tol)
    }

    fn integrate(pair: &GradientPair, stop: Stop, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return invalid(format!("tolerance must be positive, got {tol}"));
        }
        let eval_err: RefCell<Option<EvalError>> = RefCell::new(None);
        let g = |t: f64| -> f64 {
            match pair.g_at(t) {
                Ok(v) => v,
                Err(e) => {
                    eval_err.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            }
        };

        let g0 = pair.g_at(0.0)?;
        let (t0, y0, seed) = if g0.is_finite() {
            (0.0, [0.0, 0.0], None)
        } else {
            let ts = SINGULAR_SEED;
            let big_g = quad_g(pair, ts, tol)?;
            let phi = quad_phi_small(pair, ts, tol)?;
            (ts, [big_g, phi], Some((ts, big_g, phi)))
        };

        let mut table = TransformTable {
            pair: pair.clone(),
            tol,
            seed,
            steps: Vec::new(),
            t_end: t0,
            overflow_at: None,
        };
        let done = match stop {
            Stop::AtT(t) => t <= t0,
            Stop::AtPhi(v) => v <= y0[1],
        };
        if done {
            return Ok(table);
        }

        let t_final = match stop {
            Stop::AtT(t) => t,
            Stop::AtPhi(_) => f64::MAX / 4.0,
        };
        let mut opts = Options::<2>::new(tol * 1e-2, tol * 1e-2);
        opts.h_min_rel = 1e-15;
        let mut overflow = None;
        let steps = &mut table.steps;
        let out = ode::integrate(
            |t, y| [g(t), y[0].exp()],
            t0,
            y0,
            t_final,
            &opts,
            |s| {
                steps.push(*s);
                if s.y1[0] > G_OVERFLOW {
                    overflow = Some(s.t1());
                    return Control::Stop;
                }
                match stop {
                    Stop::AtPhi(v) if s.y1[1] >= v => Control::Stop,
                    _ => Control::Continue,
                }
            },
        );
        if let Some(e) = eval_err.into_inner() {
            return Err(e.into());
        }
        match out.status {
            ode::Status::Finished | ode::Status::Stopped => {}
            other => {
                // G grew too fast to integrate any further: treat as overflow.
                if out.y[0] > 0.5 * G_OVERFLOW {
                    overflow = Some(out.t);
                } else {
                    return Err(Error::Integration(format!(
                        "transform integration failed: {other:?}"
                    )));
                }
            }
        }
        table.t_end = out.t;
        table.overflow_at = overflow;
        Ok(table)
    }

    fn require_reached_t(&self, t: f64) -> Result<()> {
        if t > self.t_end {
            return Err(Error::Overflow { t: self.overflow_at.unwrap_or(self.t_end), limit: G_OVERFLOW });
        }
        Ok(())
    }

    pub fn pair(&self) -> &GradientPair {
        &self.pair
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Largest `t` covered.
    pub fn t_max(&self) -> f64 {
        self.t_end
    }

    pub fn phi_max(&self) -> f64 {
        match self.steps.last() {
            Some(s) => s.y1[1],
            None => self.seed.map_or(0.0, |s| s.2),
        }
    }

    pub fn overflow_at(&self) -> Option<f64> {
        self.overflow_at
    }

    /// Step endpoints `(t, G(t), φ(t))`, strictly increasing in `t`.
    pub fn grid(&self) -> Vec<(f64, f64, f64)> {
        let mut out = vec![(0.0, 0.0, 0.0)];
        if let Some(seed) = self.seed {
            out.push(seed);
        }
        out.extend(self.steps.iter().map(|s| (s.t1(), s.y1[0], s.y1[1])));
        out
    }

    fn step_for_t(&self, t: f64) -> Option<&DenseStep<2>> {
        let idx = self.steps.partition_point(|s| s.t1() < t);
        self.steps.get(idx)
    }

    /// `(G(t), φ(t))`.
    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        if !(t >= 0.0) {
            return invalid(format!("t must be nonnegative, got {t}"));
        }
        self.require_reached_t(t)?;
        if let Some((ts, _, _)) = self.seed {
            if t <= ts {
                return Ok((quad_g(&self.pair, t, self.tol)?, quad_phi_small(&self.pair, t, self.tol)?));
            }
        }
        match self.step_for_t(t) {
            Some(s) => {
                let y = s.eval(t);
                Ok((y[0], y[1]))
            }
            None => Ok((0.0, 0.0)),
        }
    }

    pub fn big_g(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?.0)
    }

    pub fn phi(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?.1)
    }

    /// `φ_g⁻¹(v)` by bracketing on the step grid and safeguarded Newton
    /// (`φ′ = e^G`) on the dense output.
    pub fn phi_inv(&self, v: f64) -> Result<f64> {
        if !(v >= 0.0) {
            return invalid(format!("phi inverse needs v >= 0, got {v}"));
        }
        if v == 0.0 {
            return Ok(0.0);
        }
        if v > self.phi_max() {
            return Err(Error::Overflow { t: self.overflow_at.unwrap_or(self.t_end), limit: G_OVERFLOW });
        }
        if let Some((ts, _, phis)) = self.seed {
            if v <= phis {
                let f = |t: f64| quad_phi_small(&self.pair, t, self.tol).map(|p| p - v);
                return bisect_scalar(f, 0.0, ts, v * 1e-14);
            }
        }
        let idx = self.steps.partition_point(|s| s.y1[1] < v);
        let s = &self.steps[idx.min(self.steps.len() - 1)];
        let (mut lo, mut hi) = (s.t0, s.t1());
        let (p0, p1) = (s.y0[1], s.y1[1]);
        let (d0, d1) = (s.y0[0].exp(), s.y1[0].exp());
        let mut t = hermite_guess(lo, hi, p0, p1, d0, d1, v);
        let target = 1e-2 * self.tol * v.max(1.0);
        for _ in 0..100 {
            let y = s.eval(t);
            let res = y[1] - v;
            if res.abs() <= target {
                break;
            }
            if res > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let mut next = t - res / y[0].exp();
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 4.0 * f64::EPSILON * t.abs() {
                t = next;
                break;
            }
            t = next;
        }
        Ok(t)
    }

    /// `h(s) = e^{G(t)} f(t)` with `t = φ_g⁻¹(s)`.
    pub fn h(&self, s: f64) -> Result<f64> {
        let t = self.phi_inv(s)?;
        let big_g = self.big_g(t)?;
        let f = self.pair.f_at(t)?;
        if f == 0.0 {
            return Ok(0.0);
        }
        Ok(big_g.exp() * f)
    }
}

/// Cubic Hermite inverse guess on one step, clamped to the step.
fn hermite_guess(lo: f64, hi: f64, p0: f64, p1: f64, d0: f64, d1: f64, v: f64) -> f64 {
    let h = hi - lo;
    let cubic = |th: f64| {
        let h00 = (1.0 + 2.0 * th) * (1.0 - th) * (1.0 - th);
        let h10 = th * (1.0 - th) * (1.0 - th);
        let h01 = th * th * (3.0 - 2.0 * th);
        let h11 = th * th * (th - 1.0);
        h00 * p0 + h10 * h * d0 + h01 * p1 + h11 * h * d1
    };
    let (mut a, mut b) = (0.0, 1.0);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if cubic(m) < v {
            a = m;
        } else {
            b = m;
        }
    }
    lo + 0.5 * (a + b) * h
}

fn bisect_scalar(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let m = 0.5 * (lo + hi);
        if f(m)? < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn quad_g(pair: &GradientPair, t: f64, tol: f64) -> Result<f64> {
    let q = quad::integrate(|x| pair.g_at(x), 0.0, t, tol * 1e-2, 2000)?;
    Ok(q.value)
}

/// `φ(t) = ∫₀^t e^{G}` with each `G` from quadrature; only used on the
/// tiny seed interval.
fn quad_phi_small(pair: &GradientPair, t: f64, tol: f64) -> Result<f64> {
    let q = quad::integrate(|x| quad_g(pair, x, tol).map(f64::exp), 0.0, t, tol * 1e-2, 200)?;
    Ok(q.value)
}

/// `G(t) = ∫₀^t g` by adaptive Gauss–Kronrod quadrature.
pub fn compute_big_g(pair: &GradientPair, t: f64, tol: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return invalid(format!("t must be nonnegative, got {t}"));
    }
    quad_g(pair, t, tol)
}

/// `φ_g(s)`.
pub fn compute_phi(pair: &GradientPair, s: f64, tol: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return invalid(format!("s must be nonnegative, got {s}"));
    }
    TransformTable::build(pair, s, tol)?.phi(s)
}

/// `φ_g⁻¹(v)`.
pub fn invert_phi(pair: &GradientPair, v: f64, tol: f64) -> Result<f64> {
    if !(v >= 0.0) {
        return invalid(format!("v must be nonnegative, got {v}"));
    }
    TransformTable::covering(pair, v, tol)?.phi_inv(v)
}

/// `h(s) = e^{G(φ_g⁻¹(s))} f(φ_g⁻¹(s))`.
pub fn transformed_h(pair: &GradientPair, s: f64, tol: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return invalid(format!("s must be nonnegative, got {s}"));
    }
    TransformTable::covering(pair, s, tol)?.h(s)
}

// ---------------------------------------------------------------------------
// Growth classification

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthClass {
    Sublinear,
    Superlinear,
    Neither,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Converged,
    ToZero,
    DivergingUp,
    DivergingDown,
    Unsettled,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitEstimate {
    /// Extrapolated limit; `±inf` for diverging sequences, NaN if unsettled.
    pub value: f64,
    pub trend: Trend,
    /// `(s, h(s)/s)` in the order they approach the limit.
    pub samples: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub class: GrowthClass,
    pub limit_at_zero: LimitEstimate,
    pub limit_at_infinity: LimitEstimate,
    pub mu1_used: f64,
    /// Limit of `h(s)/s` at 0 when it converged.
    pub c_star: Option<f64>,
    /// Limit of `h(s)/s^p` at ∞ when `p` was given and it converged.
    #[serde(rename = "C_star")]
    pub big_c_star: Option<f64>,
    /// Largest `s` sampled when the upper sequence was cut by overflow.
    pub truncated_at: Option<f64>,
    /// Largest sampled `−γφ(t) − f(t)` when `gamma` was given (≤ 0 means no
    /// violation of `f ≥ −γφ` was seen).
    pub fg0_violation: Option<f64>,
    pub note: &'static str,
}

#[derive(Debug, Clone, Copy)]
pub struct GrowthOptions {
    pub k_max: usize,
    pub tol: f64,
    pub p: Option<f64>,
    pub gamma: Option<f64>,
}

impl Default for GrowthOptions {
    fn default() -> Self {
        Self { k_max: 6, tol: DEFAULT_TOL, p: None, gamma: None }
    }
}

const HEURISTIC_NOTE: &str =
    "heuristic: limits estimated from h(s)/s on s = 10^(+-k); limsup/liminf cannot be decided by sampling";

fn trend_of(values: &[f64]) -> (Trend, f64) {
    let n = values.len();
    if n < 3 || values.iter().any(|v| !v.is_finite()) {
        return (Trend::Unsettled, f64::NAN);
    }
    let (a, b, c) = (values[n - 3], values[n - 2], values[n - 1]);
    let mean = (a + b + c) / 3.0;
    let spread = a.max(b).max(c) - a.min(b).min(c);
    if mean != 0.0 && spread / mean.abs() <= 0.1 {
        return (Trend::Converged, c);
    }
    if spread == 0.0 {
        return (Trend::Converged, c);
    }
    if a < b && b < c && c > 0.0 && (b <= 0.0 || c / b >= 1.1) {
        return (Trend::DivergingUp, f64::INFINITY);
    }
    if a > b && b > c && c < 0.0 && (b >= 0.0 || c / b >= 1.1) {
        return (Trend::DivergingDown, f64::NEG_INFINITY);
    }
    let same_sign = (a > 0.0 && b > 0.0 && c > 0.0) || (a < 0.0 && b < 0.0 && c < 0.0);
    if same_sign && b.abs() / a.abs() <= 0.9 && c.abs() / b.abs() <= 0.9 {
        return (Trend::ToZero, 0.0);
    }
    (Trend::Unsettled, f64::NAN)
}

/// Heuristic sub/superlinear classification of the pair against `mu1`.
pub fn classify_growth(pair: &GradientPair, mu1: f64, opts: &GrowthOptions) -> Result<GrowthReport> {
    if !(mu1 > 0.0) {
        return invalid(format!("mu1 must be positive, got {mu1}"));
    }
    let k_max = opts.k_max as i32;
    let s_top = 10f64.powi(k_max);
    let table = TransformTable::covering_truncated(pair, s_top, opts.tol)?;
    let truncated_at = (table.phi_max() < s_top).then(|| table.phi_max());

    let ratio = |s: f64, power: f64| -> Result<f64> { Ok(table.h(s)? / s.powf(power)) };

    let mut zero_side = Vec::new();
    for k in 0..=k_max {
        let s = 10f64.powi(-k);
        zero_side.push((s, ratio(s, 1.0)?));
    }
    let mut inf_side = Vec::new();
    let mut inf_side_p = Vec::new();
    for k in 0..=k_max {
        let s = 10f64.powi(k);
        if s > table.phi_max() {
            break;
        }
        inf_side.push((s, ratio(s, 1.0)?));
        if let Some(p) = opts.p {
            inf_side_p.push(ratio(s, p)?);
        }
    }

    let estimate = |samples: Vec<(f64, f64)>| {
        let values: Vec<f64> = samples.iter().map(|x| x.1).collect();
        let (trend, value) = trend_of(&values);
        LimitEstimate { value, trend, samples }
    };
    let at_zero = estimate(zero_side);
    let at_inf = estimate(inf_side);

    let class = if at_zero.trend == Trend::Unsettled || at_inf.trend == Trend::Unsettled {
        GrowthClass::Undetermined
    } else if at_inf.value < mu1 && mu1 < at_zero.value {
        GrowthClass::Sublinear
    } else if at_zero.value < mu1 && mu1 < at_inf.value {
        GrowthClass::Superlinear
    } else {
        GrowthClass::Neither
    };

    let c_star = (at_zero.trend == Trend::Converged || at_zero.trend == Trend::ToZero)
        .then_some(at_zero.value);
    let big_c_star = if opts.p.is_some() {
        match trend_of(&inf_side_p) {
            (Trend::Converged, v) => Some(v),
            _ => None,
        }
    } else {
        None
    };

    let fg0_violation = match opts.gamma {
        Some(gamma) => {
            let mut worst = f64::NEG_INFINITY;
            for k in -4 * k_max..=4 * k_max {
                let s = 10f64.powf(k as f64 / 4.0);
                if s > table.phi_max() {
                    break;
                }
                let t = table.phi_inv(s)?;
                worst = worst.max(-gamma * s - pair.f_at(t)?);
            }
            Some(worst)
        }
        None => None,
    };

    Ok(GrowthReport {
        class,
        limit_at_zero: at_zero,
        limit_at_infinity: at_inf,
        mu1_used: mu1,
        c_star,
        big_c_star,
        truncated_at,
        fg0_violation,
        note: HEURISTIC_NOTE,
    })
}
