use serde::Serialize;

use super::{critical_constants, integrate_shoot, ShootConfig, Source, Terminal};
use crate::error::{invalid, Error, Result};
use crate::pucci::{Ellipticity, OperatorSign};

#[derive(Debug, Clone, Copy)]
pub struct CriticalOptions {
    /// Positivity on `[0, r_max]` stands in for an entire positive solution.
    pub r_max: f64,
    pub atol: f64,
    pub rtol: f64,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        Self { r_max: 1e12, atol: super::DEFAULT_ATOL, rtol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbeOutcome {
    Crossing { r: f64 },
    Positive,
    Undetermined { reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalSearch {
    pub sign: OperatorSign,
    /// Midpoint of the final bracket.
    pub p_star: f64,
    /// Largest `p` seen to cross zero.
    pub lo: f64,
    /// Smallest `p` seen to stay positive.
    pub hi: f64,
    pub width: f64,
    pub r_max: f64,
    pub iterations: usize,
    pub probes: Vec<(f64, ProbeOutcome)>,
}

fn probe(ell: &Ellipticity, sign: OperatorSign, p: f64, opts: &CriticalOptions) -> Result<ProbeOutcome> {
    let cfg = ShootConfig::new(Source::PurePower { p }, *ell, sign, 1.0)
        .with_r_max(opts.r_max)
        .with_tolerances(opts.atol, opts.rtol);
    let tr = integrate_shoot(&cfg)?;
    Ok(match tr.terminal {
        Terminal::CrossedZero { r } => ProbeOutcome::Crossing { r },
        Terminal::ReachedRmax { .. } => ProbeOutcome::Positive,
        Terminal::StepFailure { r, reason } => {
            ProbeOutcome::Undetermined { reason: format!("step failure at r = {r}: {reason}") }
        }
    })
}

/// Bisects on `p` between a crossing shot and a positive shot, both at
/// amplitude 1 (the power nonlinearity is scale invariant, so one amplitude
/// decides). Without a bracket, `(p^s, p_upper + 0.5)` is used, where
/// `p_upper` is `p^p₊` for Plus and `p*_n` for Minus.
pub fn find_critical_p(
    ell: &Ellipticity,
    sign: OperatorSign,
    bracket: Option<(f64, f64)>,
    tol_p: f64,
    opts: &CriticalOptions,
) -> Result<CriticalSearch> {
    let consts = critical_constants(ell);
    if sign == OperatorSign::Plus && consts.n_plus <= 2.0 {
        return invalid(format!(
            "N_plus = {} <= 2: the plus critical exponent is not defined in this regime",
            consts.n_plus
        ));
    }
    if !(tol_p > 0.0) {
        return invalid(format!("tol_p must be positive, got {tol_p}"));
    }
    let (mut lo, mut hi) = match bracket {
        Some(b) => b,
        None => match (consts.p_s(sign), consts.p_upper(sign)) {
            (Some(a), Some(b)) => (a, b + 0.5),
            _ => return invalid("no default bracket for these constants; supply one"),
        },
    };
    if !(lo > 1.0 && hi > lo) {
        return invalid(format!("bracket must satisfy 1 < lo < hi, got ({lo}, {hi})"));
    }

    let mut probes = Vec::new();
    let at_lo = probe(ell, sign, lo, opts)?;
    let at_hi = probe(ell, sign, hi, opts)?;
    probes.push((lo, at_lo.clone()));
    probes.push((hi, at_hi.clone()));
    if !matches!(at_lo, ProbeOutcome::Crossing { .. }) || at_hi != ProbeOutcome::Positive {
        return Err(Error::Bracket(format!(
            "need a crossing at p = {lo} and a positive shot at p = {hi}; got {at_lo:?} and {at_hi:?}"
        )));
    }

    let mut iterations = 0;
    while hi - lo > tol_p {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let out = probe(ell, sign, mid, opts)?;
        probes.push((mid, out.clone()));
        iterations += 1;
        match out {
            ProbeOutcome::Crossing { .. } => lo = mid,
            ProbeOutcome::Positive => hi = mid,
            ProbeOutcome::Undetermined { reason } => {
                return Err(Error::Integration(format!(
                    "undetermined shot at p = {mid} inside ({lo}, {hi}): {reason}"
                )))
            }
        }
    }
    Ok(CriticalSearch {
        sign,
        p_star: 0.5 * (lo + hi),
        lo,
        hi,
        width: hi - lo,
        r_max: opts.r_max,
        iterations,
        probes,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Upper end of the search; `None` means `1e6/R²`.
    pub mu_hi: Option<f64>,
    pub rel_width: f64,
    pub atol: f64,
    pub rtol: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { mu_hi: None, rel_width: 1e-8, atol: super::DEFAULT_ATOL, rtol: 1e-12 }
    }
}

/// True when the linear shot with `h = μv` vanishes inside `[0, radius]`.
fn crosses_by(ell: &Ellipticity, sign: OperatorSign, mu: f64, radius: f64, opts: &EigenOptions) -> Result<bool> {
    let cfg = ShootConfig::new(Source::Linear { mu }, *ell, sign, 1.0)
        .with_r_max(radius)
        .with_tolerances(opts.atol, opts.rtol);
    let tr = integrate_shoot(&cfg)?;
    match tr.terminal {
        Terminal::CrossedZero { .. } => Ok(true),
        Terminal::ReachedRmax { .. } => Ok(false),
        Terminal::StepFailure { r, reason } => {
            Err(Error::Integration(format!("eigenvalue shot with mu = {mu} failed at r = {r}: {reason}")))
        }
    }
}

/// First eigenvalue of `M±` on the ball of radius `R`.
pub fn first_eigenvalue_ball(ell: &Ellipticity, sign: OperatorSign, radius: f64) -> Result<f64> {
    Ok(first_eigenvalue_ball_with(ell, sign, radius, &EigenOptions::default())?.0)
}

/// Returns `μ₁` together with its final bracket. The first zero radius of
/// the linear shot decreases strictly in `μ`, so bisection (in `ln μ`) on
/// "crosses before R" converges to the `μ` whose zero sits at `R`.
pub fn first_eigenvalue_ball_with(
    ell: &Ellipticity,
    sign: OperatorSign,
    radius: f64,
    opts: &EigenOptions,
) -> Result<(f64, (f64, f64))> {
    if !(radius > 0.0 && radius.is_finite()) {
        return invalid(format!("radius must be positive, got {radius}"));
    }
    let mut hi = opts.mu_hi.unwrap_or(1e6 / (radius * radius));
    let mut lo = hi * 1e-12;
    if !crosses_by(ell, sign, hi, radius, opts)? || crosses_by(ell, sign, lo, radius, opts)? {
        return Err(Error::Bracket(format!("first eigenvalue not bracketed in ({lo:e}, {hi:e})")));
    }
    while hi - lo > opts.rel_width * hi {
        let mid = (lo * hi).sqrt();
        if crosses_by(ell, sign, mid, radius, opts)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((0.5 * (lo + hi), (lo, hi)))
}
