//! Radial shooting for `M±(D²v) + h(v) = 0`, with `v = v(|x|)`.
//!
//! The Hessian of a radial function has eigenvalues `v″` (once) and `v′/r`
//! (`n−1` times), so the equation becomes the scalar ODE
//! `weighting(v″) + (n−1)·weighting(v′/r) + h(v) = 0`, which is solved for
//! `v″` branch by branch.

mod constants;
mod critical;
mod decay;
mod source;

use std::cell::RefCell;

use serde::Serialize;

pub use constants::{critical_constants, CriticalExponents, LocatedExponent};
pub use critical::{
    find_critical_p, first_eigenvalue_ball, first_eigenvalue_ball_with, CriticalOptions,
    CriticalSearch, EigenOptions, ProbeOutcome,
};
pub use decay::{classify_decay, DecayClass, DecayDiagnostics, DecayVariant};
pub use source::{Source, SourceInfo};

use crate::error::{invalid, Error, Result};
use crate::ode::{self, Control, DenseStep, Options};
use crate::pucci::{invert_pucci_1d, Ellipticity, OperatorSign};

/// Radius at which integration starts from the Taylor seed.
pub const R0: f64 = 1e-8;
pub const DEFAULT_R_MAX: f64 = 1e4;
/// Relative to the amplitude; tiny so that error control is effectively
/// relative and decaying tails keep their accuracy.
pub const DEFAULT_ATOL: f64 = 1e-200;
pub const DEFAULT_RTOL: f64 = 1e-10;
/// Absolute bisection tolerance for the first zero.
pub const ZERO_TOL: f64 = 1e-12;
pub const SAMPLES_PER_DECADE: usize = 100;

/// `v″` from the radial equation. At `r = 0` symmetry forces all Hessian
/// eigenvalues to equal `v″(0)`, so `n·weighting(v″) = −h`.
#[inline]
pub fn radial_rhs(
    r: f64,
    _v: f64,
    vp: f64,
    h_of_v: f64,
    ell: &Ellipticity,
    sign: OperatorSign,
) -> Result<f64> {
    if !(r >= 0.0) {
        return invalid(format!("radius must be nonnegative, got {r}"));
    }
    if r == 0.0 {
        if vp != 0.0 {
            return invalid(format!("v'(0) must vanish at the center, got {vp}"));
        }
        return Ok(invert_pucci_1d(-h_of_v / ell.n() as f64, ell, sign));
    }
    Ok(rhs_unchecked(r, vp, h_of_v, ell, sign))
}

#[inline]
fn rhs_unchecked(r: f64, vp: f64, h: f64, ell: &Ellipticity, sign: OperatorSign) -> f64 {
    let k = (ell.n() - 1) as f64;
    invert_pucci_1d(-h - k * ell.weighting(vp / r, sign), ell, sign)
}

#[derive(Debug, Clone)]
pub struct ShootConfig {
    pub source: Source,
    pub ell: Ellipticity,
    pub sign: OperatorSign,
    /// `v(0)`.
    pub amplitude: f64,
    pub r_max: f64,
    /// Absolute tolerance, relative to the amplitude.
    pub atol: f64,
    pub rtol: f64,
    pub samples_per_decade: usize,
}

impl ShootConfig {
    pub fn new(source: Source, ell: Ellipticity, sign: OperatorSign, amplitude: f64) -> Self {
        Self {
            source,
            ell,
            sign,
            amplitude,
            r_max: DEFAULT_R_MAX,
            atol: DEFAULT_ATOL,
            rtol: DEFAULT_RTOL,
            samples_per_decade: SAMPLES_PER_DECADE,
        }
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = r_max;
        self
    }

    pub fn with_tolerances(mut self, atol: f64, rtol: f64) -> Self {
        self.atol = atol;
        self.rtol = rtol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return invalid(format!("amplitude must be positive, got {}", self.amplitude));
        }
        if !(self.r_max > R0 && self.r_max.is_finite()) {
            return invalid(format!("r_max must exceed {R0}, got {}", self.r_max));
        }
        if !(self.atol > 0.0 && self.rtol > 0.0) {
            return invalid("tolerances must be positive");
        }
        if self.samples_per_decade == 0 {
            return invalid("samples_per_decade must be positive");
        }
        self.source.validate()
    }

    pub fn echo(&self) -> ShootEcho {
        ShootEcho {
            source: self.source.info(),
            ell: self.ell,
            sign: self.sign,
            amplitude: self.amplitude,
            r_max: self.r_max,
            atol: self.atol,
            rtol: self.rtol,
        }
    }
}

/// Serializable copy of a [`ShootConfig`].
#[derive(Debug, Clone, Serialize)]
pub struct ShootEcho {
    pub source: SourceInfo,
    #[serde(flatten)]
    pub ell: Ellipticity,
    pub sign: OperatorSign,
    pub amplitude: f64,
    pub r_max: f64,
    pub atol: f64,
    pub rtol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub r: f64,
    pub v: f64,
    pub dv: f64,
    pub ddv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Terminal {
    CrossedZero { r: f64 },
    ReachedRmax { r: f64 },
    StepFailure { r: f64, reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub terminal: Terminal,
    pub config: ShootEcho,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    #[serde(skip)]
    steps: Vec<DenseStep<2>>,
    #[serde(skip)]
    seed_ddv: f64,
}

impl Trajectory {
    pub fn crossing(&self) -> Option<f64> {
        match self.terminal {
            Terminal::CrossedZero { r } => Some(r),
            _ => None,
        }
    }

    pub fn is_positive_to_rmax(&self) -> bool {
        matches!(self.terminal, Terminal::ReachedRmax { .. })
    }

    /// Largest radius covered.
    pub fn r_end(&self) -> f64 {
        match &self.terminal {
            Terminal::CrossedZero { r } | Terminal::ReachedRmax { r } => *r,
            Terminal::StepFailure { r, .. } => *r,
        }
    }

    pub fn dense_steps(&self) -> &[DenseStep<2>] {
        &self.steps
    }

    /// `(v(r), v′(r))` from the dense output, `None` outside `[0, r_end]`.
    pub fn eval_at(&self, r: f64) -> Option<(f64, f64)> {
        if !(r >= 0.0) || r > self.r_end() {
            return None;
        }
        if r <= R0 || self.steps.is_empty() {
            let a = self.config.amplitude;
            return Some((a + 0.5 * self.seed_ddv * r * r, self.seed_ddv * r));
        }
        let idx = self.steps.partition_point(|s| s.t1() < r);
        let step = self.steps.get(idx).or(self.steps.last())?;
        let y = step.eval(r.min(step.t1()));
        Some((y[0], y[1]))
    }

    /// `v″(r)` as the derivative of the dense `v′` interpolant (not the
    /// equation), so it can be used to measure the defect.
    pub fn interpolant_ddv(&self, r: f64) -> Option<f64> {
        if !(r >= 0.0) || r > self.r_end() {
            return None;
        }
        if r <= R0 || self.steps.is_empty() {
            return Some(self.seed_ddv);
        }
        let idx = self.steps.partition_point(|s| s.t1() < r);
        let step = self.steps.get(idx).or(self.steps.last())?;
        Some(step.deriv(r.min(step.t1()))[1])
    }

    /// Sup over samples of `|weighting(v″) + (n−1)weighting(v′/r) + h(v)|`.
    pub fn equation_residual(&self, source: &Source) -> Result<f64> {
        let ell = &self.config.ell;
        let sign = self.config.sign;
        let k = (ell.n() - 1) as f64;
        let mut worst: f64 = 0.0;
        for s in &self.samples {
            let h = source.h(s.v)?;
            let res = if s.r == 0.0 {
                ell.n() as f64 * ell.weighting(s.ddv, sign) + h
            } else {
                ell.weighting(s.ddv, sign) + k * ell.weighting(s.dv / s.r, sign) + h
            };
            worst = worst.max(res.abs());
        }
        Ok(worst)
    }

    /// CSV with columns `r,v,dv,ddv`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,v,dv,ddv\n");
        for s in &self.samples {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", s.r, s.v, s.dv, s.ddv));
        }
        out
    }
}

/// Shoots from the center with `v(0) = amplitude`, `v′(0) = 0` and stops at
/// the first zero, at `r_max`, or on step failure.
pub fn integrate_shoot(cfg: &ShootConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let ell = cfg.ell;
    let sign = cfg.sign;
    let a = cfg.amplitude;
    let source = &cfg.source;

    let h0 = source.h(a)?;
    let ddv0 = radial_rhs(0.0, a, 0.0, h0, &ell, sign)?;
    let y0 = [a + 0.5 * ddv0 * R0 * R0, ddv0 * R0];

    let source_err: RefCell<Option<Error>> = RefCell::new(None);
    let rhs = |r: f64, y: &[f64; 2]| -> [f64; 2] {
        let h = match source.h(y[0]) {
            Ok(h) => h,
            Err(e) => {
                source_err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        };
        [y[1], rhs_unchecked(r, y[1], h, &ell, sign)]
    };
    let ddv_at = |r: f64, v: f64, dv: f64| -> f64 {
        match source.h(v) {
            Ok(h) => rhs_unchecked(r, dv, h, &ell, sign),
            Err(_) => f64::NAN,
        }
    };

    let mut opts = Options::<2>::new(cfg.atol * a, cfg.rtol);
    opts.h_init = Some(R0);

    let mut samples = vec![
        Sample { r: 0.0, v: a, dv: 0.0, ddv: ddv0 },
        Sample { r: R0, v: y0[0], dv: y0[1], ddv: ddv_at(R0, y0[0], y0[1]) },
    ];
    let ratio = 10f64.powf(1.0 / cfg.samples_per_decade as f64);
    let mut next_grid = R0 * ratio;
    let mut steps: Vec<DenseStep<2>> = Vec::new();
    let mut crossing = None;

    let out = ode::integrate(rhs, R0, y0, cfg.r_max, &opts, |s| {
        let end = if s.y1[0] <= 0.0 {
            let r = ode::locate_root(s, |_, y| y[0], ZERO_TOL);
            crossing = Some(r);
            r
        } else {
            s.t1()
        };
        while next_grid < end {
            let y = s.eval(next_grid);
            samples.push(Sample { r: next_grid, v: y[0], dv: y[1], ddv: ddv_at(next_grid, y[0], y[1]) });
            next_grid *= ratio;
        }
        steps.push(*s);
        if let Some(r) = crossing {
            let dv = s.eval(r)[1];
            samples.push(Sample { r, v: 0.0, dv, ddv: ddv_at(r, 0.0, dv) });
            return Control::Stop;
        }
        if samples.last().map_or(true, |l| end > l.r) {
            samples.push(Sample { r: end, v: s.y1[0], dv: s.y1[1], ddv: ddv_at(end, s.y1[0], s.y1[1]) });
        }
        Control::Continue
    });

    let terminal = if let Some(r) = crossing {
        Terminal::CrossedZero { r }
    } else if let Some(e) = source_err.into_inner() {
        Terminal::StepFailure { r: out.t, reason: format!("source evaluation failed: {e}") }
    } else {
        match out.status {
            ode::Status::Finished => Terminal::ReachedRmax { r: cfg.r_max },
            ode::Status::Stopped => unreachable!("observer stops only at a crossing"),
            ode::Status::StepTooSmall { t } => {
                Terminal::StepFailure { r: t, reason: "step size below 1e-14 r".into() }
            }
            ode::Status::NonFinite { t } => {
                Terminal::StepFailure { r: t, reason: "non-finite derivative".into() }
            }
            ode::Status::MaxSteps { t } => {
                Terminal::StepFailure { r: t, reason: "step budget exhausted".into() }
            }
        }
    };

    Ok(Trajectory {
        samples,
        terminal,
        config: cfg.echo(),
        accepted_steps: out.accepted,
        rejected_steps: out.rejected,
        steps,
        seed_ddv: ddv0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ell(l: f64, bl: f64, n: usize) -> Ellipticity {
        Ellipticity::new(l, bl, n).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let e = ell(1.0, 2.0, 3);
        let v = radial_rhs(0.0, 1.0, 0.0, 1.0, &e, OperatorSign::Plus).unwrap();
        assert!((v + 1.0 / 3.0).abs() < 1e-15);
        let lap = ell(1.0, 1.0, 4);
        assert_eq!(radial_rhs(0.0, 1.0, 0.0, 2.0, &lap, OperatorSign::Minus).unwrap(), -0.5);
        assert_eq!(radial_rhs(1.0, 1.0, -0.5, 1.0, &e, OperatorSign::Plus).unwrap(), 0.0);
        assert!(radial_rhs(0.0, 1.0, 0.1, 1.0, &e, OperatorSign::Plus).is_err());
        assert!(radial_rhs(-1.0, 1.0, 0.0, 1.0, &e, OperatorSign::Plus).is_err());
    }

    #[test]
    fn rhs_agrees_with_radial_operator() {
        let e = ell(0.5, 3.0, 4);
        for sign in [OperatorSign::Plus, OperatorSign::Minus] {
            for &(r, vp, h) in &[(0.3, -1.2, 0.7), (2.0, 0.4, -3.0), (1.0, -0.1, 0.05)] {
                let vpp = radial_rhs(r, 0.0, vp, h, &e, sign).unwrap();
                let m = crate::pucci::pucci_radial_eval(vp, vpp, r, &e, sign).unwrap();
                assert!((m + h).abs() < 1e-12, "{sign:?} r={r}");
            }
        }
    }

    #[test]
    fn linear_shot_is_sinc() {
        let cfg = ShootConfig::new(Source::Linear { mu: 1.0 }, ell(1.0, 1.0, 3), OperatorSign::Plus, 1.0)
            .with_tolerances(1e-13, 1e-12);
        let tr = integrate_shoot(&cfg).unwrap();
        let rho = tr.crossing().unwrap();
        assert!((rho - std::f64::consts::PI).abs() < 1e-8, "rho = {rho}");
        for s in &tr.samples {
            let want = if s.r == 0.0 { 1.0 } else { s.r.sin() / s.r };
            assert!((s.v - want).abs() < 1e-8, "r={} v={} want={}", s.r, s.v, want);
        }
        assert!(tr.equation_residual(&cfg.source).unwrap() < 1e-9);
    }

    #[test]
    fn samples_strictly_increasing() {
        let cfg = ShootConfig::new(Source::PurePower { p: 3.0 }, ell(1.0, 2.0, 5), OperatorSign::Plus, 1.0);
        let tr = integrate_shoot(&cfg).unwrap();
        for w in tr.samples.windows(2) {
            assert!(w[1].r > w[0].r, "{:?}", w);
        }
        assert!(tr.crossing().is_some());
        assert!(tr.to_csv().starts_with("r,v,dv,ddv\n"));
    }

    #[test]
    fn invalid_config_rejected() {
        let e = ell(1.0, 1.0, 3);
        let bad = ShootConfig::new(Source::PurePower { p: 3.0 }, e, OperatorSign::Plus, 0.0);
        assert!(integrate_shoot(&bad).is_err());
        let bad = ShootConfig::new(Source::PurePower { p: 1.0 }, e, OperatorSign::Plus, 1.0);
        assert!(integrate_shoot(&bad).is_err());
    }
}
