use serde::Serialize;

use super::{CriticalExponents, Terminal, Trajectory};
use crate::error::{invalid, Result};
use crate::expr::GradientPair;
use crate::pucci::OperatorSign;

/// Relative variation below which a weighted tail counts as converged.
pub const CONVERGENCE_TOL: f64 = 0.01;
/// Relative oscillation amplitude above which an oscillation counts.
pub const OSCILLATION_TOL: f64 = 0.05;
pub const MIN_EXTREMA: usize = 3;
pub const MIN_WINDOW_SAMPLES: usize = 50;

const MINUS_CAVEAT: &str = "for the minus operator above the critical exponent the positive solution \
is either slow or pseudo-slow decaying; the classifier does not force one of the two";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayVariant {
    Crossing { r: f64 },
    /// `r^{Ñ−2} v → c`.
    FastDecay { c: f64 },
    /// `r^α v → c_star`.
    SlowDecay { c_star: f64 },
    /// `r^α v` oscillates between `c1 < c2`.
    PseudoSlow { c1: f64, c2: f64 },
    Undetermined,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DecayDiagnostics {
    pub window: Option<(f64, f64)>,
    pub window_samples: usize,
    /// Minus the log-log slope of `v` over the window.
    pub fitted_exponent: Option<f64>,
    /// `(max − min)/mean` of `r^{Ñ−2} v` over the last half-decade.
    pub fast_variation: Option<f64>,
    /// Same for `r^α v`.
    pub slow_variation: Option<f64>,
    pub slow_extrema: usize,
    pub slow_amplitude_first_half: Option<f64>,
    pub slow_amplitude_second_half: Option<f64>,
    /// Second-half over first-half oscillation amplitude of `r^α v`.
    pub persistence: Option<f64>,
    /// Extrema of `r^α v` over `[10, r_max]`, a range much longer than the
    /// classification window.
    pub long_range_extrema: usize,
    /// `(min, max)` of `r^α v` over `[10, r_max]`.
    pub long_range_bounds: Option<(f64, f64)>,
    /// Oscillation amplitude of `r^α v` on the upper half of `[10, r_max]`
    /// (in `ln r`) over that on the lower half.
    pub long_range_persistence: Option<f64>,
    pub message: Option<String>,
    pub caveat: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayClass {
    pub variant: DecayVariant,
    pub alpha: f64,
    pub n_tilde_used: f64,
    pub r_max: f64,
    pub diagnostics: DecayDiagnostics,
}

fn variation(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (max - min) / mean.abs()
}

fn count_extrema(values: &[f64]) -> usize {
    let mut count = 0;
    let mut last_dir = 0i8;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        let dir = if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        };
        if dir != 0 {
            if last_dir != 0 && dir != last_dir {
                count += 1;
            }
            last_dir = dir;
        }
    }
    count
}

/// Least-squares slope of `ln v` against `ln r`.
fn log_slope(rs: &[f64], vs: &[f64]) -> f64 {
    let xs: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = vs.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Classifies the tail of a positive trajectory on `[r_max/10, r_max]`.
///
/// When the trajectory comes from a transformed source, `v = φ_g(u)`, so the
/// weighted tails of `v` are exactly those of `φ_g(u)`; `pair` is only used
/// to annotate the report.
pub fn classify_decay(
    traj: &Trajectory,
    p: f64,
    consts: &CriticalExponents,
    pair: Option<&GradientPair>,
) -> Result<DecayClass> {
    if !(p > 1.0) {
        return invalid(format!("p must exceed 1, got {p}"));
    }
    let sign = traj.config.sign;
    let alpha = 2.0 / (p - 1.0);
    let n_tilde = consts.n_tilde(sign);
    let r_max = traj.config.r_max;
    let mut diag = DecayDiagnostics::default();
    if sign == OperatorSign::Minus {
        diag.caveat = Some(MINUS_CAVEAT);
    }
    let report = |variant, diag: DecayDiagnostics| DecayClass {
        variant,
        alpha,
        n_tilde_used: n_tilde,
        r_max,
        diagnostics: diag,
    };

    match &traj.terminal {
        Terminal::CrossedZero { r } => return Ok(report(DecayVariant::Crossing { r: *r }, diag)),
        Terminal::StepFailure { r, reason } => {
            diag.message = Some(format!("integration failed at r = {r}: {reason}"));
            return Ok(report(DecayVariant::Undetermined, diag));
        }
        Terminal::ReachedRmax { .. } => {}
    }
    if let Some(bad) = traj.samples.iter().find(|s| s.v <= 0.0) {
        diag.message = Some(format!("v is not positive at r = {}", bad.r));
        return Ok(report(DecayVariant::Undetermined, diag));
    }

    let lo = r_max / 10.0;
    let tail: Vec<_> = traj.samples.iter().filter(|s| s.r >= lo && s.r <= r_max).collect();
    diag.window = Some((lo, r_max));
    diag.window_samples = tail.len();
    if tail.len() < MIN_WINDOW_SAMPLES {
        diag.message = Some(format!(
            "tail window has {} samples, at least {MIN_WINDOW_SAMPLES} required",
            tail.len()
        ));
        return Ok(report(DecayVariant::Undetermined, diag));
    }

    let rs: Vec<f64> = tail.iter().map(|s| s.r).collect();
    let vs: Vec<f64> = tail.iter().map(|s| s.v).collect();
    diag.fitted_exponent = Some(-log_slope(&rs, &vs));

    let half = r_max / 10f64.sqrt();
    let last_half: Vec<usize> = (0..rs.len()).filter(|&i| rs[i] >= half).collect();
    let first_half: Vec<usize> = (0..rs.len()).filter(|&i| rs[i] < half).collect();
    let w_s: Vec<f64> = rs.iter().zip(&vs).map(|(r, v)| r.powf(alpha) * v).collect();
    let pick = |w: &[f64], idx: &[usize]| idx.iter().map(|&i| w[i]).collect::<Vec<f64>>();

    let fast = if n_tilde > 2.0 {
        let w_f: Vec<f64> = rs.iter().zip(&vs).map(|(r, v)| r.powf(n_tilde - 2.0) * v).collect();
        let var = variation(&pick(&w_f, &last_half));
        diag.fast_variation = Some(var);
        (var < CONVERGENCE_TOL).then(|| *w_f.last().expect("nonempty"))
    } else {
        None
    };
    let slow_var = variation(&pick(&w_s, &last_half));
    diag.slow_variation = Some(slow_var);
    diag.slow_extrema = count_extrema(&w_s);
    let amp1 = variation(&pick(&w_s, &first_half));
    let amp2 = slow_var;
    diag.slow_amplitude_first_half = Some(amp1);
    diag.slow_amplitude_second_half = Some(amp2);
    diag.persistence = Some(amp2 / amp1);
    long_range(traj, alpha, &mut diag);
    if let Some(pair) = pair {
        diag.message = Some(format!("tails of v equal tails of phi_g(u) for pair '{}'", pair.label));
    }

    if let Some(c) = fast {
        if c > 0.0 {
            return Ok(report(DecayVariant::FastDecay { c }, diag));
        }
    }
    if slow_var < CONVERGENCE_TOL {
        let c_star = *w_s.last().expect("nonempty");
        return Ok(report(DecayVariant::SlowDecay { c_star }, diag));
    }
    let whole = variation(&w_s);
    if diag.slow_extrema >= MIN_EXTREMA && whole > OSCILLATION_TOL && amp1 > OSCILLATION_TOL && amp2 >= 0.5 * amp1 {
        let c1 = w_s.iter().copied().fold(f64::INFINITY, f64::min);
        let c2 = w_s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if c1 > 0.0 && c1 < c2 {
            return Ok(report(DecayVariant::PseudoSlow { c1, c2 }, diag));
        }
    }
    if diag.message.is_none() {
        diag.message = Some(format!(
            "no rule matched: fast variation {:?}, slow variation {slow_var:.3e}, {} extrema of r^alpha v",
            diag.fast_variation, diag.slow_extrema
        ));
    }
    Ok(report(DecayVariant::Undetermined, diag))
}

fn long_range(traj: &Trajectory, alpha: f64, diag: &mut DecayDiagnostics) {
    let r_max = traj.config.r_max;
    let lo = 10.0_f64;
    if r_max <= 100.0 * lo {
        return;
    }
    let mid = (lo * r_max).sqrt();
    let pts: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .filter(|s| s.r >= lo)
        .map(|s| (s.r, s.r.powf(alpha) * s.v))
        .collect();
    let w: Vec<f64> = pts.iter().map(|x| x.1).collect();
    let lower: Vec<f64> = pts.iter().filter(|x| x.0 < mid).map(|x| x.1).collect();
    let upper: Vec<f64> = pts.iter().filter(|x| x.0 >= mid).map(|x| x.1).collect();
    if lower.len() < 2 || upper.len() < 2 {
        return;
    }
    diag.long_range_extrema = count_extrema(&w);
    let min = w.iter().copied().fold(f64::INFINITY, f64::min);
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    diag.long_range_bounds = Some((min, max));
    diag.long_range_persistence = Some(variation(&upper) / variation(&lower));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrema_counting() {
        assert_eq!(count_extrema(&[1.0, 2.0, 1.0, 2.0, 1.0]), 3);
        assert_eq!(count_extrema(&[1.0, 2.0, 3.0]), 0);
        assert_eq!(count_extrema(&[1.0, 2.0, 2.0, 1.0]), 1);
    }

    #[test]
    fn slope_of_power() {
        let rs: Vec<f64> = (1..50).map(|i| i as f64).collect();
        let vs: Vec<f64> = rs.iter().map(|r| 3.0 * r.powf(-1.5)).collect();
        assert!((log_slope(&rs, &vs) + 1.5).abs() < 1e-12);
    }
}
