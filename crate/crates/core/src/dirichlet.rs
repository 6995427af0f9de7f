//! Positive radial solutions of `M±(D²u + g(u)∇u⊗∇u) + f(u) = 0` in `B_R`
//! with `u = 0` on `∂B_R`.
//!
//! Shots are taken in the transformed variable `v = φ_g(u)`, where the
//! equation reads `M±(D²v) + h(v) = 0`; the amplitude `v(0)` is tuned until
//! the first zero sits at `R`, and the profile is mapped back through
//! `u = φ_g⁻¹(v)`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::expr::{Expr, GradientPair};
use crate::pucci::{Ellipticity, OperatorSign};
use crate::radial::{self, integrate_shoot, ShootConfig, Source, Terminal, Trajectory};
use crate::transform::TransformTable;

/// How `f` is given.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    /// `f` is the pair's own `f`.
    Autonomous,
    /// `f(t) = −γ φ_g(t) e^{−G(t)} + ψ(t)`, so that `h(s) = −γ s + h̄(s)`.
    Decomposed {
        gamma: f64,
        #[serde(serialize_with = "as_text")]
        psi: Expr,
    },
}

fn as_text<S: serde::Serializer>(e: &Expr, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&e.to_string())
}

#[derive(Debug, Clone, Copy)]
pub struct DirichletOptions {
    /// Shot length for [`crossing_radius`]; solving and scanning shoot only
    /// to `2R`, which is enough to compare `ρ(a)` with `R`.
    pub r_max: f64,
    pub atol: f64,
    pub rtol: f64,
    pub transform_tol: f64,
    /// Uniform nodes of the back-transformed profile.
    pub grid_nodes: usize,
    /// Stop when `|ρ(a) − R| ≤ rho_rel_tol·R`.
    pub rho_rel_tol: f64,
}

impl Default for DirichletOptions {
    fn default() -> Self {
        Self {
            r_max: radial::DEFAULT_R_MAX,
            atol: radial::DEFAULT_ATOL,
            rtol: 1e-12,
            transform_tol: 1e-12,
            grid_nodes: 4000,
            rho_rel_tol: 1e-8,
        }
    }
}

/// A transformed source together with the table it was built from.
#[derive(Clone)]
pub struct BallSource {
    spec: SourceSpec,
    table: Arc<TransformTable>,
    source: Source,
}

impl BallSource {
    /// Builds the table covering amplitudes up to `amp_max` (with room for
    /// shots that overshoot their start value).
    pub fn new(spec: &SourceSpec, pair: &GradientPair, amp_max: f64, tol: f64) -> Result<Self> {
        if !(amp_max > 0.0) {
            return invalid(format!("amplitude must be positive, got {amp_max}"));
        }
        let cover = (100.0 * amp_max).max(10.0);
        let table = TransformTable::covering_truncated(pair, cover, tol)?;
        if table.phi_max() < amp_max {
            return Err(Error::Overflow {
                t: table.overflow_at().unwrap_or(table.t_max()),
                limit: crate::transform::G_OVERFLOW,
            });
        }
        let table = Arc::new(table);
        let source = match spec {
            SourceSpec::Autonomous => Source::Transformed(table.clone()),
            SourceSpec::Decomposed { gamma, psi } => {
                if !(*gamma >= 0.0) {
                    return invalid(format!("gamma must be nonnegative, got {gamma}"));
                }
                check_psi_nonnegative(psi, pair, table.t_max())?;
                let (gamma, psi, t2, params) = (*gamma, psi.clone(), table.clone(), pair.params.clone());
                Source::custom(format!("-{gamma}*s + hbar(s) for '{}'", pair.label), move |s| {
                    let t = t2.phi_inv(s)?;
                    let psi_t = psi.eval(t, &params)?;
                    Ok(-gamma * s + t2.big_g(t)?.exp() * psi_t)
                })
            }
        };
        Ok(Self { spec: spec.clone(), table, source })
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn table(&self) -> &TransformTable {
        &self.table
    }

    /// `f(t)` of the original equation.
    pub fn f_at(&self, t: f64) -> Result<f64> {
        let pair = self.table.pair();
        match &self.spec {
            SourceSpec::Autonomous => Ok(pair.f_at(t)?),
            SourceSpec::Decomposed { gamma, psi } => {
                let (big_g, phi) = self.table.eval(t)?;
                Ok(-gamma * phi * (-big_g).exp() + psi.eval(t, &pair.params)?)
            }
        }
    }
}

fn check_psi_nonnegative(psi: &Expr, pair: &GradientPair, t_max: f64) -> Result<()> {
    for k in 0..=200 {
        let t = t_max * k as f64 / 200.0;
        let v = psi.eval(t, &pair.params)?;
        if v < 0.0 {
            return invalid(format!("psi must be nonnegative, psi({t}) = {v}"));
        }
    }
    Ok(())
}

fn shoot(src: &BallSource, ell: &Ellipticity, sign: OperatorSign, a: f64, r_max: f64, opts: &DirichletOptions) -> Result<Trajectory> {
    let cfg = ShootConfig::new(src.source.clone(), *ell, sign, a)
        .with_r_max(r_max)
        .with_tolerances(opts.atol, opts.rtol);
    let tr = integrate_shoot(&cfg)?;
    if let Terminal::StepFailure { r, reason } = &tr.terminal {
        return Err(Error::Integration(format!("shot with amplitude {a} failed at r = {r}: {reason}")));
    }
    Ok(tr)
}

/// First zero `ρ(a)` of the transformed shot, `None` if it stays positive up
/// to `opts.r_max`.
pub fn crossing_radius(
    spec: &SourceSpec,
    pair: &GradientPair,
    ell: &Ellipticity,
    sign: OperatorSign,
    amplitude: f64,
    opts: &DirichletOptions,
) -> Result<Option<f64>> {
    if !(amplitude > 0.0) {
        return invalid(format!("amplitude must be positive, got {amplitude}"));
    }
    let src = BallSource::new(spec, pair, amplitude, opts.transform_tol)?;
    Ok(shoot(&src, ell, sign, amplitude, opts.r_max, opts)?.crossing())
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialSolution {
    #[serde(rename = "R")]
    pub radius: f64,
    pub amplitude: f64,
    pub amplitude_bracket: (f64, f64),
    /// First zero of the accepted shot; `|crossing − R| ≤ rho_rel_tol·R`.
    pub crossing: f64,
    pub source: SourceSpec,
    #[serde(flatten)]
    pub ell: Ellipticity,
    pub sign: OperatorSign,
    #[serde(skip)]
    pub v_profile: Trajectory,
    /// `(r, u)` on a uniform grid over `[0, crossing]`.
    #[serde(skip)]
    pub u_profile: Vec<(f64, f64)>,
    pub residual_transformed: f64,
    pub residual_original: f64,
    /// Radii where `v″` changes sign.
    pub kinks: Vec<f64>,
    pub transformed_detail: TransformedResidual,
    pub original_detail: OriginalResidual,
    #[serde(skip)]
    ball_source: BallSource,
}

impl std::fmt::Debug for BallSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BallSource({:?})", self.spec)
    }
}

impl RadialSolution {
    pub fn ball_source(&self) -> &BallSource {
        &self.ball_source
    }

    /// `v` at `r` from the dense output.
    pub fn v_at(&self, r: f64) -> Option<f64> {
        self.v_profile.eval_at(r).map(|x| x.0)
    }

    /// Back-transformed profile on `nodes` uniform nodes over `[0, crossing]`.
    pub fn u_profile_on(&self, nodes: usize) -> Result<Vec<(f64, f64)>> {
        u_profile(&self.v_profile, self.ball_source.table(), self.crossing, nodes)
    }

    /// CSV with columns `r,v,u` on the stored profile.
    pub fn profile_csv(&self) -> String {
        let mut out = String::from("r,v,u\n");
        for &(r, u) in &self.u_profile {
            let v = self.v_at(r).unwrap_or(0.0);
            out.push_str(&format!("{r:.16e},{v:.16e},{u:.16e}\n"));
        }
        out
    }
}

fn u_profile(traj: &Trajectory, table: &TransformTable, rho: f64, nodes: usize) -> Result<Vec<(f64, f64)>> {
    if nodes < 100 {
        return invalid(format!("grid too coarse: {nodes} nodes, at least 100 required"));
    }
    let dr = rho / (nodes - 1) as f64;
    (0..nodes)
        .map(|i| {
            if i == nodes - 1 {
                return Ok((rho, 0.0));
            }
            let r = i as f64 * dr;
            let v = traj.eval_at(r).map(|x| x.0).unwrap_or(0.0).max(0.0);
            Ok((r, table.phi_inv(v)?))
        })
        .collect()
}

/// Radii in `(0, ρ)` where `v″` changes sign. For `λ < Λ` the equation
/// switches weights there, so `v″` has a kink and `v‴` jumps.
pub fn kink_radii(traj: &Trajectory, source: &Source, rho: f64) -> Result<Vec<f64>> {
    let ell = traj.config.ell;
    let sign = traj.config.sign;
    if ell.lambda() == ell.big_lambda() {
        return Ok(Vec::new());
    }
    let ddv = |r: f64| -> Result<f64> {
        let (v, dv) = traj.eval_at(r).unwrap_or((0.0, 0.0));
        radial::radial_rhs(r, v, dv, source.h(v)?, &ell, sign)
    };
    let mut out = Vec::new();
    for s in traj.dense_steps() {
        if s.t0 >= rho {
            break;
        }
        let (mut lo, mut hi) = (s.t0, s.t1().min(rho));
        let f_lo = ddv(lo)?;
        if (f_lo > 0.0) == (ddv(hi)? > 0.0) {
            continue;
        }
        while hi - lo > 1e-14 * hi {
            let mid = 0.5 * (lo + hi);
            if (ddv(mid)? > 0.0) == (f_lo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    Ok(out)
}

/// Transformed residual: sup of the defect of the dense interpolant in the
/// `v`-equation (using the derivative of the interpolated `v′`), plus
/// `|v(R)|`. Steps containing a kink of `v″` are skipped in `sup` (a
/// polynomial interpolant cannot follow the kink) and included in `sup_all`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformedResidual {
    pub sup: f64,
    pub sup_all: f64,
    pub skipped_steps: usize,
}

/// Original residual: sup over interior nodes of
/// `|M±(diag(u″ + g(u)u′², u′/r, …)) + f(u)|` with centered differences.
/// Nodes whose stencil contains a kink are skipped in `sup` (the stencil is
/// only first-order accurate there) and included in `sup_all`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OriginalResidual {
    pub sup: f64,
    pub sup_all: f64,
    pub skipped_nodes: usize,
    pub nodes: usize,
}

pub fn residual_transformed(sol: &RadialSolution) -> Result<f64> {
    Ok(transformed_defect(&sol.v_profile, sol.ball_source.source(), sol.crossing, sol.radius, &sol.kinks)?.sup)
}

fn transformed_defect(traj: &Trajectory, source: &Source, rho: f64, radius: f64, kinks: &[f64]) -> Result<TransformedResidual> {
    let ell = traj.config.ell;
    let sign = traj.config.sign;
    let k = (ell.n() - 1) as f64;
    let steps = traj.dense_steps();
    let mut points: Vec<f64> = (1..2000).map(|i| rho * i as f64 / 2000.0).collect();
    points.extend(steps.iter().map(|s| s.t0 + 0.5 * s.h).filter(|&m| m < rho));
    let kink_steps: Vec<(f64, f64)> = steps
        .iter()
        .filter(|s| kinks.iter().any(|&q| q >= s.t0 && q <= s.t1()))
        .map(|s| (s.t0, s.t1()))
        .collect();
    let (mut sup, mut sup_all) = (0.0f64, 0.0f64);
    for r in points {
        let Some((v, dv)) = traj.eval_at(r) else { continue };
        let ddv = traj.interpolant_ddv(r).unwrap_or(0.0);
        let res = (ell.weighting(ddv, sign) + k * ell.weighting(dv / r, sign) + source.h(v)?).abs();
        sup_all = sup_all.max(res);
        if !kink_steps.iter().any(|&(a, b)| r >= a && r <= b) {
            sup = sup.max(res);
        }
    }
    let v_end = if radius <= traj.r_end() {
        traj.eval_at(radius).map_or(0.0, |x| x.0.abs())
    } else {
        let (_, dv) = traj.eval_at(rho).unwrap_or((0.0, 0.0));
        (dv * (radius - rho)).abs()
    };
    Ok(TransformedResidual { sup: sup + v_end, sup_all: sup_all + v_end, skipped_steps: kink_steps.len() })
}

/// Original-equation residual on `sol.u_profile` (kink stencils skipped; see
/// [`OriginalResidual`]).
pub fn residual_original(sol: &RadialSolution, pair: &GradientPair, ell: &Ellipticity, sign: OperatorSign) -> Result<f64> {
    Ok(original_defect(&sol.u_profile, &sol.ball_source, pair, ell, sign, &sol.kinks)?.sup)
}

/// Original-equation residual on a freshly sampled grid of `nodes` nodes.
pub fn residual_original_with(
    sol: &RadialSolution,
    pair: &GradientPair,
    ell: &Ellipticity,
    sign: OperatorSign,
    nodes: usize,
) -> Result<OriginalResidual> {
    original_defect(&sol.u_profile_on(nodes)?, &sol.ball_source, pair, ell, sign, &sol.kinks)
}

/// Original-equation residual of an arbitrary profile on a uniform grid,
/// with the pair's own `f`.
pub fn residual_on_profile(
    profile: &[(f64, f64)],
    pair: &GradientPair,
    ell: &Ellipticity,
    sign: OperatorSign,
    kinks: &[f64],
) -> Result<OriginalResidual> {
    defect(profile, &|u| Ok(pair.f_at(u)?), pair, ell, sign, kinks)
}

fn original_defect(
    profile: &[(f64, f64)],
    src: &BallSource,
    pair: &GradientPair,
    ell: &Ellipticity,
    sign: OperatorSign,
    kinks: &[f64],
) -> Result<OriginalResidual> {
    defect(profile, &|u| src.f_at(u), pair, ell, sign, kinks)
}

fn defect(
    profile: &[(f64, f64)],
    f: &dyn Fn(f64) -> Result<f64>,
    pair: &GradientPair,
    ell: &Ellipticity,
    sign: OperatorSign,
    kinks: &[f64],
) -> Result<OriginalResidual> {
    if profile.len() < 100 {
        return invalid(format!("grid too coarse: {} nodes, at least 100 required", profile.len()));
    }
    let k = (ell.n() - 1) as f64;
    let dr = profile[1].0 - profile[0].0;
    let (mut sup, mut sup_all, mut skipped) = (0.0f64, 0.0f64, 0);
    for i in 1..profile.len() - 1 {
        let (r, u) = profile[i];
        let (um, up) = (profile[i - 1].1, profile[i + 1].1);
        let du = (up - um) / (2.0 * dr);
        let ddu = (up - 2.0 * u + um) / (dr * dr);
        let radial = ddu + pair.g_at(u)? * du * du;
        let m = ell.weighting(radial, sign) + k * ell.weighting(du / r, sign);
        let res = (m + f(u)?).abs();
        sup_all = sup_all.max(res);
        if kinks.iter().any(|&q| q >= profile[i - 1].0 && q <= profile[i + 1].0) {
            skipped += 1;
        } else {
            sup = sup.max(res);
        }
    }
    Ok(OriginalResidual { sup, sup_all, skipped_nodes: skipped, nodes: profile.len() })
}

/// `ρ(a) − R` with a missing crossing counted as `+∞`.
fn excess(rho: Option<f64>, radius: f64) -> f64 {
    rho.map_or(f64::INFINITY, |r| r - radius)
}

struct Solver<'a> {
    src: &'a BallSource,
    ell: &'a Ellipticity,
    sign: OperatorSign,
    radius: f64,
    opts: &'a DirichletOptions,
}

impl Solver<'_> {
    fn rho(&self, a: f64) -> Result<Option<f64>> {
        Ok(shoot(self.src, self.ell, self.sign, a, 2.0 * self.radius, self.opts)?.crossing())
    }

    /// Bisection on `a` between amplitudes whose `ρ − R` differ in sign.
    fn refine(&self, mut lo: f64, mut hi: f64) -> Result<RadialSolution> {
        let f_lo = excess(self.rho(lo)?, self.radius);
        let tol = self.opts.rho_rel_tol * self.radius;
        let mut best = None;
        for _ in 0..200 {
            let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
            if mid <= lo || mid >= hi {
                break;
            }
            let e = excess(self.rho(mid)?, self.radius);
            if e.abs() <= tol {
                best = Some(mid);
                break;
            }
            if (e > 0.0) == (f_lo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let a = match best {
            Some(a) => a,
            None => {
                let (el, eh) = (excess(self.rho(lo)?, self.radius), excess(self.rho(hi)?, self.radius));
                let (a, e) = if el.abs() <= eh.abs() { (lo, el) } else { (hi, eh) };
                if !(e.abs() <= tol) {
                    return Err(Error::Bracket(format!(
                        "amplitude bracket ({lo}, {hi}) collapsed with |rho - R| = {:e}",
                        e.abs()
                    )));
                }
                a
            }
        };
        self.assemble(a, (lo, hi))
    }

    fn assemble(&self, a: f64, bracket: (f64, f64)) -> Result<RadialSolution> {
        let traj = shoot(self.src, self.ell, self.sign, a, 2.0 * self.radius, self.opts)?;
        let rho = traj.crossing().ok_or_else(|| Error::Integration("accepted shot lost its zero".into()))?;
        if let Some(s) = traj.samples.iter().find(|s| s.r < rho && s.v <= 0.0) {
            return Err(Error::Integration(format!("profile not positive at r = {}", s.r)));
        }
        let profile = u_profile(&traj, self.src.table(), rho, self.opts.grid_nodes)?;
        let kinks = kink_radii(&traj, self.src.source(), rho)?;
        let res_t = transformed_defect(&traj, self.src.source(), rho, self.radius, &kinks)?;
        let res_o = original_defect(&profile, self.src, self.src.table().pair(), self.ell, self.sign, &kinks)?;
        Ok(RadialSolution {
            radius: self.radius,
            amplitude: a,
            amplitude_bracket: bracket,
            crossing: rho,
            source: self.src.spec.clone(),
            ell: *self.ell,
            sign: self.sign,
            v_profile: traj,
            u_profile: profile,
            residual_transformed: res_t.sup,
            residual_original: res_o.sup,
            kinks,
            transformed_detail: res_t,
            original_detail: res_o,
            ball_source: self.src.clone(),
        })
    }
}

/// Finds the amplitude with `ρ(a) = R` inside `amp_bracket`.
pub fn solve_ball(
    spec: &SourceSpec,
    pair: &GradientPair,
    ell: &Ellipticity,
    sign: OperatorSign,
    radius: f64,
    amp_bracket: (f64, f64),
    opts: &DirichletOptions,
) -> Result<RadialSolution> {
    let (a0, a1) = amp_bracket;
    if !(radius > 0.0 && radius.is_finite()) {
        return invalid(format!("radius must be positive, got {radius}"));
    }
    if !(a0 > 0.0 && a1 > a0) {
        return invalid(format!("amplitude bracket must satisfy 0 < a0 < a1, got ({a0}, {a1})"));
    }
    let src = BallSource::new(spec, pair, a1, opts.transform_tol)?;
    let solver = Solver { src: &src, ell, sign, radius, opts };
    let (r0, r1) = (solver.rho(a0)?, solver.rho(a1)?);
    let (e0, e1) = (excess(r0, radius), excess(r1, radius));
    if (e0 > 0.0) == (e1 > 0.0) && e0.abs() > opts.rho_rel_tol * radius && e1.abs() > opts.rho_rel_tol * radius {
        return Err(Error::Bracket(format!(
            "rho(a) - R has the same sign at both ends: rho({a0}) = {r0:?}, rho({a1}) = {r1:?} (R = {radius})"
        )));
    }
    solver.refine(a0, a1)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    #[serde(rename = "R")]
    pub radius: f64,
    /// `(a, ρ(a))` over the grid; `None` means no zero before `2R`.
    pub rho: Vec<(f64, Option<f64>)>,
    pub sign_changes: usize,
    /// `ρ` is constant in `a` (relative variation below 1e-10).
    pub degenerate: bool,
    pub solutions: Vec<RadialSolution>,
}

pub const DEGENERATE_TOL: f64 = 1e-10;

/// Counts sign changes of `ρ(a) − R` over `amp_grid` and refines each one.
pub fn uniqueness_scan(
    spec: &SourceSpec,
    pair: &GradientPair,
    ell: &Ellipticity,
    sign: OperatorSign,
    radius: f64,
    amp_grid: &[f64],
    opts: &DirichletOptions,
) -> Result<ScanReport> {
    if amp_grid.len() < 20 {
        return invalid(format!("amplitude grid needs at least 20 points, got {}", amp_grid.len()));
    }
    if amp_grid.windows(2).any(|w| !(w[1] > w[0])) || !(amp_grid[0] > 0.0) {
        return invalid("amplitude grid must be positive and strictly increasing");
    }
    if amp_grid[0] > 1e-2 || *amp_grid.last().expect("nonempty") < 1e2 {
        return invalid("amplitude grid must span at least [1e-2, 1e2]");
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return invalid(format!("radius must be positive, got {radius}"));
    }
    let a_max = *amp_grid.last().expect("nonempty");
    let src = BallSource::new(spec, pair, a_max, opts.transform_tol)?;
    let solver = Solver { src: &src, ell, sign, radius, opts };

    let rho: Vec<(f64, Option<f64>)> = amp_grid
        .par_iter()
        .map(|&a| solver.rho(a).map(|r| (a, r)))
        .collect::<Result<_>>()?;

    let finite: Vec<f64> = rho.iter().filter_map(|x| x.1).collect();
    let degenerate = finite.len() == rho.len() && {
        let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
        (max - min) <= DEGENERATE_TOL * max.abs()
    };
    if degenerate {
        return Ok(ScanReport { radius, rho, sign_changes: 0, degenerate, solutions: Vec::new() });
    }

    let brackets: Vec<(f64, f64)> = rho
        .windows(2)
        .filter(|w| (excess(w[0].1, radius) > 0.0) != (excess(w[1].1, radius) > 0.0))
        .map(|w| (w[0].0, w[1].0))
        .collect();
    let solutions = brackets
        .par_iter()
        .map(|&(lo, hi)| solver.refine(lo, hi))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanReport { radius, rho, sign_changes: brackets.len(), degenerate, solutions })
}

/// Logarithmic grid of `k ≥ 2` points over `[a0, a1]`.
pub fn log_grid(a0: f64, a1: f64, k: usize) -> Result<Vec<f64>> {
    if !(a0 > 0.0 && a1 > a0 && k >= 2) {
        return invalid(format!("log grid needs 0 < a0 < a1 and k >= 2, got ({a0}, {a1}, {k})"));
    }
    let (l0, l1) = (a0.ln(), a1.ln());
    let mut grid: Vec<f64> = (0..k).map(|i| (l0 + (l1 - l0) * i as f64 / (k - 1) as f64).exp()).collect();
    grid[0] = a0;
    grid[k - 1] = a1;
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Params;

    fn plain(f: &str) -> GradientPair {
        GradientPair::new("0", f, Params::new(), f).unwrap()
    }

    #[test]
    fn linear_crossing_radius() {
        let lap = Ellipticity::laplacian(3).unwrap();
        let opts = DirichletOptions::default();
        for a in [0.1, 1.0, 7.0] {
            let rho = crossing_radius(&SourceSpec::Autonomous, &plain("t"), &lap, OperatorSign::Plus, a, &opts)
                .unwrap()
                .unwrap();
            assert!((rho - std::f64::consts::PI).abs() < 1e-8, "a={a} rho={rho}");
        }
        let rho = crossing_radius(&SourceSpec::Autonomous, &plain("4*t"), &lap, OperatorSign::Plus, 1.0, &opts)
            .unwrap()
            .unwrap();
        assert!((rho - std::f64::consts::FRAC_PI_2).abs() < 1e-8);
    }

    #[test]
    fn subcritical_shot_stays_positive() {
        let lap = Ellipticity::laplacian(3).unwrap();
        let rho = crossing_radius(
            &SourceSpec::Autonomous,
            &plain("-t+t^3"),
            &lap,
            OperatorSign::Plus,
            0.5,
            &DirichletOptions { r_max: 200.0, ..Default::default() },
        )
        .unwrap();
        assert!(rho.is_none());
    }

    #[test]
    fn coarse_grid_rejected() {
        let lap = Ellipticity::laplacian(3).unwrap();
        let opts = DirichletOptions { grid_nodes: 50, ..Default::default() };
        let r = solve_ball(&SourceSpec::Autonomous, &plain("t^2"), &lap, OperatorSign::Plus, 1.0, (1.0, 100.0), &opts);
        assert!(matches!(r, Err(Error::InvalidInput(_))), "{r:?}");
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-2, 1e2, 5).unwrap();
        assert_eq!((g[0], g[4]), (1e-2, 1e2));
        assert!((g[2] - 1.0).abs() < 1e-14);
    }
}
