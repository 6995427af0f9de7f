use std::fs;

use pucci_lab::dirichlet::{log_grid, solve_ball, uniqueness_scan, DirichletOptions, SourceSpec};
use pucci_lab::expr::{builtin_pair, example_params, parse_expr, GradientPair};
use pucci_lab::pucci::{eigenvalues_sym, pucci_eval_any_dim, OperatorSign};
use pucci_lab::radial::{
    classify_decay, critical_constants, find_critical_p, first_eigenvalue_ball_with, integrate_shoot, CriticalOptions,
    DecayClass, DecayVariant, EigenOptions, LocatedExponent, ShootConfig, Source, DEFAULT_ATOL, DEFAULT_RTOL,
    DEFAULT_R_MAX,
};
use pucci_lab::transform::{classify_growth, GrowthOptions, TransformTable, DEFAULT_TOL, DEFAULT_T_MAX};
use pucci_lab::verify::{run_suite, Suite};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{parse_amplitudes, Command, RunConfig, TransformOp};
use crate::CliError;

const SOURCE_TOL: f64 = 1e-12;

/// A file to be written next to the record.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub results: Value,
    pub warnings: Vec<String>,
    pub artifacts: Vec<Artifact>,
    /// False when the command ran but its check failed (verify).
    pub success: bool,
}

impl Outcome {
    fn ok(results: Value) -> Self {
        Self { results, warnings: Vec::new(), artifacts: Vec::new(), success: true }
    }
}

fn to_value<T: Serialize>(x: &T) -> Result<Value, CliError> {
    serde_json::to_value(x).map_err(|e| CliError::Io(e.to_string()))
}

fn resolve_pair(cfg: &RunConfig, warnings: &mut Vec<String>) -> Result<GradientPair, CliError> {
    if let Some(name) = &cfg.pair {
        let params = match &cfg.params {
            Some(p) => p.clone(),
            None => {
                warnings.push(format!("no params given for pair '{name}'; using its example parameters"));
                example_params(name)?
            }
        };
        return Ok(builtin_pair(name, &params)?);
    }
    if let Some(path) = &cfg.pair_file {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        return Ok(GradientPair::from_json(&text)?);
    }
    match (&cfg.g, &cfg.f) {
        (Some(g), Some(f)) => Ok(GradientPair::new(g, f, cfg.params.clone().unwrap_or_default(), "inline")?),
        _ => Err(CliError::Usage("no pair given".into())),
    }
}

fn source_spec(cfg: &RunConfig) -> Result<SourceSpec, CliError> {
    match (cfg.gamma, &cfg.psi) {
        (Some(gamma), Some(psi)) => Ok(SourceSpec::Decomposed { gamma, psi: parse_expr(psi).map_err(pucci_lab::Error::from)? }),
        _ => Ok(SourceSpec::Autonomous),
    }
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Io(e.to_string()))
}

/// One flat row per `p` so sweeps export as a homogeneous table.
#[derive(Debug, Clone, Serialize)]
struct ClassifyRow {
    p: f64,
    kind: &'static str,
    c: Option<f64>,
    c1: Option<f64>,
    c2: Option<f64>,
    crossing_r: Option<f64>,
    alpha: f64,
    n_tilde: f64,
    r_max: f64,
    fitted_exponent: Option<f64>,
    fast_variation: Option<f64>,
    slow_variation: Option<f64>,
    persistence: Option<f64>,
    long_range_persistence: Option<f64>,
    message: Option<String>,
}

impl ClassifyRow {
    fn new(p: f64, class: &DecayClass) -> Self {
        let (kind, c, c1, c2, crossing_r) = match class.variant {
            DecayVariant::Crossing { r } => ("crossing", None, None, None, Some(r)),
            DecayVariant::FastDecay { c } => ("fast_decay", Some(c), None, None, None),
            DecayVariant::SlowDecay { c_star } => ("slow_decay", Some(c_star), None, None, None),
            DecayVariant::PseudoSlow { c1, c2 } => ("pseudo_slow", None, Some(c1), Some(c2), None),
            DecayVariant::Undetermined => ("undetermined", None, None, None, None),
        };
        let d = &class.diagnostics;
        Self {
            p,
            kind,
            c,
            c1,
            c2,
            crossing_r,
            alpha: class.alpha,
            n_tilde: class.n_tilde_used,
            r_max: class.r_max,
            fitted_exponent: d.fitted_exponent,
            fast_variation: d.fast_variation,
            slow_variation: d.slow_variation,
            persistence: d.persistence,
            long_range_persistence: d.long_range_persistence,
            message: d.message.clone(),
        }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let sign = cfg.sign();
    let mut warnings = Vec::new();
    let mut out = match cfg.command {
        Command::Eval => {
            let m = cfg.matrix.as_ref().ok_or_else(|| CliError::Usage("missing matrix".into()))?;
            let ell = cfg.ellipticity()?;
            let spec = eigenvalues_sym(m)?;
            let plus = pucci_eval_any_dim(m, &ell, OperatorSign::Plus)?;
            let minus = pucci_eval_any_dim(m, &ell, OperatorSign::Minus)?;
            let value = if sign == OperatorSign::Plus { plus } else { minus };
            Outcome::ok(json!({
                "dim": m.dim(),
                "eigenvalues": spec.eigenvalues,
                "ortho_residual": spec.ortho_residual,
                "sign": sign,
                "value": value,
                "M_plus": plus,
                "M_minus": minus,
            }))
        }
        Command::Transform => {
            let pair = resolve_pair(cfg, &mut warnings)?;
            let op = cfg.op.expect("validated");
            let at = cfg.at.expect("validated");
            let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
            let table = match op {
                TransformOp::G | TransformOp::Phi => TransformTable::build(&pair, at.max(DEFAULT_T_MAX), tol)?,
                TransformOp::PhiInv | TransformOp::H => TransformTable::covering(&pair, at, tol)?,
            };
            let value = match op {
                TransformOp::G => table.big_g(at)?,
                TransformOp::Phi => table.phi(at)?,
                TransformOp::PhiInv => table.phi_inv(at)?,
                TransformOp::H => table.h(at)?,
            };
            Outcome::ok(json!({
                "op": op,
                "at": at,
                "value": value,
                "tolerance": tol,
                "diagnostics": {
                    "pair": pair.label,
                    "t_max": table.t_max(),
                    "phi_max": table.phi_max(),
                    "overflow_at": table.overflow_at(),
                },
            }))
        }
        Command::Growth => {
            let pair = resolve_pair(cfg, &mut warnings)?;
            let opts = GrowthOptions { tol: cfg.tol.unwrap_or(DEFAULT_TOL), p: cfg.p, gamma: cfg.gamma, ..Default::default() };
            let report = classify_growth(&pair, cfg.mu1.expect("validated"), &opts)?;
            warnings.push(report.note.to_string());
            Outcome::ok(to_value(&report)?)
        }
        Command::Shoot => {
            let ell = cfg.ellipticity()?;
            let amplitude = cfg.amplitude.unwrap_or(1.0);
            let source = match cfg.p {
                Some(p) => Source::PurePower { p },
                None => Source::transformed(&resolve_pair(cfg, &mut warnings)?, amplitude, SOURCE_TOL)?,
            };
            let shoot = ShootConfig::new(source, ell, sign, amplitude)
                .with_r_max(cfg.r_max.unwrap_or(DEFAULT_R_MAX))
                .with_tolerances(cfg.atol.unwrap_or(DEFAULT_ATOL), cfg.rtol.unwrap_or(DEFAULT_RTOL));
            let tr = integrate_shoot(&shoot)?;
            if let pucci_lab::radial::Terminal::StepFailure { r, reason } = &tr.terminal {
                warnings.push(format!("integration stopped at r = {r}: {reason}"));
            }
            let mut o = Outcome::ok(json!({
                "config": tr.config,
                "terminal": tr.terminal,
                "crossing": tr.crossing(),
                "accepted_steps": tr.accepted_steps,
                "rejected_steps": tr.rejected_steps,
                "samples": tr.samples.len(),
            }));
            o.artifacts.push(Artifact { name: "trajectory.csv".into(), contents: tr.to_csv() });
            o
        }
        Command::Classify => {
            let ell = cfg.ellipticity()?;
            let consts = critical_constants(&ell);
            let grid: Vec<f64> = match (&cfg.p_grid, cfg.p) {
                (Some(g), _) => g.clone(),
                (None, Some(p)) => vec![p],
                _ => unreachable!("validated"),
            };
            let amplitude = cfg.amplitude.unwrap_or(1.0);
            let r_max = cfg.r_max.unwrap_or(DEFAULT_R_MAX);
            let (atol, rtol) = (cfg.atol.unwrap_or(DEFAULT_ATOL), cfg.rtol.unwrap_or(DEFAULT_RTOL));
            let run = |p: f64| -> Result<(ClassifyRow, Option<&'static str>), CliError> {
                let shoot = ShootConfig::new(Source::PurePower { p }, ell, sign, amplitude)
                    .with_r_max(r_max)
                    .with_tolerances(atol, rtol);
                let tr = integrate_shoot(&shoot)?;
                let class = classify_decay(&tr, p, &consts, None)?;
                Ok((ClassifyRow::new(p, &class), class.diagnostics.caveat))
            };
            let mut rows = pool(cfg.jobs)?.install(|| grid.par_iter().map(|&p| run(p)).collect::<Result<Vec<_>, _>>())?;
            rows.sort_by(|a, b| a.0.p.total_cmp(&b.0.p));
            for (row, caveat) in &rows {
                if let Some(c) = caveat {
                    warnings.push(format!("p = {}: {c}", row.p));
                }
            }
            let rows: Vec<ClassifyRow> = rows.into_iter().map(|r| r.0).collect();
            Outcome::ok(to_value(&rows)?)
        }
        Command::Critical => {
            let ell = cfg.ellipticity()?;
            let opts = critical_options(cfg);
            let search = find_critical_p(&ell, sign, cfg.bracket, cfg.tol_p.unwrap_or(1e-3), &opts)?;
            Outcome::ok(to_value(&search)?)
        }
        Command::Constants => {
            let ell = cfg.ellipticity()?;
            let mut consts = critical_constants(&ell);
            if let Some(s) = cfg.locate {
                let opts = critical_options(cfg);
                let found = find_critical_p(&ell, s, None, cfg.tol_p.unwrap_or(1e-3), &opts)?;
                consts.p_star_located =
                    Some(LocatedExponent { sign: s, p: found.p_star, lo: found.lo, hi: found.hi, r_max: found.r_max });
            }
            Outcome::ok(to_value(&consts)?)
        }
        Command::Eigen => {
            let ell = cfg.ellipticity()?;
            let radius = cfg.radius.expect("validated");
            let (mu1, bracket) = first_eigenvalue_ball_with(&ell, sign, radius, &EigenOptions::default())?;
            Outcome::ok(json!({ "mu1": mu1, "bracket": bracket, "R": radius, "sign": sign }))
        }
        Command::Ball => {
            let ell = cfg.ellipticity()?;
            let pair = resolve_pair(cfg, &mut warnings)?;
            let radius = cfg.radius.expect("validated");
            let bracket = cfg.bracket.unwrap_or((1e-2, 1e2));
            let sol = solve_ball(&source_spec(cfg)?, &pair, &ell, sign, radius, bracket, &DirichletOptions::default())?;
            if sol.original_detail.skipped_nodes > 0 {
                warnings.push(format!(
                    "{} grid nodes next to a kink of v'' are excluded from residual_original (see sup_all)",
                    sol.original_detail.skipped_nodes
                ));
            }
            let mut o = Outcome::ok(to_value(&sol)?);
            o.artifacts.push(Artifact { name: "profile.csv".into(), contents: sol.profile_csv() });
            o
        }
        Command::Scan => {
            let ell = cfg.ellipticity()?;
            let pair = resolve_pair(cfg, &mut warnings)?;
            let radius = cfg.radius.expect("validated");
            let (a0, a1, k) = parse_amplitudes(cfg.amplitudes.as_deref().expect("validated"))?;
            let grid = log_grid(a0, a1, k)?;
            let spec = source_spec(cfg)?;
            let report = pool(cfg.jobs)?
                .install(|| uniqueness_scan(&spec, &pair, &ell, sign, radius, &grid, &DirichletOptions::default()))?;
            if report.degenerate {
                warnings.push("rho(a) is constant in a: a continuum of solutions, not isolated ones".into());
            }
            let mut o = Outcome::ok(to_value(&report)?);
            for (i, sol) in report.solutions.iter().enumerate() {
                o.artifacts.push(Artifact { name: format!("profile_{i}.csv"), contents: sol.profile_csv() });
            }
            o
        }
        Command::Verify => {
            let suite: Suite = cfg.suite.as_deref().unwrap_or("all").parse()?;
            let report = run_suite(suite, cfg.seed.unwrap_or(0), cfg.trials.unwrap_or(1000))?;
            let mut o = Outcome::ok(to_value(&report)?);
            o.success = report.all_passed();
            o
        }
    };
    out.warnings.splice(0..0, warnings);
    Ok(out)
}

fn critical_options(cfg: &RunConfig) -> CriticalOptions {
    let d = CriticalOptions::default();
    CriticalOptions {
        r_max: cfg.r_max.unwrap_or(d.r_max),
        atol: cfg.atol.unwrap_or(d.atol),
        rtol: cfg.rtol.unwrap_or(d.rtol),
    }
}
