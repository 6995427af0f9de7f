use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use pucci_lab::pucci::{Ellipticity, OperatorSign, SymMatrix};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Eval,
    Transform,
    Growth,
    Shoot,
    Classify,
    Critical,
    Constants,
    Eigen,
    Ball,
    Scan,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Transform => "transform",
            Command::Growth => "growth",
            Command::Shoot => "shoot",
            Command::Classify => "classify",
            Command::Critical => "critical",
            Command::Constants => "constants",
            Command::Eigen => "eigen",
            Command::Ball => "ball",
            Command::Scan => "scan",
            Command::Verify => "verify",
        }
    }

    /// Keys a config for this command may set besides `command` and `out_dir`.
    fn allowed(self) -> &'static [&'static str] {
        match self {
            Command::Eval => &["lambda", "Lambda", "matrix", "sign"],
            Command::Transform => &["pair", "params", "g", "f", "pair_file", "op", "at", "tol"],
            Command::Growth => &["pair", "params", "g", "f", "pair_file", "mu1", "p", "gamma", "tol"],
            Command::Shoot => &[
                "lambda", "Lambda", "n", "sign", "p", "pair", "params", "g", "f", "pair_file", "amplitude", "r_max",
                "atol", "rtol",
            ],
            Command::Classify => {
                &["lambda", "Lambda", "n", "sign", "p", "p_grid", "amplitude", "r_max", "atol", "rtol", "jobs"]
            }
            Command::Critical => &["lambda", "Lambda", "n", "sign", "bracket", "tol_p", "r_max", "atol", "rtol"],
            Command::Constants => &["lambda", "Lambda", "n", "locate", "tol_p", "r_max"],
            Command::Eigen => &["lambda", "Lambda", "n", "sign", "R"],
            Command::Ball => &[
                "lambda", "Lambda", "n", "sign", "pair", "params", "g", "f", "pair_file", "R", "bracket", "gamma", "psi",
            ],
            Command::Scan => &[
                "lambda", "Lambda", "n", "sign", "pair", "params", "g", "f", "pair_file", "R", "amplitudes", "gamma",
                "psi", "jobs",
            ],
            Command::Verify => &["suite", "seed", "trials"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformOp {
    G,
    #[serde(rename = "phi")]
    Phi,
    #[serde(rename = "phiinv")]
    PhiInv,
    #[serde(rename = "h")]
    H,
}

/// A complete, validated description of one invocation. Every subcommand is
/// first turned into one of these, so the CLI and `run --config` share a
/// single code path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, rename = "Lambda", skip_serializing_if = "Option::is_none")]
    pub big_lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<OperatorSign>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<SymMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op: Option<TransformOp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locate: Option<OperatorSign>,
    #[serde(default, rename = "R", skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// `a0:a1:k`, a logarithmic grid of `k` amplitudes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

fn positive(name: &str, v: Option<f64>) -> Result<(), CliError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => usage(format!("{name} must be positive and finite, got {x}")),
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            lambda: None,
            big_lambda: None,
            n: None,
            sign: None,
            pair: None,
            params: None,
            g: None,
            f: None,
            pair_file: None,
            matrix: None,
            op: None,
            at: None,
            tol: None,
            mu1: None,
            p: None,
            p_grid: None,
            gamma: None,
            psi: None,
            amplitude: None,
            r_max: None,
            atol: None,
            rtol: None,
            bracket: None,
            tol_p: None,
            locate: None,
            radius: None,
            amplitudes: None,
            jobs: None,
            suite: None,
            seed: None,
            trials: None,
            out_dir: None,
        }
    }

    fn set_keys(&self) -> BTreeSet<String> {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(map)) => map.keys().cloned().collect(),
            _ => BTreeSet::new(),
        }
    }

    fn require<T: Copy>(&self, name: &str, v: Option<T>) -> Result<T, CliError> {
        v.ok_or_else(|| CliError::Usage(format!("missing field '{name}' for command '{}'", self.command.name())))
    }

    pub fn ellipticity(&self) -> Result<Ellipticity, CliError> {
        let lambda = self.require("lambda", self.lambda)?;
        let big = self.require("Lambda", self.big_lambda)?;
        let n = match self.command {
            Command::Eval => self.matrix.as_ref().map_or(2, |m| m.dim().max(2)),
            _ => self.require("n", self.n)?,
        };
        Ellipticity::new(lambda, big, n).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn sign(&self) -> OperatorSign {
        self.sign.unwrap_or(OperatorSign::Plus)
    }

    pub fn has_pair(&self) -> bool {
        self.pair.is_some() || self.g.is_some() || self.f.is_some() || self.pair_file.is_some()
    }

    /// Strict checks: no keys foreign to the command, required keys present,
    /// numbers in range, exactly one pair source.
    pub fn validate(&self) -> Result<(), CliError> {
        let allowed = self.command.allowed();
        for key in self.set_keys() {
            if key != "command" && key != "out_dir" && !allowed.contains(&key.as_str()) {
                return usage(format!("field '{key}' is not used by command '{}'", self.command.name()));
            }
        }

        let inline = self.g.is_some() || self.f.is_some();
        let sources = [self.pair.is_some(), inline, self.pair_file.is_some()].iter().filter(|b| **b).count();
        if sources > 1 {
            return usage("pair sources are exclusive: give one of 'pair', inline 'g'/'f', or 'pair_file'");
        }
        if inline && (self.g.is_none() || self.f.is_none()) {
            return usage("inline pairs need both 'g' and 'f'");
        }
        if self.params.is_some() && self.pair.is_none() && !inline {
            return usage("'params' needs 'pair' or inline 'g'/'f'");
        }

        for (name, v) in [
            ("lambda", self.lambda),
            ("Lambda", self.big_lambda),
            ("amplitude", self.amplitude),
            ("r_max", self.r_max),
            ("atol", self.atol),
            ("rtol", self.rtol),
            ("tol", self.tol),
            ("tol_p", self.tol_p),
            ("mu1", self.mu1),
            ("R", self.radius),
        ] {
            positive(name, v)?;
        }
        if let Some(g) = self.gamma {
            if !(g >= 0.0 && g.is_finite()) {
                return usage(format!("gamma must be nonnegative, got {g}"));
            }
        }
        if let Some(n) = self.n {
            if !(2..=pucci_lab::pucci::MAX_DIM).contains(&n) {
                return usage(format!("n must lie in [2, {}], got {n}", pucci_lab::pucci::MAX_DIM));
            }
        }
        if let Some(j) = self.jobs {
            if j == 0 {
                return usage("jobs must be at least 1");
            }
        }
        if let Some(t) = self.trials {
            if t == 0 {
                return usage("trials must be at least 1");
            }
        }
        if matches!(self.command, Command::Shoot | Command::Classify | Command::Growth) {
            for p in self.p.iter().chain(self.p_grid.iter().flatten()) {
                if !(*p > 1.0 && p.is_finite()) {
                    return usage(format!("p must exceed 1, got {p}"));
                }
            }
        }
        if let Some((lo, hi)) = self.bracket {
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                return usage(format!("bracket must satisfy 0 < lo < hi, got ({lo}, {hi})"));
            }
        }
        if self.psi.is_some() != self.gamma.is_some() && matches!(self.command, Command::Ball | Command::Scan) {
            return usage("a decomposed source needs both 'gamma' and 'psi'");
        }

        match self.command {
            Command::Eval => {
                self.require("matrix", self.matrix.as_ref().map(|_| ()))?;
                self.ellipticity()?;
            }
            Command::Transform => {
                self.require("op", self.op)?;
                self.require("at", self.at)?;
                self.require_pair()?;
            }
            Command::Growth => {
                self.require("mu1", self.mu1)?;
                self.require_pair()?;
            }
            Command::Shoot => {
                self.ellipticity()?;
                if self.p.is_some() == self.has_pair() {
                    return usage("shoot needs exactly one of 'p' (pure power) or a pair");
                }
            }
            Command::Classify => {
                self.ellipticity()?;
                if self.p.is_some() == self.p_grid.is_some() {
                    return usage("classify needs exactly one of 'p' or 'p_grid'");
                }
                if self.p_grid.as_ref().is_some_and(|g| g.is_empty()) {
                    return usage("p_grid must not be empty");
                }
            }
            Command::Critical | Command::Constants => {
                self.ellipticity()?;
            }
            Command::Eigen => {
                self.ellipticity()?;
                self.require("R", self.radius)?;
            }
            Command::Ball => {
                self.ellipticity()?;
                self.require("R", self.radius)?;
                self.require_pair()?;
            }
            Command::Scan => {
                self.ellipticity()?;
                self.require("R", self.radius)?;
                self.require_pair()?;
                let spec = self.amplitudes.as_deref().ok_or_else(|| CliError::Usage("missing field 'amplitudes' for command 'scan'".into()))?;
                parse_amplitudes(spec)?;
            }
            Command::Verify => {
                let suite = self.suite.as_deref().unwrap_or("all");
                suite.parse::<pucci_lab::verify::Suite>().map_err(|e| CliError::Usage(e.to_string()))?;
            }
        }
        Ok(())
    }

    fn require_pair(&self) -> Result<(), CliError> {
        if self.has_pair() {
            Ok(())
        } else {
            usage(format!("command '{}' needs a pair ('pair', inline 'g'/'f', or 'pair_file')", self.command.name()))
        }
    }
}

/// Parses `a0:a1:k`.
pub fn parse_amplitudes(spec: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Usage(format!("amplitudes must look like a0:a1:k, got '{spec}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a0: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let a1: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let k: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(a0 > 0.0 && a1 > a0 && k >= 2) {
        return usage(format!("amplitudes need 0 < a0 < a1 and k >= 2, got '{spec}'"));
    }
    Ok((a0, a1, k))
}

/// Reads and validates a JSON config. Unknown keys are rejected.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| {
        CliError::Usage(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}
