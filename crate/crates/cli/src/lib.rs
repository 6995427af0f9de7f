//! Command-line front end. Every subcommand is turned into a [`RunConfig`],
//! executed, and reported as a [`RunRecord`] on stdout.

pub mod config;
mod exec;
pub mod export;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pucci_lab::pucci::{OperatorSign, SymMatrix};
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

pub use config::{load_config, Command, RunConfig, TransformOp};
pub use exec::{execute, Artifact, Outcome};

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (record schema 1)");
pub const OUT_DIR_ENV: &str = "PUCCI_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or configuration; exit code 2.
    #[error("{0}")]
    Usage(String),
    /// The computation itself failed; exit code 1.
    #[error(transparent)]
    Domain(pucci_lab::Error),
    #[error("{0}")]
    Io(String),
}

impl From<pucci_lab::Error> for CliError {
    fn from(e: pucci_lab::Error) -> Self {
        match e {
            pucci_lab::Error::InvalidInput(_) | pucci_lab::Error::Parse(_) | pucci_lab::Error::Json(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Domain(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::Io(_) => 1,
        }
    }
}

/// What gets printed and saved for one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub config: RunConfig,
    pub results: Value,
    pub version: String,
    pub duration_s: f64,
    pub warnings: Vec<String>,
}

#[derive(Parser, Debug)]
#[command(name = "pucci", version = VERSION, about = "Pucci extremal operators with a quadratic gradient term")]
struct Cli {
    /// Directory for the JSON record and CSV artifacts (default: $PUCCI_OUT_DIR).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
}

impl From<SignArg> for OperatorSign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Plus => OperatorSign::Plus,
            SignArg::Minus => OperatorSign::Minus,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OpArg {
    #[value(name = "G")]
    G,
    Phi,
    Phiinv,
    H,
}

#[derive(Args, Debug, Default)]
struct EllArgs {
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long = "Lambda")]
    big_lambda: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Debug, Default)]
struct PairArgs {
    /// Builtin pair name.
    #[arg(long)]
    pair: Option<String>,
    /// Parameter `key=value`; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_kv)]
    params: Vec<(String, f64)>,
    /// Inline g(t).
    #[arg(long)]
    g: Option<String>,
    /// Inline f(t).
    #[arg(long)]
    f: Option<String>,
    /// JSON file with `g`, `f`, `params`.
    #[arg(long)]
    pair_file: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct ShotArgs {
    #[arg(long = "rmax")]
    r_max: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long)]
    rtol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate both Pucci operators on a symmetric matrix.
    Eval {
        /// Inline JSON or a path to a JSON file.
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long = "Lambda")]
        big_lambda: Option<f64>,
        #[arg(long, value_enum)]
        sign: Option<SignArg>,
    },
    /// G, phi, phi^-1 or h at one point.
    Transform {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum)]
        op: OpArg,
        #[arg(long)]
        at: f64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Heuristic sub/superlinear classification of h.
    Growth {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        mu1: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// One radial shot.
    Shoot {
        #[command(flatten)]
        ell: EllArgs,
        #[arg(long, value_enum)]
        sign: Option<SignArg>,
        /// Pure power source v^p.
        #[arg(long)]
        p: Option<f64>,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        amplitude: Option<f64>,
        #[command(flatten)]
        shot: ShotArgs,
    },
    /// Decay classification of pure-power shots.
    Classify {
        #[command(flatten)]
        ell: EllArgs,
        #[arg(long, value_enum)]
        sign: Option<SignArg>,
        #[arg(long)]
        p: Option<f64>,
        /// Comma-separated exponents.
        #[arg(long, value_delimiter = ',')]
        p_grid: Option<Vec<f64>>,
        #[arg(long)]
        amplitude: Option<f64>,
        #[command(flatten)]
        shot: ShotArgs,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Locate the critical exponent by bisection.
    Critical {
        #[command(flatten)]
        ell: EllArgs,
        #[arg(long, value_enum)]
        sign: Option<SignArg>,
        /// `lo,hi`.
        #[arg(long, value_parser = parse_pair_f64)]
        bracket: Option<(f64, f64)>,
        #[arg(long = "tolp")]
        tol_p: Option<f64>,
        #[command(flatten)]
        shot: ShotArgs,
    },
    /// Dimension-like numbers and reference exponents.
    Constants {
        #[command(flatten)]
        ell: EllArgs,
        /// Also locate the critical exponent for this sign.
        #[arg(long, value_enum)]
        locate: Option<SignArg>,
        #[arg(long = "tolp")]
        tol_p: Option<f64>,
        #[arg(long = "rmax")]
        r_max: Option<f64>,
    },
    /// First eigenvalue on a ball.
    Eigen {
        #[command(flatten)]
        ell: EllArgs,
        #[arg(long, value_enum)]
        sign: Option<SignArg>,
        #[arg(long = "R")]
        radius: Option<f64>,
    },
    /// Dirichlet problem on a ball.
    Ball {
        #[command(flatten)]
        ell: EllArgs,
        #[arg(long, value_enum)]
        sign: Option<SignArg>,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long = "R")]
        radius: Option<f64>,
        /// Amplitude bracket `a0,a1`.
        #[arg(long, value_parser = parse_pair_f64)]
        bracket: Option<(f64, f64)>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        psi: Option<String>,
    },
    /// Count solutions of the ball problem over an amplitude grid.
    Scan {
        #[command(flatten)]
        ell: EllArgs,
        #[arg(long, value_enum)]
        sign: Option<SignArg>,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long = "R")]
        radius: Option<f64>,
        /// `a0:a1:k`.
        #[arg(long)]
        amplitudes: Option<String>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        psi: Option<String>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Seeded property checks.
    Verify {
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Execute a JSON run configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_kv(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("'{v}' is not a number"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_pair_f64(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected lo,hi, got '{s}'"))?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("'{x}' is not a number"));
    Ok((num(a)?, num(b)?))
}

fn set_ell(cfg: &mut RunConfig, ell: EllArgs) {
    cfg.lambda = ell.lambda;
    cfg.big_lambda = ell.big_lambda;
    cfg.n = ell.n;
}

fn set_pair(cfg: &mut RunConfig, pair: PairArgs) {
    cfg.pair = pair.pair;
    cfg.g = pair.g;
    cfg.f = pair.f;
    cfg.pair_file = pair.pair_file;
    if !pair.params.is_empty() {
        cfg.params = Some(pair.params.into_iter().collect::<BTreeMap<_, _>>());
    }
}

fn set_shot(cfg: &mut RunConfig, shot: ShotArgs) {
    cfg.r_max = shot.r_max;
    cfg.atol = shot.atol;
    cfg.rtol = shot.rtol;
}

fn read_matrix(arg: &str) -> Result<SymMatrix, CliError> {
    let text = if arg.trim_start().starts_with(['{', '[']) {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::Io(format!("{arg}: {e}")))?
    };
    Ok(SymMatrix::from_json(&text)?)
}

fn to_config(cmd: Cmd) -> Result<RunConfig, CliError> {
    let cfg = match cmd {
        Cmd::Eval { matrix, lambda, big_lambda, sign } => {
            let mut c = RunConfig::new(Command::Eval);
            c.matrix = Some(read_matrix(&matrix)?);
            c.lambda = lambda;
            c.big_lambda = big_lambda;
            c.sign = sign.map(Into::into);
            c
        }
        Cmd::Transform { pair, op, at, tol } => {
            let mut c = RunConfig::new(Command::Transform);
            set_pair(&mut c, pair);
            c.op = Some(match op {
                OpArg::G => TransformOp::G,
                OpArg::Phi => TransformOp::Phi,
                OpArg::Phiinv => TransformOp::PhiInv,
                OpArg::H => TransformOp::H,
            });
            c.at = Some(at);
            c.tol = tol;
            c
        }
        Cmd::Growth { pair, mu1, p, gamma, tol } => {
            let mut c = RunConfig::new(Command::Growth);
            set_pair(&mut c, pair);
            c.mu1 = mu1;
            c.p = p;
            c.gamma = gamma;
            c.tol = tol;
            c
        }
        Cmd::Shoot { ell, sign, p, pair, amplitude, shot } => {
            let mut c = RunConfig::new(Command::Shoot);
            set_ell(&mut c, ell);
            set_pair(&mut c, pair);
            set_shot(&mut c, shot);
            c.sign = sign.map(Into::into);
            c.p = p;
            c.amplitude = amplitude;
            c
        }
        Cmd::Classify { ell, sign, p, p_grid, amplitude, shot, jobs } => {
            let mut c = RunConfig::new(Command::Classify);
            set_ell(&mut c, ell);
            set_shot(&mut c, shot);
            c.sign = sign.map(Into::into);
            c.p = p;
            c.p_grid = p_grid;
            c.amplitude = amplitude;
            c.jobs = jobs;
            c
        }
        Cmd::Critical { ell, sign, bracket, tol_p, shot } => {
            let mut c = RunConfig::new(Command::Critical);
            set_ell(&mut c, ell);
            set_shot(&mut c, shot);
            c.sign = sign.map(Into::into);
            c.bracket = bracket;
            c.tol_p = tol_p;
            c
        }
        Cmd::Constants { ell, locate, tol_p, r_max } => {
            let mut c = RunConfig::new(Command::Constants);
            set_ell(&mut c, ell);
            c.locate = locate.map(Into::into);
            c.tol_p = tol_p;
            c.r_max = r_max;
            c
        }
        Cmd::Eigen { ell, sign, radius } => {
            let mut c = RunConfig::new(Command::Eigen);
            set_ell(&mut c, ell);
            c.sign = sign.map(Into::into);
            c.radius = radius;
            c
        }
        Cmd::Ball { ell, sign, pair, radius, bracket, gamma, psi } => {
            let mut c = RunConfig::new(Command::Ball);
            set_ell(&mut c, ell);
            set_pair(&mut c, pair);
            c.sign = sign.map(Into::into);
            c.radius = radius;
            c.bracket = bracket;
            c.gamma = gamma;
            c.psi = psi;
            c
        }
        Cmd::Scan { ell, sign, pair, radius, amplitudes, gamma, psi, jobs } => {
            let mut c = RunConfig::new(Command::Scan);
            set_ell(&mut c, ell);
            set_pair(&mut c, pair);
            c.sign = sign.map(Into::into);
            c.radius = radius;
            c.amplitudes = amplitudes;
            c.gamma = gamma;
            c.psi = psi;
            c.jobs = jobs;
            c
        }
        Cmd::Verify { suite, seed, trials } => {
            let mut c = RunConfig::new(Command::Verify);
            c.suite = suite;
            c.seed = seed;
            c.trials = trials;
            c
        }
        Cmd::Run { config } => load_config(&config)?,
    };
    Ok(cfg)
}

/// Runs `cfg` and wraps the outcome in a record.
pub fn run_config(cfg: &RunConfig) -> Result<(RunRecord, Outcome), CliError> {
    let start = Instant::now();
    let outcome = execute(cfg)?;
    let record = RunRecord {
        config: cfg.clone(),
        results: outcome.results.clone(),
        version: VERSION.to_string(),
        duration_s: start.elapsed().as_secs_f64(),
        warnings: outcome.warnings.clone(),
    };
    Ok((record, outcome))
}

fn write_outputs(dir: &Path, record: &RunRecord, outcome: &Outcome) -> Result<(), CliError> {
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let name = record.config.command.name();
    let path = dir.join(format!("{name}.json"));
    let mut text = serde_json::to_string_pretty(record).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| io(&path, e))?;
    if record.config.command == Command::Classify {
        export::export_table(std::slice::from_ref(record), &dir.join("classify.csv"), export::TableFormat::Csv)?;
    }
    for a in &outcome.artifacts {
        let path = dir.join(&a.name);
        fs::write(&path, &a.contents).map_err(|e| io(&path, e))?;
    }
    Ok(())
}

fn run_inner(argv: Vec<OsString>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                2
            } else {
                let _ = write!(stdout, "{}", e.render());
                0
            };
            return Ok(code);
        }
    };
    let cfg = to_config(cli.cmd)?;
    let (record, outcome) = run_config(&cfg)?;
    let text = serde_json::to_string_pretty(&record).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(stdout, "{text}").map_err(|e| CliError::Io(e.to_string()))?;
    for w in &record.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let dir = cli.out.or_else(|| cfg.out_dir.clone()).or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));
    if let Some(dir) = dir {
        write_outputs(&dir, &record, &outcome)?;
    }
    if !outcome.success {
        let _ = writeln!(stderr, "error: {} reported failures", cfg.command.name());
        return Ok(1);
    }
    Ok(0)
}

/// Parses `argv` (including the program name), runs, and returns the exit
/// code: 0 on success, 2 for usage errors, 1 for failures.
pub fn run_command_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    match run_inner(argv, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    run_command_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
