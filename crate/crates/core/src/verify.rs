//! Seeded property suites over random matrices and registry pairs.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{builtin_pair, example_params, REGISTRY};
use crate::pucci::{eigen_decompose, outer, pucci_eval_any_dim, Ellipticity, OperatorSign, SymMatrix};
use crate::transform::TransformTable;

pub const SLACK: f64 = 1e-10;
pub const ROUNDTRIP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Operator,
    Lemma21,
    Transform,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "operator" => Ok(Suite::Operator),
            "lemma21" => Ok(Suite::Lemma21),
            "transform" => Ok(Suite::Transform),
            "all" => Ok(Suite::All),
            _ => Err(Error::InvalidInput(format!(
                "unknown suite '{s}', expected operator, lemma21, transform or all"
            ))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Operator => "operator",
            Suite::Lemma21 => "lemma21",
            Suite::Transform => "transform",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

/// Outcome of one property over all trials. `worst` is the largest
/// violation seen, scaled by `max(1, |terms|)`; negative means slack.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub trials: usize,
    pub passed: usize,
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub passed: usize,
    pub total: usize,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }
}

struct Tally {
    checks: Vec<CheckResult>,
}

impl Tally {
    fn new() -> Self {
        Self { checks: Vec::new() }
    }

    fn entry(&mut self, name: &str) -> &mut CheckResult {
        if let Some(i) = self.checks.iter().position(|c| c.name == name) {
            return &mut self.checks[i];
        }
        self.checks.push(CheckResult { name: name.to_string(), trials: 0, passed: 0, worst: f64::NEG_INFINITY });
        self.checks.last_mut().expect("just pushed")
    }

    /// Records `a ≤ b` up to the slack.
    fn le(&mut self, name: &str, a: f64, b: f64, tol: f64) {
        let scale = 1f64.max(a.abs()).max(b.abs());
        let violation = (a - b) / scale;
        let c = self.entry(name);
        c.trials += 1;
        if violation <= tol {
            c.passed += 1;
        }
        c.worst = c.worst.max(violation);
    }

    fn eq(&mut self, name: &str, a: f64, b: f64, tol: f64) {
        let scale = 1f64.max(a.abs()).max(b.abs());
        let err = (a - b).abs() / scale;
        let c = self.entry(name);
        c.trials += 1;
        if err <= tol {
            c.passed += 1;
        }
        c.worst = c.worst.max(err);
    }

    fn fail(&mut self, name: &str) {
        let c = self.entry(name);
        c.trials += 1;
        c.worst = f64::INFINITY;
    }
}

fn random_sym(rng: &mut ChaCha8Rng, dim: usize) -> SymMatrix {
    let mut m = SymMatrix::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            m.set(i, j, rng.gen_range(-1.0..1.0));
        }
    }
    m
}

fn random_ell(rng: &mut ChaCha8Rng, dim: usize) -> Ellipticity {
    let lambda = rng.gen_range(0.1..2.0);
    let big = lambda * rng.gen_range(1.0..5.0);
    Ellipticity::new(lambda, big, dim.max(2)).expect("valid by construction")
}

fn m(mat: &SymMatrix, ell: &Ellipticity, sign: OperatorSign) -> Result<f64> {
    pucci_eval_any_dim(mat, ell, sign)
}

fn operator_suite(rng: &mut ChaCha8Rng, trials: usize, t: &mut Tally) -> Result<()> {
    use OperatorSign::{Minus, Plus};
    for _ in 0..trials {
        let dim = rng.gen_range(1..=6);
        let ell = random_ell(rng, dim);
        let a = random_sym(rng, dim);
        let b = random_sym(rng, dim);
        let ab = a.add(&b)?;
        let alpha = rng.gen_range(0.0..10.0);

        for sign in [Plus, Minus] {
            t.eq("homogeneity", m(&a.scale(alpha), &ell, sign)?, alpha * m(&a, &ell, sign)?, SLACK);
        }
        let (pa, ma) = (m(&a, &ell, Plus)?, m(&a, &ell, Minus)?);
        let (pb, mb) = (m(&b, &ell, Plus)?, m(&b, &ell, Minus)?);
        let (pab, mab) = (m(&ab, &ell, Plus)?, m(&ab, &ell, Minus)?);
        t.le("plus_superadditive", pa + mb, pab, SLACK);
        t.le("plus_subadditive", pab, pa + pb, SLACK);
        t.le("minus_superadditive", ma + mb, mab, SLACK);
        t.le("minus_subadditive", mab, pa + mb, SLACK);
        t.eq("duality", ma, -m(&a.scale(-1.0), &ell, Plus)?, SLACK);
        t.le("ordering", ma, pa, SLACK);

        let lap = Ellipticity::new(ell.lambda(), ell.lambda(), dim.max(2))?;
        t.eq("trace_plus", m(&a, &lap, Plus)?, ell.lambda() * a.trace(), SLACK);
        t.eq("trace_minus", m(&a, &lap, Minus)?, ell.lambda() * a.trace(), SLACK);

        // A random orthogonal matrix from the eigenvectors of another sample.
        let q = eigen_decompose(&random_sym(rng, dim))?.vectors;
        let rotated = a.congruence(&q)?;
        for sign in [Plus, Minus] {
            t.eq("rotation", m(&rotated, &ell, sign)?, m(&a, &ell, sign)?, SLACK);
        }
    }
    Ok(())
}

/// With `v = φ(u)`, `φ(t) = e^{ct} − 1`: `D²v = φ′D²u + φ″∇u⊗∇u` and
/// `φ″/φ′ = c`.
fn lemma21_suite(rng: &mut ChaCha8Rng, trials: usize, t: &mut Tally) -> Result<()> {
    use OperatorSign::{Minus, Plus};
    for _ in 0..trials {
        let dim = rng.gen_range(1..=6);
        let ell = random_ell(rng, dim);
        let hess = random_sym(rng, dim);
        let xi: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c = rng.gen_range(0.01..2.0);
        let u: f64 = rng.gen_range(0.0..2.0);
        let d1 = c * (c * u).exp();
        let d2 = c * c * (c * u).exp();
        let xx = outer(&xi);
        let d2v = hess.scale(d1).add(&xx.scale(d2))?;
        let shifted = hess.add(&xx.scale(c))?;

        for sign in [Plus, Minus] {
            let lhs = m(&d2v, &ell, sign)? / d1;
            let rhs = m(&shifted, &ell, sign)?;
            t.eq("identity", lhs, rhs, SLACK);
            let base = m(&hess, &ell, sign)?;
            let lo = base + c * m(&xx, &ell, Minus)?;
            let hi = base + c * m(&xx, &ell, Plus)?;
            let name = match sign {
                Plus => "sandwich_plus",
                Minus => "sandwich_minus",
            };
            t.le(name, lo, lhs, SLACK);
            t.le(name, lhs, hi, SLACK);
        }
    }
    Ok(())
}

/// `φ⁻¹(φ(t)) = t` on random `t ∈ [0, 10]` for every registry pair at its
/// example parameters (points past the overflow guard are skipped).
fn transform_suite(rng: &mut ChaCha8Rng, trials: usize, t: &mut Tally) -> Result<()> {
    let per_pair = trials.div_ceil(REGISTRY.len()).max(1);
    for name in REGISTRY {
        let pair = builtin_pair(name, &example_params(name)?)?;
        let table = match TransformTable::build(&pair, 10.0, 1e-12) {
            Ok(table) => table,
            Err(_) => TransformTable::covering_truncated(&pair, f64::MAX, 1e-12)?,
        };
        let check = format!("roundtrip_{name}");
        for _ in 0..per_pair {
            let x = rng.gen_range(0.0..10.0);
            if x > table.t_max() {
                continue;
            }
            match table.phi(x).and_then(|v| table.phi_inv(v)) {
                Ok(back) => {
                    let c = t.entry(&check);
                    c.trials += 1;
                    let err = (back - x).abs();
                    if err <= ROUNDTRIP_TOL {
                        c.passed += 1;
                    }
                    c.worst = c.worst.max(err);
                }
                Err(_) => t.fail(&check),
            }
        }
    }
    Ok(())
}

/// Runs `suite` with `trials` random cases per property group.
pub fn run_suite(suite: Suite, seed: u64, trials: usize) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    if matches!(suite, Suite::Operator | Suite::All) {
        operator_suite(&mut rng, trials, &mut tally)?;
    }
    if matches!(suite, Suite::Lemma21 | Suite::All) {
        lemma21_suite(&mut rng, trials, &mut tally)?;
    }
    if matches!(suite, Suite::Transform | Suite::All) {
        transform_suite(&mut rng, trials, &mut tally)?;
    }
    let total = tally.checks.iter().map(|c| c.trials).sum();
    let passed = tally.checks.iter().map(|c| c.passed).sum();
    Ok(SuiteReport { suite, seed, checks: tally.checks, passed, total })
}
