use serde::{Deserialize, Serialize};

use super::{parse_expr, EvalError, Expr, Params};
use crate::error::{invalid, Error, Result};

/// The pair `(f, g)` of `M±(D²u + g(u)∇u⊗∇u) + f(u) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientPair {
    pub g: Expr,
    pub f: Expr,
    pub params: Params,
    pub label: String,
}

/// JSON form: `{"g": "...", "f": "...", "params": {...}, "label": "..."}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub g: String,
    pub f: String,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub label: String,
}

impl GradientPair {
    /// Parses both expressions, checks every parameter is bound and that
    /// `g ≥ 0` on the sampling grid.
    pub fn new(g: &str, f: &str, params: Params, label: impl Into<String>) -> Result<Self> {
        let pair = Self { g: parse_expr(g)?, f: parse_expr(f)?, params, label: label.into() };
        pair.validate()?;
        Ok(pair)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: PairSpec = serde_json::from_str(text)?;
        Self::new(&spec.g, &spec.f, spec.params, spec.label)
    }

    pub fn to_spec(&self) -> PairSpec {
        PairSpec {
            g: self.g.to_string(),
            f: self.f.to_string(),
            params: self.params.clone(),
            label: self.label.clone(),
        }
    }

    /// Rebinds parameters without re-parsing.
    pub fn with_params(&self, params: Params) -> Result<Self> {
        let pair = Self { params, ..self.clone() };
        pair.validate()?;
        Ok(pair)
    }

    pub fn g_at(&self, t: f64) -> std::result::Result<f64, EvalError> {
        self.g.eval(t, &self.params)
    }

    pub fn f_at(&self, t: f64) -> std::result::Result<f64, EvalError> {
        self.f.eval(t, &self.params)
    }

    /// True when `g` is the literal constant zero.
    pub fn g_is_zero(&self) -> bool {
        matches!(self.g, Expr::Num(x) if x == 0.0)
    }

    fn validate(&self) -> Result<()> {
        for name in self.g.params().into_iter().chain(self.f.params()) {
            if !self.params.contains_key(&name) {
                return Err(EvalError::UnboundParameter(name).into());
            }
        }
        let upto = self.check_g_nonnegative()?;
        if upto < 1.0 {
            return invalid(format!("g overflows already at t = {upto:e}"));
        }
        Ok(())
    }

    /// Samples `g` on a log grid over `[1e-8, 1e8]` (10 points per decade)
    /// and returns the largest `t` checked before `g` stopped being
    /// representable.
    pub fn check_g_nonnegative(&self) -> Result<f64> {
        let mut last = 0.0;
        for k in 0..=160 {
            let t = 10f64.powf(-8.0 + k as f64 / 10.0);
            match self.g_at(t) {
                Ok(v) if v < 0.0 => {
                    return invalid(format!("g must be nonnegative, g({t:e}) = {v:e}"));
                }
                Ok(_) => last = t,
                Err(EvalError::NonFinite { .. }) => break,
                Err(e) => return Err(e.into()),
            }
        }
        Ok(last)
    }
}

struct Entry {
    name: &'static str,
    label: &'static str,
    g: &'static str,
    f: &'static str,
    /// Parameter name with its admissible range check and a typical value.
    params: &'static [(&'static str, Range, f64)],
}

#[derive(Clone, Copy)]
enum Range {
    Positive,
    NonNegative,
    AboveOne,
}

impl Range {
    fn check(self, name: &str, v: f64) -> Result<()> {
        let ok = v.is_finite()
            && match self {
                Range::Positive => v > 0.0,
                Range::NonNegative => v >= 0.0,
                Range::AboveOne => v > 1.0,
            };
        if ok {
            Ok(())
        } else {
            let what = match self {
                Range::Positive => "> 0",
                Range::NonNegative => ">= 0",
                Range::AboveOne => "> 1",
            };
            invalid(format!("parameter {name} must be {what}, got {v}"))
        }
    }
}

const ENTRIES: &[Entry] = &[
    Entry {
        name: "power-m",
        label: "g = m t^(m-1), f = t^p exp(-t^m)",
        g: "m*t^(m-1)",
        f: "t^p*exp(-(t^m))",
        params: &[("m", Range::Positive, 1.0), ("p", Range::Positive, 0.5)],
    },
    Entry {
        name: "exp-one",
        label: "g = 1, f = a (e^t - 1)^p e^-t",
        g: "1",
        f: "a*(exp(t)-1)^p*exp(-t)",
        params: &[("a", Range::Positive, 1.0), ("p", Range::Positive, 2.0)],
    },
    Entry {
        name: "mu-over-1+t",
        label: "g = mu/(1+t), f = a/(mu+1)^p [(1+t)^(mu+1) - 1]^p (1+t)^-mu",
        g: "mu/(1+t)",
        f: "a/(mu+1)^p*((1+t)^(mu+1)-1)^p*(1+t)^(-mu)",
        params: &[
            ("a", Range::Positive, 1.0),
            ("mu", Range::Positive, 1.0),
            ("p", Range::Positive, 2.0),
        ],
    },
    Entry {
        name: "sinh-cosh",
        label: "g = sinh t/(cosh t + 1), f = a/(1+cosh t) [(sinh t + t)^p - gamma (sinh t + t)]",
        g: "sinh(t)/(cosh(t)+1)",
        f: "a/(1+cosh(t))*((sinh(t)+t)^p-gamma*(sinh(t)+t))",
        params: &[
            ("a", Range::Positive, 1.0),
            ("gamma", Range::NonNegative, 0.0),
            ("p", Range::Positive, 2.0),
        ],
    },
    Entry {
        name: "texp",
        label: "g = e^t (1+t)/(t e^t + 1), f = a/(t e^t + 1) [mu ln(2+t+(t-1)e^t) - gamma (1+t+(t-1)e^t)]",
        g: "exp(t)*(1+t)/(t*exp(t)+1)",
        f: "a/(t*exp(t)+1)*(mu*log(2+t+(t-1)*exp(t))-gamma*(1+t+(t-1)*exp(t)))",
        params: &[
            ("a", Range::Positive, 1.0),
            ("gamma", Range::NonNegative, 0.0),
            ("mu", Range::Positive, 20.0),
        ],
    },
    Entry {
        name: "regular-log",
        label: "g = 1/((t+e) ln(t+e)), f = (t+e)^p/ln(t+e) (ln(t+e) - 1)^p",
        g: "1/((t+euler)*log(t+euler))",
        f: "(t+euler)^p/log(t+euler)*(log(t+euler)-1)^p",
        params: &[("p", Range::Positive, 1.5)],
    },
    Entry {
        name: "tanh-psi",
        label: "g = tanh t, f = (-gamma + mu + sinh^(p-1) t) tanh t",
        g: "tanh(t)",
        f: "(-gamma+mu+sinh(t)^(p-1))*tanh(t)",
        params: &[
            ("gamma", Range::NonNegative, 1.0),
            ("mu", Range::NonNegative, 0.5),
            ("p", Range::AboveOne, 2.0),
        ],
    },
    Entry {
        name: "two-t-rational",
        label: "g = 2t/(1+t^2), f = (t + t^3/3)^p/(1+t^2)",
        g: "2*t/(1+t^2)",
        f: "1/(1+t^2)*(t+t^3/3)^p",
        params: &[("p", Range::Positive, 2.0)],
    },
    Entry {
        name: "proto-uniq",
        label: "g = 1, f = [-(e^t - 1) + (e^t - 1)^p] e^-t",
        g: "1",
        f: "((exp(t)-1)^p-(exp(t)-1))*exp(-t)",
        params: &[("p", Range::AboveOne, 2.0)],
    },
];

/// Names of the builtin pairs.
pub const REGISTRY: [&str; 9] = [
    "power-m",
    "exp-one",
    "mu-over-1+t",
    "sinh-cosh",
    "texp",
    "regular-log",
    "tanh-psi",
    "two-t-rational",
    "proto-uniq",
];

fn lookup(name: &str) -> Result<&'static Entry> {
    ENTRIES.iter().find(|e| e.name == name).ok_or_else(|| {
        Error::InvalidInput(format!(
            "unknown builtin pair '{name}' (known: {})",
            REGISTRY.join(", ")
        ))
    })
}

/// Typical parameter values for a builtin pair.
pub fn example_params(name: &str) -> Result<Params> {
    let entry = lookup(name)?;
    Ok(entry.params.iter().map(|(k, _, v)| (k.to_string(), *v)).collect())
}

/// Looks up a builtin pair and binds its parameters.
///
/// `power-m` has two variants: with `p` it is `f = t^p e^{-t^m}`; with `q`
/// and `nu` (and no `p`) it is `f = nu t e^{t^q - t^m}`, which requires
/// `q > m`.
pub fn builtin_pair(name: &str, params: &Params) -> Result<GradientPair> {
    if name == "power-m" && !params.contains_key("p") && params.contains_key("q") {
        return power_m_superlinear(params);
    }
    let entry = lookup(name)?;
    let mut bound = Params::new();
    for (pname, range, _) in entry.params {
        let v = params
            .get(*pname)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("pair '{name}' needs parameter {pname}")))?;
        range.check(pname, v)?;
        bound.insert(pname.to_string(), v);
    }
    if let Some(extra) = params.keys().find(|k| !bound.contains_key(*k)) {
        return invalid(format!("pair '{name}' has no parameter {extra}"));
    }
    GradientPair::new(entry.g, entry.f, bound, format!("{}: {}", entry.name, entry.label))
}

fn power_m_superlinear(params: &Params) -> Result<GradientPair> {
    let get = |k: &str| {
        params
            .get(k)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("pair 'power-m' (q variant) needs parameter {k}")))
    };
    let (m, q, nu) = (get("m")?, get("q")?, get("nu")?);
    Range::Positive.check("m", m)?;
    Range::Positive.check("nu", nu)?;
    if !(q > m) {
        return invalid(format!("parameter q must exceed m, got q={q}, m={m}"));
    }
    if let Some(extra) = params.keys().find(|k| !["m", "q", "nu"].contains(&k.as_str())) {
        return invalid(format!("pair 'power-m' (q variant) has no parameter {extra}"));
    }
    GradientPair::new(
        "m*t^(m-1)",
        "nu*t*exp(t^q-t^m)",
        params.clone(),
        "power-m: g = m t^(m-1), f = nu t exp(t^q - t^m)",
    )
}

/// The `(γ, ψ)` decomposition `f = −γ φ_g e^{−G} + ψ` for builtins that
/// come with one.
pub fn builtin_psi(name: &str, params: &Params) -> Result<Option<(f64, Expr)>> {
    match name {
        "tanh-psi" => {
            let gamma = params.get("gamma").copied().unwrap_or(0.0);
            Ok(Some((gamma, parse_expr("mu*tanh(t)+tanh(t)*sinh(t)^(p-1)")?)))
        }
        "proto-uniq" => Ok(Some((1.0, parse_expr("(exp(t)-1)^p*exp(-t)")?))),
        _ => {
            lookup(name)?;
            Ok(None)
        }
    }
}
