use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::expr::GradientPair;
use crate::transform::TransformTable;

type SourceFn = dyn Fn(f64) -> Result<f64> + Send + Sync;

/// The nonlinearity `h` of `M±(D²v) + h(v) = 0`. Every variant is extended
/// oddly to `v < 0` (only reached by trial stages just past a zero).
#[derive(Clone)]
pub enum Source {
    /// `h(v) = |v|^{p−1} v`.
    PurePower { p: f64 },
    /// `h(v) = μ v`.
    Linear { mu: f64 },
    /// `h` from a gradient pair through its transform table.
    Transformed(Arc<TransformTable>),
    Custom { label: String, h: Arc<SourceFn> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceInfo {
    PurePower { p: f64 },
    Linear { mu: f64 },
    Transformed { pair: String, g: String, f: String, phi_max: f64 },
    Custom { label: String },
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.info())
    }
}

impl Source {
    /// Transformed source whose table covers `[0, max(100·amplitude, 10)]`,
    /// or as far as the overflow guard allows.
    pub fn transformed(pair: &GradientPair, amplitude: f64, tol: f64) -> Result<Self> {
        let cover = (100.0 * amplitude).max(10.0);
        let table = TransformTable::covering_truncated(pair, cover, tol)?;
        if table.phi_max() < amplitude {
            return Err(Error::Overflow {
                t: table.overflow_at().unwrap_or(table.t_max()),
                limit: crate::transform::G_OVERFLOW,
            });
        }
        Ok(Source::Transformed(Arc::new(table)))
    }

    pub fn custom(label: impl Into<String>, h: impl Fn(f64) -> Result<f64> + Send + Sync + 'static) -> Self {
        Source::Custom { label: label.into(), h: Arc::new(h) }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Source::PurePower { p } if !(*p > 1.0 && p.is_finite()) => {
                invalid(format!("p must exceed 1, got {p}"))
            }
            Source::Linear { mu } if !mu.is_finite() => invalid("mu must be finite"),
            _ => Ok(()),
        }
    }

    /// Exponent of a pure power source.
    pub fn power(&self) -> Option<f64> {
        match self {
            Source::PurePower { p } => Some(*p),
            _ => None,
        }
    }

    pub fn table(&self) -> Option<&TransformTable> {
        match self {
            Source::Transformed(t) => Some(t),
            _ => None,
        }
    }

    #[inline]
    pub fn h(&self, v: f64) -> Result<f64> {
        if v < 0.0 {
            return Ok(-self.h_nonneg(-v)?);
        }
        self.h_nonneg(v)
    }

    #[inline]
    fn h_nonneg(&self, s: f64) -> Result<f64> {
        match self {
            Source::PurePower { p } => Ok(s.powf(*p)),
            Source::Linear { mu } => Ok(mu * s),
            Source::Transformed(table) => table.h(s),
            Source::Custom { h, .. } => h(s),
        }
    }

    pub fn info(&self) -> SourceInfo {
        match self {
            Source::PurePower { p } => SourceInfo::PurePower { p: *p },
            Source::Linear { mu } => SourceInfo::Linear { mu: *mu },
            Source::Transformed(t) => SourceInfo::Transformed {
                pair: t.pair().label.clone(),
                g: t.pair().g.to_string(),
                f: t.pair().f.to_string(),
                phi_max: t.phi_max(),
            },
            Source::Custom { label, .. } => SourceInfo::Custom { label: label.clone() },
        }
    }
}
