//! Pucci extremal operators.
//!
//! `M⁺(M) = Λ Σ_{e>0} e + λ Σ_{e<0} e` and `M⁻(M) = λ Σ_{e>0} e + Λ Σ_{e<0} e`
//! over the eigenvalues `e` of a symmetric matrix. Eigenvalues come from a
//! cyclic Jacobi sweep; the radial form works directly on the Hessian
//! spectrum `{u″, u′/r (n−1 times)}` of a radial function.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest matrix dimension accepted by the eigensolver.
pub const MAX_DIM: usize = 64;

const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;
const ZERO_EIG_TOL: f64 = 1e-13;

/// Ellipticity constants `0 < λ ≤ Λ` together with the space dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEllipticity")]
pub struct Ellipticity {
    lambda: f64,
    #[serde(rename = "Lambda")]
    big_lambda: f64,
    n: usize,
}

#[derive(Deserialize)]
struct RawEllipticity {
    lambda: f64,
    #[serde(rename = "Lambda")]
    big_lambda: f64,
    n: usize,
}

impl TryFrom<RawEllipticity> for Ellipticity {
    type Error = Error;

    fn try_from(raw: RawEllipticity) -> Result<Self> {
        Ellipticity::new(raw.lambda, raw.big_lambda, raw.n)
    }
}

impl Ellipticity {
    pub fn new(lambda: f64, big_lambda: f64, n: usize) -> Result<Self> {
        if !(lambda.is_finite() && big_lambda.is_finite()) || lambda <= 0.0 || lambda > big_lambda {
            return invalid(format!(
                "ellipticity requires 0 < lambda <= Lambda, got lambda={lambda}, Lambda={big_lambda}"
            ));
        }
        if n < 2 {
            return invalid(format!("dimension must be at least 2, got {n}"));
        }
        Ok(Self { lambda, big_lambda, n })
    }

    /// The Laplacian case `λ = Λ = 1`.
    pub fn laplacian(n: usize) -> Result<Self> {
        Self::new(1.0, 1.0, n)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn big_lambda(&self) -> f64 {
        self.big_lambda
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Weights `(w_pos, w_neg)` applied to positive and negative eigenvalues.
    pub fn weights(&self, sign: OperatorSign) -> (f64, f64) {
        match sign {
            OperatorSign::Plus => (self.big_lambda, self.lambda),
            OperatorSign::Minus => (self.lambda, self.big_lambda),
        }
    }

    /// Contribution of a single eigenvalue `x` to `M±`.
    #[inline]
    pub fn weighting(&self, x: f64, sign: OperatorSign) -> f64 {
        let (wp, wn) = self.weights(sign);
        if x >= 0.0 {
            wp * x
        } else {
            wn * x
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorSign {
    Plus,
    Minus,
}

impl OperatorSign {
    pub fn flip(self) -> Self {
        match self {
            OperatorSign::Plus => OperatorSign::Minus,
            OperatorSign::Minus => OperatorSign::Plus,
        }
    }
}

impl fmt::Display for OperatorSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorSign::Plus => f.write_str("plus"),
            OperatorSign::Minus => f.write_str("minus"),
        }
    }
}

impl FromStr for OperatorSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plus" | "+" => Ok(OperatorSign::Plus),
            "minus" | "-" => Ok(OperatorSign::Minus),
            other => invalid(format!("unknown operator sign '{other}' (expected plus or minus)")),
        }
    }
}

/// Symmetric matrix stored as its row-major upper triangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSymMatrix")]
pub struct SymMatrix {
    dim: usize,
    upper: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSymMatrix {
    dim: usize,
    upper: Vec<f64>,
}

impl TryFrom<RawSymMatrix> for SymMatrix {
    type Error = Error;

    fn try_from(raw: RawSymMatrix) -> Result<Self> {
        SymMatrix::from_upper(raw.dim, raw.upper)
    }
}

#[inline]
fn tri_len(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, upper: vec![0.0; tri_len(dim)] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn from_upper(dim: usize, upper: Vec<f64>) -> Result<Self> {
        if upper.len() != tri_len(dim) {
            return invalid(format!(
                "upper triangle of a {dim}x{dim} matrix needs {} entries, got {}",
                tri_len(dim),
                upper.len()
            ));
        }
        if upper.iter().any(|x| !x.is_finite()) {
            return invalid("matrix entries must be finite");
        }
        Ok(Self { dim, upper })
    }

    /// Builds from a full matrix, symmetrising `(A + Aᵀ)/2`.
    pub fn from_full(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return invalid("matrix must be square");
        }
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, 0.5 * (rows[i][j] + rows[j][i]));
            }
        }
        Ok(m)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.dim - i * (i + 1) / 2 + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[self.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.index(i, j);
        self.upper[k] = v;
    }

    pub fn to_full(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = self.get(i, j);
                s += v * v;
            }
        }
        s.sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self { dim: self.dim, upper: self.upper.iter().map(|x| alpha * x).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return invalid(format!("dimension mismatch: {} vs {}", self.dim, other.dim));
        }
        Ok(Self {
            dim: self.dim,
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a + b).collect(),
        })
    }

    /// `Qᵀ M Q` for a square `Q` given row-major.
    pub fn congruence(&self, q: &[Vec<f64>]) -> Result<Self> {
        let n = self.dim;
        if q.len() != n || q.iter().any(|r| r.len() != n) {
            return invalid("congruence matrix has the wrong shape");
        }
        let mut mq = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                mq[i][j] = (0..n).map(|k| self.get(i, k) * q[k][j]).sum();
            }
        }
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                out.set(i, j, (0..n).map(|k| q[k][i] * mq[k][j]).sum());
            }
        }
        Ok(out)
    }
}

/// `ξ ⊗ ξ = (ξ_i ξ_j)`.
pub fn outer(xi: &[f64]) -> SymMatrix {
    let n = xi.len();
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            m.set(i, j, xi[i] * xi[j]);
        }
    }
    m
}

/// Eigenvalues sorted ascending, with the orthogonality defect of the
/// eigenvector basis they were computed with.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub ortho_residual: f64,
}

/// Full eigendecomposition; `vectors[k]` is the unit eigenvector for
/// `values[k]`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

impl EigenDecomposition {
    /// `‖VᵀV − I‖_F`.
    pub fn ortho_residual(&self) -> f64 {
        let n = self.values.len();
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = (0..n).map(|k| self.vectors[a][k] * self.vectors[b][k]).sum();
                let d = dot - if a == b { 1.0 } else { 0.0 };
                s += d * d;
            }
        }
        s.sqrt()
    }

    /// `‖M − V diag(e) Vᵀ‖_F`.
    pub fn reconstruction_residual(&self, m: &SymMatrix) -> f64 {
        let n = self.values.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n)
                    .map(|k| self.vectors[k][i] * self.values[k] * self.vectors[k][j])
                    .sum();
                let d = m.get(i, j) - r;
                s += d * d;
            }
        }
        s.sqrt()
    }
}

/// Cyclic Jacobi eigendecomposition.
pub fn eigen_decompose(m: &SymMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    if n == 0 {
        return invalid("matrix dimension must be at least 1");
    }
    if n > MAX_DIM {
        return invalid(format!("matrix dimension {n} exceeds the supported maximum {MAX_DIM}"));
    }
    let mut a = m.to_full();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let norm = m.frobenius_norm();
    let target = JACOBI_TOL * norm;

    let off_norm = |a: &[Vec<f64>]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i][j] * a[i][j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while sweeps < JACOBI_MAX_SWEEPS && off_norm(&a) > target {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                let app = a[p][p];
                let aqq = a[q][q];
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[r][p];
                        let arq = a[r][q];
                        let new_rp = arp - s * (arq + tau * arp);
                        let new_rq = arq + s * (arp - tau * arq);
                        a[r][p] = new_rp;
                        a[p][r] = new_rp;
                        a[r][q] = new_rq;
                        a[q][r] = new_rq;
                    }
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = vp - s * (vq + tau * vp);
                    row[q] = vq + s * (vp - tau * vq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = order.iter().map(|&k| a[k][k]).collect();
    let vectors = order.iter().map(|&k| (0..n).map(|i| v[i][k]).collect()).collect();
    Ok(EigenDecomposition { values, vectors, sweeps })
}

pub fn eigenvalues_sym(m: &SymMatrix) -> Result<Spectrum> {
    let dec = eigen_decompose(m)?;
    let ortho_residual = dec.ortho_residual();
    Ok(Spectrum { eigenvalues: dec.values, ortho_residual })
}

/// Weighted eigenvalue sum with tiny eigenvalues snapped to zero.
fn weighted_sum(values: &[f64], scale: f64, ell: &Ellipticity, sign: OperatorSign) -> f64 {
    let cutoff = ZERO_EIG_TOL * scale.max(1.0);
    let (wp, wn) = ell.weights(sign);
    let mut pos = 0.0;
    let mut neg = 0.0;
    for &e in values {
        if e > cutoff {
            pos += e;
        } else if e < -cutoff {
            neg += e;
        }
    }
    wp * pos + wn * neg
}

/// `M±_{λ,Λ}(M)`.
pub fn pucci_eval(m: &SymMatrix, ell: &Ellipticity, sign: OperatorSign) -> Result<f64> {
    if m.dim() != ell.n() {
        return invalid(format!(
            "matrix dimension {} does not match ellipticity dimension {}",
            m.dim(),
            ell.n()
        ));
    }
    pucci_eval_any_dim(m, ell, sign)
}

/// Same as [`pucci_eval`] but without tying the matrix size to `ell.n()`.
pub fn pucci_eval_any_dim(m: &SymMatrix, ell: &Ellipticity, sign: OperatorSign) -> Result<f64> {
    let spec = eigenvalues_sym(m)?;
    Ok(weighted_sum(&spec.eigenvalues, m.frobenius_norm(), ell, sign))
}

/// `M±` of the Hessian of a radial function: spectrum `{u″, u′/r × (n−1)}`.
pub fn pucci_radial_eval(
    up: f64,
    upp: f64,
    r: f64,
    ell: &Ellipticity,
    sign: OperatorSign,
) -> Result<f64> {
    if !(r > 0.0) {
        return invalid(format!("radius must be positive, got {r}"));
    }
    let tangential = up / r;
    let k = (ell.n() - 1) as f64;
    let frob = (upp * upp + k * tangential * tangential).sqrt();
    let mut values = vec![tangential; ell.n() - 1];
    values.push(upp);
    Ok(weighted_sum(&values, frob, ell, sign))
}

/// Inverse of `x ↦ weighting(x)`: for `Plus`, `target/Λ` when `target ≥ 0`
/// and `target/λ` otherwise; `Minus` swaps the weights.
#[inline]
pub fn invert_pucci_1d(target: f64, ell: &Ellipticity, sign: OperatorSign) -> f64 {
    let (wp, wn) = ell.weights(sign);
    if target >= 0.0 {
        target / wp
    } else {
        target / wn
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ell(l: f64, bl: f64, n: usize) -> Ellipticity {
        Ellipticity::new(l, bl, n).unwrap()
    }

    #[test]
    fn diagonal_and_2x2_spectra() {
        let s = eigenvalues_sym(&SymMatrix::diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 2.0, 3.0]);
        let m = SymMatrix::from_upper(2, vec![2.0, 1.0, 2.0]).unwrap();
        let s = eigenvalues_sym(&m).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((s.eigenvalues[1] - 3.0).abs() < 1e-14);
        assert!(s.ortho_residual < 1e-14);
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(eigenvalues_sym(&SymMatrix::zeros(0)), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn oversized_matrix_rejected() {
        assert!(eigenvalues_sym(&SymMatrix::identity(65)).is_err());
    }

    #[test]
    fn ellipticity_validation() {
        assert!(Ellipticity::new(2.0, 1.0, 3).is_err());
        assert!(Ellipticity::new(0.0, 1.0, 3).is_err());
        assert!(Ellipticity::new(1.0, 1.0, 1).is_err());
        assert!(Ellipticity::new(1.0, 2.0, 2).is_ok());
    }

    #[test]
    fn pucci_examples() {
        let e = ell(1.0, 2.0, 3);
        assert_eq!(pucci_eval(&SymMatrix::identity(3), &e, OperatorSign::Plus).unwrap(), 6.0);
        let m = SymMatrix::diag(&[1.0, -1.0, 0.0]);
        assert_eq!(pucci_eval(&m, &e, OperatorSign::Plus).unwrap(), 1.0);
        assert_eq!(pucci_eval(&m, &e, OperatorSign::Minus).unwrap(), -1.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let e = ell(1.0, 2.0, 3);
        assert!(pucci_eval(&SymMatrix::identity(2), &e, OperatorSign::Plus).is_err());
    }

    #[test]
    fn outer_examples() {
        assert_eq!(outer(&[1.0, 0.0, 0.0]), SymMatrix::diag(&[1.0, 0.0, 0.0]));
        let e = ell(1.0, 2.0, 2);
        assert_eq!(pucci_eval(&outer(&[1.0, 1.0]), &e, OperatorSign::Plus).unwrap(), 4.0);
    }

    #[test]
    fn radial_examples() {
        let e = ell(1.0, 2.0, 3);
        let v = pucci_radial_eval(-0.5, 1.0, 1.0, &e, OperatorSign::Plus).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(pucci_radial_eval(0.0, 3.0, 2.0, &e, OperatorSign::Plus).unwrap(), 6.0);
        assert_eq!(pucci_radial_eval(0.0, -3.0, 2.0, &e, OperatorSign::Plus).unwrap(), -3.0);
        assert!(pucci_radial_eval(0.0, 1.0, 0.0, &e, OperatorSign::Plus).is_err());
    }

    #[test]
    fn invert_examples() {
        let e = ell(1.0, 2.0, 3);
        assert_eq!(invert_pucci_1d(4.0, &e, OperatorSign::Plus), 2.0);
        assert_eq!(invert_pucci_1d(-3.0, &e, OperatorSign::Plus), -3.0);
        assert_eq!(invert_pucci_1d(-3.0, &e, OperatorSign::Minus), -1.5);
    }

    #[test]
    fn json_matrix_roundtrip() {
        let m = SymMatrix::from_json(r#"{"dim": 2, "upper": [2.0, 1.0, 2.0]}"#).unwrap();
        assert_eq!(m.get(1, 0), 1.0);
        assert!(SymMatrix::from_json(r#"{"dim": 2, "upper": [2.0, 1.0]}"#).is_err());
        let back: SymMatrix = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn full_matrix_is_symmetric() {
        let m = SymMatrix::from_upper(3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let full = m.to_full();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(full[i][j], full[j][i]);
            }
        }
    }
}
