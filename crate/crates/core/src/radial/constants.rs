use serde::Serialize;

use crate::pucci::{Ellipticity, OperatorSign};

/// Dimension-like numbers and the exponents built from them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalExponents {
    #[serde(flatten)]
    pub ell: Ellipticity,
    /// `Ñ₊ = (λ/Λ)(n−1) + 1`.
    pub n_plus: f64,
    /// `Ñ₋ = (Λ/λ)(n−1) + 1`.
    pub n_minus: f64,
    /// `Ñ₊/(Ñ₊−2)`, present only when `Ñ₊ > 2`.
    pub p_s_plus: Option<f64>,
    /// `(Ñ₊+2)/(Ñ₊−2)`, present only when `Ñ₊ > 2`.
    pub p_p_plus: Option<f64>,
    pub p_s_minus: Option<f64>,
    pub p_o_minus: Option<f64>,
    /// `(n+2)/(n−2)`, present only when `n ≥ 3`.
    pub p_star_n: Option<f64>,
    pub p_star_located: Option<LocatedExponent>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocatedExponent {
    pub sign: OperatorSign,
    pub p: f64,
    pub lo: f64,
    pub hi: f64,
    pub r_max: f64,
}

impl CriticalExponents {
    pub fn n_tilde(&self, sign: OperatorSign) -> f64 {
        match sign {
            OperatorSign::Plus => self.n_plus,
            OperatorSign::Minus => self.n_minus,
        }
    }

    /// `Ñ/(Ñ−2)` for the given sign.
    pub fn p_s(&self, sign: OperatorSign) -> Option<f64> {
        match sign {
            OperatorSign::Plus => self.p_s_plus,
            OperatorSign::Minus => self.p_s_minus,
        }
    }

    /// Upper reference exponent: `p^p₊` for Plus and `p*_n` for Minus.
    pub fn p_upper(&self, sign: OperatorSign) -> Option<f64> {
        match sign {
            OperatorSign::Plus => self.p_p_plus,
            OperatorSign::Minus => self.p_star_n,
        }
    }
}

pub fn critical_constants(ell: &Ellipticity) -> CriticalExponents {
    let (l, bl, n) = (ell.lambda(), ell.big_lambda(), ell.n());
    let k = (n - 1) as f64;
    let n_plus = (l / bl) * k + 1.0;
    let n_minus = (bl / l) * k + 1.0;
    let mut notes = Vec::new();

    let serrin = |nt: f64| nt / (nt - 2.0);
    let sobolev = |nt: f64| (nt + 2.0) / (nt - 2.0);

    let (p_s_plus, p_p_plus) = if n_plus > 2.0 {
        (Some(serrin(n_plus)), Some(sobolev(n_plus)))
    } else {
        notes.push(format!(
            "N_plus = {n_plus} <= 2: p_s_plus and p_p_plus are undefined and the plus critical exponent is not searched"
        ));
        (None, None)
    };
    let (p_s_minus, p_o_minus) = if n_minus > 2.0 {
        (Some(serrin(n_minus)), Some(sobolev(n_minus)))
    } else {
        notes.push(format!("N_minus = {n_minus} <= 2: minus exponents are undefined"));
        (None, None)
    };
    let p_star_n = if n >= 3 {
        Some((n as f64 + 2.0) / (n as f64 - 2.0))
    } else {
        notes.push(format!("n = {n} < 3: p_star_n is undefined"));
        None
    };

    CriticalExponents {
        ell: *ell,
        n_plus,
        n_minus,
        p_s_plus,
        p_p_plus,
        p_s_minus,
        p_o_minus,
        p_star_n,
        p_star_located: None,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Option<f64>, b: f64) -> bool {
        a.is_some_and(|a| (a - b).abs() < 1e-14)
    }

    #[test]
    fn pucci_n5() {
        let c = critical_constants(&Ellipticity::new(1.0, 2.0, 5).unwrap());
        assert_eq!(c.n_plus, 3.0);
        assert_eq!(c.n_minus, 9.0);
        assert!(close(c.p_s_plus, 3.0));
        assert!(close(c.p_p_plus, 5.0));
        assert!(close(c.p_s_minus, 9.0 / 7.0));
        assert!(close(c.p_o_minus, 11.0 / 7.0));
        assert!(close(c.p_star_n, 7.0 / 3.0));
        assert!(c.p_star_located.is_none());
    }

    #[test]
    fn laplacian_degenerates() {
        let c = critical_constants(&Ellipticity::laplacian(3).unwrap());
        assert_eq!(c.n_plus, c.n_minus);
        assert!(close(c.p_s_plus, 3.0) && close(c.p_s_minus, 3.0));
        assert!(close(c.p_p_plus, 5.0) && close(c.p_o_minus, 5.0) && close(c.p_star_n, 5.0));
    }

    #[test]
    fn boundary_case_has_no_plus_exponents() {
        let c = critical_constants(&Ellipticity::new(1.0, 2.0, 3).unwrap());
        assert_eq!(c.n_plus, 2.0);
        assert!(c.p_s_plus.is_none() && c.p_p_plus.is_none());
        assert!(!c.notes.is_empty());
    }

    #[test]
    fn plane_has_no_p_star_n() {
        let c = critical_constants(&Ellipticity::laplacian(2).unwrap());
        assert!(c.p_star_n.is_none());
        assert!(c.p_s_minus.is_none());
    }
}
