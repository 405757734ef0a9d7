//! Closed-form values of `C(k, p)` and the two classical upper bounds.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::exponent::Exponent;

/// `C(3, 2/3) = sqrt(2 (1103 + 33 sqrt 33) / 1153)`.
pub fn c3_two_thirds() -> f64 {
    (2.0 * (1103.0 + 33.0 * 33f64.sqrt()) / 1153.0).sqrt()
}

/// `(1 - p/2)^e` without cancellation for small `p`.
fn one_minus_half_p_pow(p: f64, e: f64) -> f64 {
    (e * (-p / 2.0).ln_1p()).exp()
}

/// `C(1, p) = sqrt(2/p) (1 - p/2)^{1/p - 1/2}` for `0 < p < 1`.
pub fn c1(p: f64) -> f64 {
    (2.0 / p).sqrt() * one_minus_half_p_pow(p, 1.0 / p - 0.5)
}

/// `C(2, p) = (2/p) (1 - p/2)^{2/p - 1}` for `0 < p < 1`.
pub fn c2(p: f64) -> f64 {
    (2.0 / p) * one_minus_half_p_pow(p, 2.0 / p - 1.0)
}

/// The known value of `C(k, p)`: every `k` when `p >= 1`, `k = 1, 2` for all
/// `p`, and `k = 3` at exactly `p = 2/3`.
pub fn closed_form_c(k: usize, p: impl Into<Exponent>) -> Option<f64> {
    let p = p.into();
    let v = p.value();
    if !(v > 0.0) || k == 0 {
        return None;
    }
    if v >= 1.0 {
        return Some(1.0);
    }
    match k {
        1 => Some(c1(v)),
        2 => Some(c2(v)),
        3 if p.is_exactly(2, 3) => Some(c3_two_thirds()),
        _ => None,
    }
}

/// `Gamma(k/2 + 1/p) / (Gamma(k/2 + 1) Gamma(1/p))`, an upper bound for
/// `C(k, p)` provided the area-integral embedding holds with constant 1.
pub fn dual_bound(k: usize, p: f64) -> f64 {
    let (h, s) = (k as f64 / 2.0, 1.0 / p);
    (ln_gamma(h + s) - ln_gamma(h + 1.0) - ln_gamma(s)).exp()
}

/// The Hardy–Littlewood estimate in the form `k^{1/p - 1} C(1, p)`.
pub fn hl_bound(k: usize, p: f64) -> f64 {
    (k as f64).powf(1.0 / p - 1.0) * c1(p)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub k: usize,
    pub p: f64,
    pub closed_form: Option<f64>,
    /// Absent for `p >= 1`, where `C(k, p) = 1`.
    pub hl_bound: Option<f64>,
    pub dual_bound: Option<f64>,
    /// Always true: the dual bound assumes the embedding constant equals 1.
    pub dual_bound_conditional: bool,
    /// True when `1/p` is an integer, the case where that constant is known to be 1.
    pub embedding_constant_known: bool,
    pub monomial_lower: f64,
}

pub fn report(k: usize, p: impl Into<Exponent>) -> Result<BoundReport> {
    let p = p.into();
    let v = p.value();
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("p = {v} must be positive")));
    }
    let closed_form = closed_form_c(k, p);
    let (hl, dual) = if v < 1.0 { (Some(hl_bound(k, v)), Some(dual_bound(k, v))) } else { (None, None) };
    let inv = 1.0 / v;
    let rep = BoundReport {
        k,
        p: v,
        closed_form,
        hl_bound: hl,
        dual_bound: dual,
        dual_bound_conditional: true,
        embedding_constant_known: (inv - inv.round()).abs() <= 1e-12,
        monomial_lower: 1.0,
    };
    if let Some(c) = closed_form {
        let slack = 1e-12 * c;
        let below = |b: Option<f64>| b.is_none_or(|b| c <= b + slack);
        if !(rep.monomial_lower <= c + slack && below(hl) && below(dual)) {
            return Err(Error::InvariantViolation(format!(
                "bounds out of order at k = {k}, p = {v}: 1 <= {c} <= min({hl:?}, {dual:?}) fails"
            )));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert!((closed_form_c(2, 0.5).unwrap() - 27.0 / 16.0).abs() < 1e-15);
        assert_eq!(closed_form_c(5, 1.3), Some(1.0));
        assert!((closed_form_c(3, 2.0 / 3.0).unwrap() - 1.4973).abs() < 1e-4);
        assert_eq!(closed_form_c(3, 0.6666667), None);
        assert_eq!(closed_form_c(4, 0.5), None);
    }

    #[test]
    fn gamma_ratio() {
        assert!((dual_bound(3, 2.0 / 3.0) - 16.0 / (3.0 * std::f64::consts::PI)).abs() < 1e-14);
        assert!((dual_bound(0, 0.4) - 1.0).abs() < 1e-14);
        assert!((hl_bound(2, 0.5) - 4.0 * 0.75f64.powf(1.5)).abs() < 1e-14);
    }

    #[test]
    fn reports() {
        let r = report(4, 0.5).unwrap();
        assert!(r.closed_form.is_none() && r.embedding_constant_known);
        assert!(!report(2, 0.9).unwrap().embedding_constant_known);
        assert_eq!(report(1, 1.5).unwrap().closed_form, Some(1.0));
        assert!(report(0, 0.5).is_err());
    }
}
