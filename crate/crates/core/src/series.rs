//! Truncated power-series arithmetic over complex scalars.
//!
//! Every operation that can grow a series takes an explicit [`Truncation`];
//! coefficients above that order are never computed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A polynomial or truncated power series, `coeffs[n]` being the coefficient of `z^n`.
///
/// The stored length is representational: trailing zeros are allowed and
/// equality compares coefficient-wise with zero padding.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

/// Highest retained order `K`; series keep the coefficients of `z^0..=z^K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation(pub usize);

impl Truncation {
    pub fn order(self) -> usize {
        self.0
    }
}

impl Poly {
    /// Builds a polynomial from its coefficients; an empty list is read as the zero polynomial.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        if coeffs.is_empty() {
            Self { coeffs: vec![Complex64::new(0.0, 0.0)] }
        } else {
            Self { coeffs }
        }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: Complex64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    /// `z^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[n] = Complex64::new(1.0, 0.0);
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of `z^n`, zero beyond the stored length.
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Representational degree: the last stored index.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Index of the last coefficient whose modulus exceeds `tol`, or `None` for the zero polynomial.
    pub fn effective_degree(&self, tol: f64) -> Option<usize> {
        self.coeffs.iter().rposition(|c| c.norm() > tol)
    }

    /// Copy with trailing coefficients of modulus `<= tol` removed (at least one kept).
    pub fn trimmed(&self, tol: f64) -> Self {
        let end = self.effective_degree(tol).map_or(1, |d| d + 1);
        Self::new(self.coeffs[..end].to_vec())
    }

    pub fn truncated(&self, t: Truncation) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(t.order() + 1, Complex64::default());
        Self { coeffs }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Exact product without truncation.
    pub fn mul_full(&self, other: &Poly) -> Poly {
        cauchy_product(self, other, Truncation(self.degree() + other.degree()))
    }

    /// Multiplies by the linear factor `c0 + c1 z`.
    pub fn mul_linear(&self, c0: Complex64, c1: Complex64) -> Poly {
        let mut out = vec![Complex64::default(); self.coeffs.len() + 1];
        for (n, &c) in self.coeffs.iter().enumerate() {
            out[n] += c * c0;
            out[n + 1] += c * c1;
        }
        Poly { coeffs: out }
    }

    /// Largest coefficient-wise distance to `other`, with zero padding.
    pub fn max_abs_diff(&self, other: &Poly) -> f64 {
        let n = self.len().max(other.len());
        (0..n).map(|i| (self.coeff(i) - other.coeff(i)).norm()).fold(0.0, f64::max)
    }

    /// Sum of squared coefficient moduli.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        let n = self.len().max(other.len());
        (0..n).all(|i| self.coeff(i) == other.coeff(i))
    }
}

impl From<Vec<Complex64>> for Poly {
    fn from(coeffs: Vec<Complex64>) -> Self {
        Self::new(coeffs)
    }
}

/// Product of two series, keeping coefficients through `t`.
pub fn cauchy_product(a: &Poly, b: &Poly, t: Truncation) -> Poly {
    let k = t.order();
    let mut out = vec![Complex64::default(); k + 1];
    for (i, &ai) in a.coeffs.iter().enumerate().take(k + 1) {
        if ai == Complex64::default() {
            continue;
        }
        for (j, &bj) in b.coeffs.iter().enumerate().take(k + 1 - i) {
            out[i + j] += ai * bj;
        }
    }
    Poly { coeffs: out }
}

/// Generalized binomial coefficient `q (q-1) ... (q-n+1) / n!`.
pub fn binomial_general(q: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (q - i as f64) / (i + 1) as f64)
}

/// Coefficients of `h(z)^q` through order `t`.
///
/// Uses the J. C. P. Miller recurrence
/// `n h_0 c_n = sum_{j=1}^{min(n, deg h)} ((q+1) j - n) h_j c_{n-j}`
/// with `c_0 = h_0^q`. The constant term must be real and positive so the
/// principal branch is unambiguous.
pub fn series_pow(h: &Poly, q: f64, t: Truncation) -> Result<Poly> {
    let h0 = h.coeff(0);
    if h0 == Complex64::default() {
        return Err(Error::ZeroConstantTerm);
    }
    if h0.im != 0.0 || h0.re < 0.0 {
        return Err(Error::NonPositiveConstantTerm { re: h0.re, im: h0.im });
    }
    let k = t.order();
    let deg = h.degree();
    let mut c = vec![Complex64::default(); k + 1];
    c[0] = Complex64::new(h0.re.powf(q), 0.0);
    for n in 1..=k {
        let mut acc = Complex64::default();
        for j in 1..=n.min(deg) {
            let w = (q + 1.0) * j as f64 - n as f64;
            acc += h.coeffs[j] * c[n - j] * w;
        }
        c[n] = acc / (h0 * n as f64);
    }
    Ok(Poly { coeffs: c })
}

/// `z^k g(1/z)`: reverses the coefficient list of a polynomial of degree at most `k`.
pub fn flip(g: &Poly, k: usize) -> Result<Poly> {
    if let Some(d) = g.effective_degree(0.0) {
        if d > k {
            return Err(Error::DegreeTooHigh { degree: d, max: k });
        }
    }
    Ok(Poly { coeffs: (0..=k).map(|n| g.coeff(k - n)).collect() })
}

/// Coefficient-wise complex conjugation, i.e. `conj(h(conj z))`.
pub fn conj_reflect(h: &Poly) -> Poly {
    Poly { coeffs: h.coeffs.iter().map(|c| c.conj()).collect() }
}

/// Horner evaluation.
pub fn eval(pol: &Poly, z: Complex64) -> Complex64 {
    pol.coeffs.iter().rev().fold(Complex64::default(), |acc, &c| acc * z + c)
}
