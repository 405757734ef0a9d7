//! Closed-form solutions of the flip equation for `k = 1`, `k = 2` and `(k, p) = (3, 2/3)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fejer_riesz::modulus_squared;
use crate::hardy::{h2_norm_sq, FactoredFunction};
use crate::series::{cauchy_product, series_pow, Poly, Truncation};
use crate::solver::{admissibility, build_g, build_h, residual_norm, FlipSystem};

/// Residual above which a candidate is considered stale.
pub const CANDIDATE_RESIDUAL: f64 = 1e-9;

/// One solution of the flip equation for a fixed Blaschke count `l`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuredCandidate {
    pub k: usize,
    pub p: f64,
    pub l: usize,
    /// `alpha_1..alpha_l` belong to Blaschke factors, the rest to outer factors.
    pub alphas: Vec<Complex64>,
    pub lambda: Complex64,
    /// The normalized coefficient `a_k`.
    pub value: f64,
    pub branch_label: String,
    /// Set when the branch solves the equations but is not an admissible extremal.
    pub rejected: Option<String>,
}

impl StructuredCandidate {
    pub fn system(&self) -> Result<FlipSystem> {
        FlipSystem::new(self.k, self.p, self.l)
    }

    pub fn residual(&self) -> Result<f64> {
        Ok(residual_norm(&self.system()?, &self.alphas, self.lambda))
    }

    pub fn is_admissible(&self) -> bool {
        self.rejected.is_none()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateTable {
    pub k: usize,
    pub p: f64,
    /// Sorted by value, largest first.
    pub entries: Vec<StructuredCandidate>,
    /// Index of the largest admissible entry.
    pub best: usize,
}

impl CandidateTable {
    fn new(k: usize, p: f64, mut entries: Vec<StructuredCandidate>) -> Self {
        entries.sort_by(|a, b| b.value.total_cmp(&a.value));
        let best = entries.iter().position(StructuredCandidate::is_admissible).expect("the monomial entry is always admissible");
        Self { k, p, entries, best }
    }

    pub fn best(&self) -> &StructuredCandidate {
        &self.entries[self.best]
    }

    pub fn for_l(&self, l: usize) -> impl Iterator<Item = &StructuredCandidate> {
        self.entries.iter().filter(move |e| e.l == l)
    }
}

/// `|lambda| ||h||_2^{2(1 - 1/p)}`, after checking the flip equation still holds.
pub fn candidate_value(c: &StructuredCandidate) -> Result<f64> {
    let residual = c.residual()?;
    if !(residual <= CANDIDATE_RESIDUAL) {
        return Err(Error::StaleCandidate { residual });
    }
    let h = build_h(&c.alphas);
    Ok(c.lambda.norm() * h2_norm_sq(&h).powf(1.0 - 1.0 / c.p))
}

/// `f = A g h^q` with `A = ||h||_2^{-2/p}`, normalized to unit `H^p` quasi-norm.
pub fn extremal_function(c: &StructuredCandidate) -> Result<FactoredFunction> {
    let g = build_g(&c.alphas, c.l);
    let h = build_h(&c.alphas);
    let a = h2_norm_sq(&h).powf(-1.0 / c.p);
    FactoredFunction::new(g, h, 2.0 / c.p - 1.0, a)
}

/// `|a_{k-n}(f) - a_k(f) <z^n, |h|^2>|` for `n = 1..=n_max`, with `h` scaled to unit
/// `H^2` norm and `a_{k-n} = 0` for `n > k`. All vanish at a genuine extremal.
pub fn variational_defects(c: &StructuredCandidate, n_max: usize) -> Result<Vec<f64>> {
    let f = extremal_function(c)?;
    let k = c.k;
    let coeffs = cauchy_product(&f.g, &series_pow(&f.h, f.q, Truncation(k))?, Truncation(k)).scale(Complex64::new(f.a, 0.0));
    let autocorr = modulus_squared(&f.h);
    let norm = h2_norm_sq(&f.h);
    Ok((1..=n_max)
        .map(|n| {
            let lhs = if n <= k { coeffs.coeff(k - n) } else { Complex64::default() };
            let pairing = autocorr.coeff(-(n as isize)) / norm;
            (lhs - coeffs.coeff(k) * pairing).norm()
        })
        .collect())
}

/// The `k`-th Taylor coefficient of [`extremal_function`].
pub fn extremal_coefficient(c: &StructuredCandidate) -> Result<Complex64> {
    let f = extremal_function(c)?;
    let c_pow = series_pow(&f.h, f.q, Truncation(c.k))?;
    Ok(cauchy_product(&f.g, &c_pow, Truncation(c.k)).coeff(c.k) * f.a)
}

fn check_p(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p = {p} outside (0, 1)")));
    }
    Ok(2.0 / p - 1.0)
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Roots of `t^2 - s t + m`.
fn quadratic_pair(s: Complex64, m: Complex64) -> [Complex64; 2] {
    let d = (s * s - 4.0 * m).sqrt();
    [(s + d) / 2.0, (s - d) / 2.0]
}

fn entry(k: usize, p: f64, l: usize, alphas: Vec<Complex64>, lambda: Complex64, label: &str) -> Result<StructuredCandidate> {
    let mut c = StructuredCandidate { k, p, l, alphas, lambda, value: 0.0, branch_label: label.to_string(), rejected: None };
    // keep lambda positive so that the k-th coefficient of the extremal is +value
    if c.lambda.re < 0.0 && l < k {
        let u = Complex64::from_polar(1.0, -std::f64::consts::PI / (k - l) as f64);
        c.alphas.iter_mut().for_each(|a| *a *= u);
        c.lambda *= u.powi((k - l) as i32);
    }
    c.value = candidate_value(&c)?;
    c.rejected = admissibility(&c);
    Ok(c)
}

fn monomial(k: usize, p: f64) -> Result<StructuredCandidate> {
    entry(k, p, k, vec![Complex64::default(); k], re(1.0), &format!("l={k}, f = z^{k}"))
}

pub fn candidates_k1(p: f64) -> Result<CandidateTable> {
    check_p(p)?;
    let a = (p / (2.0 - p)).sqrt();
    let entries = vec![monomial(1, p)?, entry(1, p, 0, vec![re(a)], re(1.0 / a), "l=0")?];
    Ok(CandidateTable::new(1, p, entries))
}

pub fn candidates_k2(p: f64) -> Result<CandidateTable> {
    let q = check_p(p)?;
    let mut entries = vec![monomial(2, p)?];

    let (r2q, r2) = ((2.0 / q).sqrt(), (2.0 * q).sqrt());
    let a1 = -1.0 / ((1.0 + r2q) * (1.0 + r2)).sqrt();
    let a2 = a1 * (-1.0 - r2q);
    entries.push(entry(2, p, 1, vec![re(a1), re(a2)], re(1.0 / a2), "l=1, minus sign")?);
    if q < 2.0 {
        let a1 = 1.0 / ((r2q - 1.0) * (r2 - 1.0)).sqrt();
        let a2 = a1 * (r2q - 1.0);
        entries.push(entry(2, p, 1, vec![re(a1), re(a2)], re(1.0 / a2), "l=1, plus sign")?);
    }

    let pair = quadratic_pair(re(r2q), re(1.0 / q));
    entries.push(entry(2, p, 0, pair.to_vec(), re(q), "l=0, beta > 0")?);
    let a = 1.0 / q.sqrt();
    let pair = quadratic_pair(re(0.0), re(a));
    entries.push(entry(2, p, 0, pair.to_vec(), re(1.0 / a), "l=0, beta = 0")?);
    Ok(CandidateTable::new(2, p, entries))
}

/// The roots of `10 xi^3 - 12 xi^2 + 2 xi + 1`, as `(trigonometric, polished)`.
pub fn cubic_xi_roots() -> [(f64, f64); 3] {
    let th = ((5.0 * 111f64.sqrt()) / 117.0).atan() / 3.0;
    let s = (7.0f64 / 3.0).sqrt();
    let raw = [
        0.4 * (1.0 - s * th.cos()),
        (2.0 + s * (th.cos() - 3f64.sqrt() * th.sin())) / 5.0,
        (2.0 + s * (th.cos() + 3f64.sqrt() * th.sin())) / 5.0,
    ];
    raw.map(|x| {
        let f = ((10.0 * x - 12.0) * x + 2.0) * x + 1.0;
        let df = (30.0 * x - 24.0) * x + 2.0;
        (x, x - f / df)
    })
}

pub fn candidates_k3_p23() -> Result<CandidateTable> {
    let p = 2.0 / 3.0;
    let mut entries = vec![monomial(3, p)?];
    let sqrt3 = 3f64.sqrt();

    let (rho, eta, xi) = (sqrt3 / 2.0, -sqrt3 / 3.0, 0.25);
    let [a1, a2] = quadratic_pair(re(eta), re(xi));
    entries.push(entry(3, p, 2, vec![a1, a2, re(rho)], re(1.0 / rho), "l=2")?);

    // eta = 0, rho = 0, xi^2 = 1/2; both signs of xi lie on one rotation orbit
    let xi = 0.5f64.sqrt();
    let [a2, a3] = quadratic_pair(re(0.0), re(xi));
    entries.push(entry(3, p, 1, vec![re(0.0), a2, a3], re(1.0 / xi), "l=1, eta = 0")?);
    for (i, (_, xi)) in cubic_xi_roots().into_iter().enumerate() {
        let eta = ((1.0 - 2.0 * xi * xi) / (2.0 - 3.0 * xi)).sqrt();
        let rho = eta * (1.0 / xi - 2.0);
        let [a2, a3] = quadratic_pair(re(eta), re(xi));
        let label = format!("l=1, cubic root xi_{} = {:.4}", i + 1, xi);
        entries.push(entry(3, p, 1, vec![re(rho), a2, a3], re(1.0 / xi), &label)?);
    }

    let r33 = 33f64.sqrt();
    for (sign, label) in [(-1.0, "l=0, minus sign in alpha"), (1.0, "l=0, plus sign in alpha")] {
        let alpha = (15.0 + sign * r33).sqrt() / 8.0;
        let beta = -sign * (3.0 - sign * r33 / 3.0).sqrt() / 2.0;
        let gamma = (1.0 - sign * r33) / 8.0;
        let alphas = cubic_roots(beta, gamma, alpha);
        entries.push(entry(3, p, 0, alphas, re(1.0 / alpha), label)?);
    }
    let a = 0.5f64.sqrt();
    entries.push(entry(3, p, 0, cubic_roots(0.0, 0.0, a), re(1.0 / a), "l=0, beta = 0")?);
    Ok(CandidateTable::new(3, p, entries))
}

/// Roots of `t^3 - beta t^2 + gamma t - alpha` for real coefficients.
fn cubic_roots(beta: f64, gamma: f64, alpha: f64) -> Vec<Complex64> {
    let pol = Poly::from_real(&[-alpha, gamma, -beta, 1.0]);
    crate::roots::roots(&pol).expect("monic cubic")
}

/// The comparison function of the `k = 2` case analysis; `Phi(1) = 1`.
pub fn phi(q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::Domain(format!("q = {q} below 1")));
    }
    let ratio = ((1.0 + (2.0 / q).sqrt()) / (1.0 + (2.0 * q).sqrt())).sqrt();
    Ok(ratio * q * ((1.0 - q) * (1.0 / q).ln_1p()).exp())
}

/// The derivative sign function accompanying [`phi`].
pub fn psi(q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::Domain(format!("q = {q} below 1")));
    }
    Ok(2f64.sqrt() / (1.0 + q) - (1.0 / q).ln_1p())
}
