//! `H^p` quasi-norms on the unit circle by periodic trapezoidal quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::roots;
use crate::series::{eval, Poly};

const MIN_LOG2_SAMPLES: u32 = 10;
const NEAR_CIRCLE_LOG2_SAMPLES: u32 = 18;
const MAX_LOG2_SAMPLES: u32 = 20;
/// Roots this close to the unit circle make `|f|^p` only Hölder continuous there.
const NEAR_CIRCLE: f64 = 1e-6;

/// A quasi-norm value together with the quadrature resolution that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub p: f64,
    pub samples: usize,
    pub err_estimate: f64,
}

/// `f = A g h^q` with `h` zero-free on the closed disc.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactoredFunction {
    pub g: Poly,
    pub h: Poly,
    pub q: f64,
    pub a: f64,
}

impl FactoredFunction {
    /// Validates `q > 0`, `A > 0` and that `h` has no root with `|root| <= 1 + 1e-9`.
    pub fn new(g: Poly, h: Poly, q: f64, a: f64) -> Result<Self> {
        if !(q > 0.0) {
            return Err(Error::Domain(format!("exponent q = {q} must be positive")));
        }
        if !(a > 0.0) {
            return Err(Error::Domain(format!("normalization A = {a} must be positive")));
        }
        let bad = zeros_in_closed_disc(&h, 1e-9)?;
        if !bad.is_empty() {
            return Err(Error::Domain(format!("h vanishes in the closed disc at {:?}", bad)));
        }
        Ok(Self { g, h, q, a })
    }

    /// `f = pol` written as `pol * 1^q`; used for free polynomials.
    pub fn polynomial(pol: Poly) -> Self {
        Self { g: pol, h: Poly::one(), q: 1.0, a: 1.0 }
    }

    /// `|f(z)|`, computed from moduli only so no branch of `h^q` is needed.
    pub fn modulus_at(&self, z: Complex64) -> f64 {
        self.a * eval(&self.g, z).norm() * eval(&self.h, z).norm().powf(self.q)
    }

    fn has_near_circle_zero(&self) -> Result<bool> {
        let near = |pol: &Poly| -> Result<bool> {
            if pol.effective_degree(1e-300).unwrap_or(0) == 0 {
                return Ok(false);
            }
            Ok(roots(pol)?.iter().any(|r| (r.norm() - 1.0).abs() <= NEAR_CIRCLE))
        };
        Ok(near(&self.g)? || near(&self.h)?)
    }
}

/// Sum in a fixed pairwise order, so the result does not depend on threading.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 64 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sum of `|f|^p` over the nodes `2 pi (offset + stride j) / n`, `j = 0..n/stride`.
fn node_sum(f: &FactoredFunction, p: f64, n: usize, offset: usize, stride: usize) -> f64 {
    let count = n / stride;
    let vals: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|j| {
            let theta = 2.0 * PI * (offset + stride * j) as f64 / n as f64;
            f.modulus_at(Complex64::from_polar(1.0, theta)).powf(p)
        })
        .collect();
    pairwise_sum(&vals)
}

/// `||f||_{H^p}` by the trapezoidal rule, doubling the node count from `2^10`
/// until two successive values differ by less than `target_tol`.
pub fn hp_norm(f: &FactoredFunction, p: f64, target_tol: f64) -> Result<NormEstimate> {
    if !(p > 0.0 && p < 2.0) {
        return Err(Error::Domain(format!("p = {p} outside (0, 2)")));
    }
    if !(target_tol > 0.0) {
        return Err(Error::Domain(format!("target_tol = {target_tol} must be positive")));
    }
    let start = if f.has_near_circle_zero()? { NEAR_CIRCLE_LOG2_SAMPLES } else { MIN_LOG2_SAMPLES };
    let mut n = 1usize << start;
    let mut sum = node_sum(f, p, n, 0, 1);
    let mut value = (sum / n as f64).powf(1.0 / p);
    loop {
        // the refined grid reuses the old nodes; only the midpoints are new
        let odd = node_sum(f, p, 2 * n, 1, 2);
        sum += odd;
        n *= 2;
        let next = (sum / n as f64).powf(1.0 / p);
        let diff = (next - value).abs();
        value = next;
        let est = NormEstimate { value, p, samples: n, err_estimate: diff };
        if diff < target_tol {
            return Ok(est);
        }
        if n >= 1 << MAX_LOG2_SAMPLES {
            return Err(Error::NoConvergence { best: est });
        }
    }
}

/// Squared `H^2` norm by Parseval.
pub fn h2_norm_sq(pol: &Poly) -> f64 {
    pol.norm_sq()
}

/// Residuals of `||f||_p^p = A^p ||h||_2^2` (and `= A^p ||g||_2^2` when `|g| = |h|` on the circle).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormIdentityReport {
    pub hp_pow_p: f64,
    pub parseval_h: f64,
    pub residual_h: f64,
    pub parseval_g: Option<f64>,
    pub residual_g: Option<f64>,
    pub holds: bool,
}

pub fn check_norm_identities(f: &FactoredFunction, p: f64, tol: f64) -> Result<NormIdentityReport> {
    let est = hp_norm(f, p, (tol * 1e-2).clamp(1e-15, 1e-12))?;
    let hp_pow_p = est.value.powf(p);
    let ap = f.a.powf(p);
    let parseval_h = ap * h2_norm_sq(&f.h);
    let residual_h = (hp_pow_p - parseval_h).abs();

    let moduli_match = (0..64).all(|j| {
        let z = Complex64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.25) / 64.0);
        let (g, h) = (eval(&f.g, z).norm(), eval(&f.h, z).norm());
        (g - h).abs() <= 1e-12 * h.max(1.0)
    });
    let (parseval_g, residual_g) = if moduli_match {
        let v = ap * h2_norm_sq(&f.g);
        (Some(v), Some((hp_pow_p - v).abs()))
    } else {
        (None, None)
    };
    let holds = residual_h <= tol && residual_g.is_none_or(|r| r <= tol);
    Ok(NormIdentityReport { hp_pow_p, parseval_h, residual_h, parseval_g, residual_g, holds })
}

/// Roots of `pol` with modulus at most `1 + tol`.
pub fn zeros_in_closed_disc(pol: &Poly, tol: f64) -> Result<Vec<Complex64>> {
    Ok(roots(pol)?.into_iter().filter(|r| r.norm() <= 1.0 + tol).collect())
}
