//! Spectral factorization of nonnegative trigonometric polynomials.
//!
//! A nonnegative `Q(θ) = Σ_{|n|≤k} a_n e^{inθ}` equals `|P(e^{iθ})|^2` for a
//! polynomial `P` of degree at most `k`; the outer choice of `P` (no zeros in
//! the open disc) is unique up to a unimodular constant. We find it by rooting
//! the Laurent symbol `z^k Q(z)` and keeping one root from each reflection pair
//! `{w, 1/conj(w)}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::roots;
use crate::series::{eval, Poly};

const GRID: usize = 4096;
const CIRCLE_SNAP: f64 = 1e-7;
const PAIRING_TOL: f64 = 1e-7;
/// Width of the band around the circle where roots may be clustered instead of paired.
const CLUSTER_BAND: f64 = 1e-3;

/// Hermitian coefficient list `a_{-k}, ..., a_k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrigPoly {
    coeffs: Vec<Complex64>,
}

impl TrigPoly {
    /// Checks odd length and `a_{-n} = conj(a_n)` to `1e-12` relative to the largest coefficient.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::Domain("trigonometric polynomial needs 2k+1 coefficients".into()));
        }
        let k = coeffs.len() / 2;
        let scale = coeffs.iter().map(|c| c.norm()).fold(1e-300, f64::max);
        for n in 0..=k {
            if (coeffs[k + n] - coeffs[k - n].conj()).norm() > 1e-12 * scale {
                return Err(Error::Domain(format!("coefficient {n} breaks Hermitian symmetry")));
            }
        }
        Ok(Self { coeffs })
    }

    /// From the nonnegative-index half `a_0, ..., a_k`; `a_0` must be real.
    pub fn from_half(half: &[Complex64]) -> Result<Self> {
        if half.is_empty() {
            return Err(Error::Domain("empty coefficient list".into()));
        }
        let mut coeffs: Vec<Complex64> = half.iter().skip(1).rev().map(|c| c.conj()).collect();
        coeffs.extend_from_slice(half);
        Self::new(coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() / 2
    }

    /// `a_n`, zero outside `-k..=k`.
    pub fn coeff(&self, n: isize) -> Complex64 {
        let k = self.degree() as isize;
        if n.abs() > k {
            Complex64::default()
        } else {
            self.coeffs[(n + k) as usize]
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let k = self.degree() as isize;
        let mut acc = self.coeff(0).re;
        for n in 1..=k {
            acc += 2.0 * (self.coeff(n) * Complex64::from_polar(1.0, n as f64 * theta)).re;
        }
        acc
    }

    /// Largest value of `|Q|` on the check grid.
    pub fn sup_on_grid(&self) -> f64 {
        (0..GRID).map(|j| self.eval(2.0 * PI * j as f64 / GRID as f64).abs()).fold(0.0, f64::max)
    }

    fn min_on_grid(&self) -> f64 {
        (0..GRID).map(|j| self.eval(2.0 * PI * j as f64 / GRID as f64)).fold(f64::INFINITY, f64::min)
    }
}

/// `|P(e^{iθ})|^2` as a trigonometric polynomial: `a_n = Σ_j p_{j+n} conj(p_j)`.
pub fn modulus_squared(pol: &Poly) -> TrigPoly {
    let p = pol.coeffs();
    let k = p.len() - 1;
    let half: Vec<Complex64> = (0..=k).map(|n| (0..=k - n).map(|j| p[j + n] * p[j].conj()).sum()).collect();
    let mut coeffs: Vec<Complex64> = half.iter().skip(1).rev().map(|c| c.conj()).collect();
    coeffs.extend_from_slice(&half);
    TrigPoly { coeffs }
}

/// The outer factor `P` with `P(0) > 0` and `|P|^2 = Q` on the circle.
pub fn spectral_factor(q: &TrigPoly, tol: f64) -> Result<Poly> {
    let min = q.min_on_grid();
    if min < -tol {
        return Err(Error::NotNonnegative { min });
    }
    let scale = q.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::DegenerateInput("Q vanishes identically".into()));
    }
    let k = (0..=q.degree()).rev().find(|&n| q.coeff(n as isize).norm() > 1e-14 * scale).unwrap_or(0);
    if k == 0 {
        return Ok(Poly::constant(Complex64::new(q.coeff(0).re.max(0.0).sqrt(), 0.0)));
    }

    let symbol = Poly::new((0..=2 * k).map(|m| q.coeff(m as isize - k as isize)).collect());
    let all = roots(&symbol)?;

    let kept = select_outer_roots(all, &symbol)?;

    let monic = kept.iter().fold(Poly::one(), |acc, &w| acc.mul_linear(-w, Complex64::new(1.0, 0.0)));
    let energy = monic.norm_sq();
    let s = (q.coeff(0).re / energy).sqrt();
    let p0 = monic.coeff(0);
    let phase = if p0.norm() > 0.0 { p0.conj() / p0.norm() } else { Complex64::new(1.0, 0.0) };
    Ok(monic.scale(phase * s))
}

/// Picks one root from each reflection pair `{w, 1/conj(w)}`.
///
/// Roots off the circle are matched with their mirror images; what is left
/// must sit near the circle, where it comes in clusters of even size that
/// are replaced by half as many copies of the cluster centre.
fn select_outer_roots(mut all: Vec<Complex64>, symbol: &Poly) -> Result<Vec<Complex64>> {
    all.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let mut used = vec![false; all.len()];
    let mut kept = Vec::with_capacity(all.len() / 2);
    for i in 0..all.len() {
        let w = all[i];
        if used[i] || w.norm() <= 1.0 + CIRCLE_SNAP {
            continue;
        }
        let mirror = 1.0 / w.conj();
        let partner =
            (0..all.len()).filter(|&j| j != i && !used[j]).map(|j| (j, (all[j] - mirror).norm())).min_by(|a, b| a.1.total_cmp(&b.1));
        match partner {
            Some((j, d)) if d <= PAIRING_TOL * mirror.norm().max(1.0) => {
                used[i] = true;
                used[j] = true;
                kept.push(w);
            }
            _ if (w.norm() - 1.0).abs() < CLUSTER_BAND => {}
            _ => return Err(Error::PairingFailure(format!("no reflection partner for root {w}"))),
        }
    }
    let rest: Vec<Complex64> = (0..all.len()).filter(|&i| !used[i]).map(|i| all[i]).collect();
    if let Some(w) = rest.iter().find(|w| (w.norm() - 1.0).abs() >= CLUSTER_BAND) {
        return Err(Error::PairingFailure(format!("no reflection partner for root {w}")));
    }
    kept.extend(split_circle_roots(rest, symbol)?);
    Ok(kept)
}

/// Groups near-circle roots into clusters of even size and keeps half of each.
fn split_circle_roots(mut circle: Vec<Complex64>, symbol: &Poly) -> Result<Vec<Complex64>> {
    if circle.is_empty() {
        return Ok(circle);
    }
    circle.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    let n = circle.len();
    // start right after the widest angular gap so no cluster straddles the cut
    let gap = |i: usize| {
        let (a, b) = (circle[i].arg(), circle[(i + 1) % n].arg());
        if i + 1 == n {
            b + 2.0 * PI - a
        } else {
            b - a
        }
    };
    let widest = (0..n).max_by(|&i, &j| gap(i).total_cmp(&gap(j))).unwrap_or(0);
    let ordered: Vec<Complex64> = (0..n).map(|i| circle[(widest + 1 + i) % n]).collect();

    let mut reps = Vec::with_capacity(n / 2);
    let mut cluster: Vec<Complex64> = Vec::new();
    let mut flush = |cluster: &mut Vec<Complex64>| -> Result<()> {
        if cluster.len() % 2 == 1 {
            return Err(Error::PairingFailure(format!("odd number ({}) of roots near the circle point {}", cluster.len(), cluster[0])));
        }
        let centre: Complex64 = cluster.iter().sum::<Complex64>() / cluster.len() as f64;
        // a root of multiplicity m is a simple root of the (m-1)-th derivative
        let centre = refine_multiple_root(symbol, cluster.len(), centre);
        let centre = centre / centre.norm();
        reps.extend(std::iter::repeat_n(centre, cluster.len() / 2));
        cluster.clear();
        Ok(())
    };
    for w in ordered {
        if let Some(&last) = cluster.last() {
            if (w - last).norm() > CLUSTER_BAND {
                flush(&mut cluster)?;
            }
        }
        cluster.push(w);
    }
    flush(&mut cluster)?;
    Ok(reps)
}

fn derivative(p: &Poly) -> Poly {
    Poly::new(p.coeffs().iter().enumerate().skip(1).map(|(n, &c)| c * n as f64).collect())
}

fn refine_multiple_root(symbol: &Poly, multiplicity: usize, start: Complex64) -> Complex64 {
    if multiplicity < 2 {
        return start;
    }
    let d = (1..multiplicity).fold(symbol.clone(), |acc, _| derivative(&acc));
    let dd = derivative(&d);
    let mut z = start;
    for _ in 0..8 {
        let slope = eval(&dd, z);
        if slope == Complex64::default() {
            break;
        }
        let step = eval(&d, z) / slope;
        if !step.is_finite() || step.norm() > 1e-2 {
            break;
        }
        z -= step;
    }
    z
}
