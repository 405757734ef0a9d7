//! Numerical solution of the flip equation
//! `lambda z^k g(1/z) = conj(h^q)(z) + O(z^{k+1})` over complex zero parameters.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::candidates::{candidate_value, StructuredCandidate};
use crate::error::{Error, Result};
use crate::series::{conj_reflect, flip, series_pow, Poly, Truncation};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const SIGNIFICANT: f64 = 1e-7;
const DISTINCT: f64 = 1e-6;

/// Which quantity is rotated to the positive real axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// The product of the outer zero parameters `alpha_{l+1} ... alpha_k`.
    OuterProduct,
    /// `alpha_1`, used when every factor is a Blaschke factor.
    FirstAlpha,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlipSystem {
    pub k: usize,
    pub p: f64,
    pub q: f64,
    pub l: usize,
    pub gauge: Gauge,
}

impl FlipSystem {
    pub fn new(k: usize, p: f64, l: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("p = {p} outside (0, 1)")));
        }
        if l > k {
            return Err(Error::Domain(format!("l = {l} exceeds k = {k}")));
        }
        let gauge = if l < k { Gauge::OuterProduct } else { Gauge::FirstAlpha };
        Ok(Self { k, p, q: 2.0 / p - 1.0, l, gauge })
    }
}

/// `g = prod_{j<=l} (z + alpha_j) * prod_{j>l} (1 + conj(alpha_j) z)`.
pub fn build_g(alphas: &[Complex64], l: usize) -> Poly {
    alphas.iter().enumerate().fold(Poly::one(), |acc, (j, &a)| {
        if j < l {
            acc.mul_linear(a, Complex64::new(1.0, 0.0))
        } else {
            acc.mul_linear(Complex64::new(1.0, 0.0), a.conj())
        }
    })
}

/// `h = prod_j (1 + conj(alpha_j) z)`.
pub fn build_h(alphas: &[Complex64]) -> Poly {
    alphas.iter().fold(Poly::one(), |acc, &a| acc.mul_linear(Complex64::new(1.0, 0.0), a.conj()))
}

/// `e_1, ..., e_n` of the given numbers.
pub fn elementary_symmetric(xs: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(1.0, 0.0)];
    for &x in xs {
        e.push(Complex64::default());
        for m in (1..e.len()).rev() {
            let prev = e[m - 1];
            e[m] += x * prev;
        }
    }
    e.remove(0);
    e
}

/// Entry `n` is `lambda g_{k-n} - conj(c_n)` where `c = h^q`, for `n = 0..=k`.
pub fn residual(sys: &FlipSystem, alphas: &[Complex64], lambda: Complex64) -> Vec<Complex64> {
    let k = sys.k;
    let g = build_g(alphas, sys.l);
    let c = series_pow(&build_h(alphas), sys.q, Truncation(k)).expect("h(0) = 1");
    let lhs = flip(&g, k).expect("deg g = k");
    let rhs = conj_reflect(&c);
    (0..=k).map(|n| lambda * lhs.coeff(n) - rhs.coeff(n)).collect()
}

pub fn residual_norm(sys: &FlipSystem, alphas: &[Complex64], lambda: Complex64) -> f64 {
    residual(sys, alphas, lambda).iter().map(|r| r.norm_sqr()).sum::<f64>().sqrt()
}

fn gauge_quantity(sys: &FlipSystem, alphas: &[Complex64]) -> Complex64 {
    match sys.gauge {
        Gauge::OuterProduct => alphas[sys.l..].iter().product(),
        Gauge::FirstAlpha => alphas[0],
    }
}

fn unpack(k: usize, x: &DVector<f64>) -> (Vec<Complex64>, Complex64) {
    let alphas = (0..k).map(|j| Complex64::new(x[j], x[k + j])).collect();
    (alphas, Complex64::new(x[2 * k], x[2 * k + 1]))
}

fn pack(alphas: &[Complex64], lambda: Complex64) -> DVector<f64> {
    let k = alphas.len();
    let mut x = DVector::zeros(2 * k + 2);
    for (j, a) in alphas.iter().enumerate() {
        x[j] = a.re;
        x[k + j] = a.im;
    }
    x[2 * k] = lambda.re;
    x[2 * k + 1] = lambda.im;
    x
}

fn real_residual(sys: &FlipSystem, x: &DVector<f64>) -> DVector<f64> {
    let k = sys.k;
    let (alphas, lambda) = unpack(k, x);
    let r = residual(sys, &alphas, lambda);
    let mut out = DVector::zeros(2 * k + 3);
    for (n, v) in r.iter().enumerate() {
        out[n] = v.re;
        out[k + 1 + n] = v.im;
    }
    out[2 * k + 2] = gauge_quantity(sys, &alphas).im;
    out
}

/// Analytic Jacobian of [`real_residual`].
///
/// With `P = prod (1 + alpha_j z)^q` the residual is `lambda flip(g) - P`; `P` is
/// holomorphic in every `alpha_j`, while `g` is holomorphic in the Blaschke
/// parameters and antiholomorphic in the outer ones. For a parameter `w = x + iy`
/// with holomorphic part `H` and antiholomorphic part `A`,
/// `d/dx = H + A` and `d/dy = i (H - A)`.
fn jacobian(sys: &FlipSystem, x: &DVector<f64>) -> DMatrix<f64> {
    let (k, l, q) = (sys.k, sys.l, sys.q);
    let (alphas, lambda) = unpack(k, x);
    let one = Complex64::new(1.0, 0.0);
    let outer = alphas.iter().fold(Poly::one(), |acc, &a| acc.mul_linear(one, a));
    let big_p = series_pow(&outer, q, Truncation(k)).expect("P(0) = 1");
    let g = build_g(&alphas, l);

    let mut jac = DMatrix::zeros(2 * k + 3, 2 * k + 2);
    let mut put = |col: usize, dr: &[Complex64]| {
        for n in 0..=k {
            jac[(n, col)] = dr[n].re;
            jac[(k + 1 + n, col)] = dr[n].im;
        }
    };

    for j in 0..k {
        let a = alphas[j];
        // P / (1 + alpha_j z), so that dP_n / d alpha_j = q D_{n-1}
        let mut d = vec![Complex64::default(); k + 1];
        for n in 0..=k {
            d[n] = big_p.coeff(n) - if n > 0 { a * d[n - 1] } else { Complex64::default() };
        }
        let others: Vec<Complex64> = alphas.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &v)| v).collect();
        let l_others = if j < l { l - 1 } else { l };
        let g_rest = build_g(&others, l_others);
        let mut hol = vec![Complex64::default(); k + 1];
        let mut anti = vec![Complex64::default(); k + 1];
        for n in 0..=k {
            hol[n] = if n > 0 { -q * d[n - 1] } else { Complex64::default() };
            if j < l {
                hol[n] += lambda * g_rest.coeff(k - n);
            } else if n < k {
                anti[n] = lambda * g_rest.coeff(k - n - 1);
            }
        }
        let dx: Vec<Complex64> = (0..=k).map(|n| hol[n] + anti[n]).collect();
        let dy: Vec<Complex64> = (0..=k).map(|n| I * (hol[n] - anti[n])).collect();
        put(j, &dx);
        put(k + j, &dy);
    }
    let dl: Vec<Complex64> = (0..=k).map(|n| g.coeff(k - n)).collect();
    put(2 * k, &dl);
    let dl: Vec<Complex64> = dl.iter().map(|v| I * v).collect();
    put(2 * k + 1, &dl);

    match sys.gauge {
        Gauge::OuterProduct => {
            for j in l..k {
                let partial: Complex64 = alphas[l..].iter().enumerate().filter(|&(i, _)| i + l != j).map(|(_, &v)| v).product();
                jac[(2 * k + 2, j)] = partial.im;
                jac[(2 * k + 2, k + j)] = partial.re;
            }
        }
        Gauge::FirstAlpha => jac[(2 * k + 2, k)] = 1.0,
    }
    jac
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    Diverged,
    LeftDomain,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Stop with [`SolveStatus::LeftDomain`] once a Blaschke parameter leaves the disc.
    pub enforce_domain: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { max_iter: 200, tol: 1e-11, enforce_domain: true }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub candidate: Option<StructuredCandidate>,
    pub iterations: usize,
    pub final_residual: f64,
    pub starts_tried: usize,
    pub status: SolveStatus,
}

fn outside_disc(sys: &FlipSystem, x: &DVector<f64>) -> bool {
    let (alphas, _) = unpack(sys.k, x);
    alphas[..sys.l].iter().any(|a| a.norm() > 1.0 + 1e-9)
}

/// Levenberg–Marquardt from a single start.
pub fn solve(sys: &FlipSystem, alphas: &[Complex64], lambda: Complex64, opts: &SolveOptions) -> SolveReport {
    assert_eq!(alphas.len(), sys.k, "need one zero parameter per degree");
    let mut x = pack(alphas, lambda);
    let mut r = real_residual(sys, &x);
    let mut cost = r.norm_squared();
    let mut mu = -1.0;
    let mut nu = 2.0;
    let mut status = SolveStatus::Diverged;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if r.norm() <= opts.tol {
            status = SolveStatus::Converged;
            break;
        }
        iterations += 1;
        let jac = jacobian(sys, &x);
        let jtj = jac.transpose() * &jac;
        let grad = jac.transpose() * &r;
        if mu < 0.0 {
            mu = 1e-3 * jtj.diagonal().max().max(1e-12);
        }
        let mut damped = jtj.clone();
        for i in 0..damped.nrows() {
            damped[(i, i)] += mu * (jtj[(i, i)] + 1e-9);
        }
        let Some(chol) = damped.cholesky() else {
            mu *= nu;
            nu *= 2.0;
            continue;
        };
        let step = -chol.solve(&grad);
        let mut trial = &x + &step;
        let mut trial_r = real_residual(sys, &trial);
        let mut trial_cost = trial_r.norm_squared();
        let predicted = -(step.dot(&grad) * 2.0 + step.dot(&(&jtj * &step)));
        let rho = (cost - trial_cost) / predicted.max(f64::MIN_POSITIVE);

        if rho > 0.0 && trial_cost.is_finite() {
            if opts.enforce_domain && outside_disc(sys, &trial) {
                trial = &x + &step * 0.5;
                trial_r = real_residual(sys, &trial);
                trial_cost = trial_r.norm_squared();
                if outside_disc(sys, &trial) || !(trial_cost < cost) {
                    x = trial;
                    r = trial_r;
                    status = SolveStatus::LeftDomain;
                    break;
                }
            }
            x = trial;
            r = trial_r;
            cost = trial_cost;
            mu *= (1.0 / 3.0f64).max(1.0 - (2.0 * rho - 1.0).powi(3));
            nu = 2.0;
        } else {
            mu *= nu;
            nu *= 2.0;
            if mu > 1e30 {
                break;
            }
        }
    }
    if status == SolveStatus::Diverged && r.norm() <= opts.tol {
        status = SolveStatus::Converged;
    }

    let final_residual = r.norm();
    let candidate = if status == SolveStatus::Converged {
        let (alphas, lambda) = unpack(sys.k, &x);
        let (alphas, lambda) = canonicalize(sys, &alphas, lambda);
        let mut c = StructuredCandidate {
            k: sys.k,
            p: sys.p,
            l: sys.l,
            alphas,
            lambda,
            value: 0.0,
            branch_label: "numeric".into(),
            rejected: None,
        };
        c.rejected = admissibility(&c);
        match candidate_value(&c) {
            Ok(v) => {
                c.value = v;
                Some(c)
            }
            Err(_) => None,
        }
    } else {
        None
    };
    SolveReport { candidate, iterations, final_residual, starts_tried: 1, status }
}

/// Why a flip-equation solution is not an admissible extremal candidate, if it is not.
pub fn admissibility(c: &StructuredCandidate) -> Option<String> {
    for (j, a) in c.alphas.iter().enumerate() {
        if j < c.l && a.norm() >= 1.0 - 1e-12 {
            return Some(format!("Blaschke parameter alpha_{} has modulus {:.6} >= 1", j + 1, a.norm()));
        }
        if j >= c.l && a.norm() > 1.0 + 1e-12 {
            return Some(format!("h vanishes inside the disc (|alpha_{}| = {:.6})", j + 1, a.norm()));
        }
    }
    None
}

fn rotate(alphas: &[Complex64], lambda: Complex64, l: usize, theta: f64) -> (Vec<Complex64>, Complex64) {
    let k = alphas.len();
    let u = Complex64::from_polar(1.0, -theta);
    (alphas.iter().map(|a| a * u).collect(), lambda * u.powi((k - l) as i32))
}

/// `[e_1..e_l of the Blaschke group, e_1..e_{k-l} of the outer group, lambda]`.
pub fn canonical_params(l: usize, alphas: &[Complex64], lambda: Complex64) -> Vec<Complex64> {
    let mut v = elementary_symmetric(&alphas[..l]);
    v.extend(elementary_symmetric(&alphas[l..]));
    v.push(lambda);
    v
}

/// Index of the lexicographically largest vector, comparing `Re`, then `Im`, of
/// each coordinate in turn and ignoring coordinates that vanish everywhere.
fn lexicographic_best(vs: &[Vec<Complex64>]) -> usize {
    let mut alive: Vec<usize> = (0..vs.len()).collect();
    let width = vs.first().map_or(0, Vec::len);
    #[allow(clippy::needless_range_loop)]
    for i in 0..width {
        for part in [|z: Complex64| z.re, |z: Complex64| z.im] {
            if alive.len() == 1 {
                return alive[0];
            }
            if alive.iter().all(|&a| vs[a][i].norm() < SIGNIFICANT) {
                continue;
            }
            let best = alive.iter().map(|&a| part(vs[a][i])).fold(f64::NEG_INFINITY, f64::max);
            alive.retain(|&a| part(vs[a][i]) >= best - SIGNIFICANT);
        }
    }
    alive[0]
}

/// Rotates into the canonical gauge: the gauge quantity real positive (hence
/// `lambda > 0` when `l < k`), remaining discrete freedom fixed by [`lexicographic_best`].
pub fn canonicalize(sys: &FlipSystem, alphas: &[Complex64], lambda: Complex64) -> (Vec<Complex64>, Complex64) {
    let (k, l) = (sys.k, sys.l);
    let thetas: Vec<f64> = match sys.gauge {
        Gauge::OuterProduct => {
            let m = (k - l) as f64;
            let arg = gauge_quantity(sys, alphas).arg();
            (0..k - l).map(|j| (arg + 2.0 * std::f64::consts::PI * j as f64) / m).collect()
        }
        Gauge::FirstAlpha => match alphas.iter().find(|a| a.norm() >= SIGNIFICANT) {
            Some(a) => vec![a.arg()],
            None => vec![0.0],
        },
    };
    let options: Vec<(Vec<Complex64>, Complex64)> = thetas.iter().map(|&t| rotate(alphas, lambda, l, t)).collect();
    let keys: Vec<Vec<Complex64>> = options.iter().map(|(a, lam)| canonical_params(l, a, *lam)).collect();
    let (mut a, mut lam) = options[lexicographic_best(&keys)].clone();
    // the gauge equation holds only to the solver tolerance; make it exact
    if sys.gauge == Gauge::OuterProduct {
        let q = gauge_quantity(sys, &a);
        let fix = rotate(&a, lam, l, q.arg() / (k - l) as f64);
        a = fix.0;
        lam = fix.1;
    }
    (a, lam)
}

fn max_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Distinct representatives of a solution once only "gauge quantity real" and
/// "first non-vanishing remaining coordinate real positive" are imposed.
pub fn raw_representatives(sys: &FlipSystem, alphas: &[Complex64], lambda: Complex64) -> usize {
    let (k, l) = (sys.k, sys.l);
    if l == k {
        return 1;
    }
    let m = k - l;
    let arg = gauge_quantity(sys, alphas).arg();
    let mut reps: Vec<Vec<Complex64>> = Vec::new();
    for j in 0..2 * m {
        let theta = (arg + std::f64::consts::PI * j as f64) / m as f64;
        let (a, lam) = rotate(alphas, lambda, l, theta);
        let outer = elementary_symmetric(&a[l..]);
        let mut rest: Vec<Complex64> = outer[..m - 1].to_vec();
        rest.extend(elementary_symmetric(&a[..l]));
        let ok = match rest.iter().find(|z| z.norm() >= SIGNIFICANT) {
            Some(z) => z.im.abs() <= SIGNIFICANT * z.norm().max(1.0) && z.re > 0.0,
            None => true,
        };
        let key = canonical_params(l, &a, lam);
        if ok && !reps.iter().any(|r| max_dist(r, &key) < DISTINCT) {
            reps.push(key);
        }
    }
    reps.len().max(1)
}

#[derive(Debug, Clone, Serialize)]
pub struct MultistartReport {
    pub system: FlipSystem,
    pub seed: u64,
    pub starts: usize,
    pub converged_starts: usize,
    pub left_domain_starts: usize,
    pub diverged_starts: usize,
    /// Distinct solutions in the canonical gauge, sorted by canonical parameters.
    pub solutions: Vec<SolveReport>,
    pub canonical_count: usize,
    /// Count under the weaker gauge of [`raw_representatives`].
    pub raw_count: usize,
}

/// Uniform starts in the disc of radius 0.95 with `lambda_0 = 1/|prod outer alpha|`
/// clipped to `[0.1, 10]`.
pub fn starting_points(sys: &FlipSystem, n_starts: usize, seed: u64) -> Vec<(Vec<Complex64>, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_starts)
        .map(|_| {
            let alphas: Vec<Complex64> = (0..sys.k)
                .map(|_| {
                    let r = 0.95 * rng.gen::<f64>().sqrt();
                    Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
                })
                .collect();
            let prod: f64 = alphas[sys.l..].iter().map(|a| a.norm()).product();
            let lambda = (1.0 / prod).clamp(0.1, 10.0);
            (alphas, Complex64::new(lambda, 0.0))
        })
        .collect()
}

pub fn solve_multistart(sys: &FlipSystem, n_starts: usize, seed: u64) -> MultistartReport {
    solve_multistart_with(sys, n_starts, seed, &SolveOptions::default())
}

pub fn solve_multistart_with(sys: &FlipSystem, n_starts: usize, seed: u64, opts: &SolveOptions) -> MultistartReport {
    let starts = starting_points(sys, n_starts, seed);
    let reports: Vec<SolveReport> = starts.par_iter().map(|(a, lam)| solve(sys, a, *lam, opts)).collect();

    let count = |s: SolveStatus| reports.iter().filter(|r| r.status == s).count();
    let mut distinct: Vec<(Vec<Complex64>, SolveReport)> = Vec::new();
    for rep in &reports {
        let Some(c) = &rep.candidate else { continue };
        let key = canonical_params(sys.l, &c.alphas, c.lambda);
        match distinct.iter_mut().find(|(k, _)| max_dist(k, &key) < DISTINCT) {
            Some((_, kept)) => {
                kept.starts_tried += 1;
                if rep.final_residual < kept.final_residual {
                    let tried = kept.starts_tried;
                    *kept = rep.clone();
                    kept.starts_tried = tried;
                }
            }
            None => distinct.push((key, rep.clone())),
        }
    }
    distinct.sort_by(|(a, _), (b, _)| {
        a.iter()
            .zip(b)
            .flat_map(|(x, y)| [x.re.total_cmp(&y.re), x.im.total_cmp(&y.im)])
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let raw_count = distinct
        .iter()
        .map(|(_, r)| {
            let c = r.candidate.as_ref().expect("kept reports carry a candidate");
            raw_representatives(sys, &c.alphas, c.lambda)
        })
        .sum();
    let solutions: Vec<SolveReport> = distinct.into_iter().map(|(_, r)| r).collect();
    MultistartReport {
        system: *sys,
        seed,
        starts: n_starts,
        converged_starts: count(SolveStatus::Converged),
        left_domain_starts: count(SolveStatus::LeftDomain),
        diverged_starts: count(SolveStatus::Diverged),
        canonical_count: solutions.len(),
        raw_count,
        solutions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn symmetric_functions() {
        let e = elementary_symmetric(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        assert_eq!(e, vec![c(6.0, 0.0), c(11.0, 0.0), c(6.0, 0.0)]);
        assert!(elementary_symmetric(&[]).is_empty());
    }

    #[test]
    fn monomial_solution_has_zero_residual() {
        for (k, p) in [(1, 0.3), (3, 0.5), (5, 0.9)] {
            let sys = FlipSystem::new(k, p, k).unwrap();
            let r = residual(&sys, &vec![Complex64::default(); k], c(1.0, 0.0));
            assert!(r.iter().all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn k2_l0_at_half() {
        // beta = sqrt(2/3), product 1/3, lambda = 3
        let sys = FlipSystem::new(2, 0.5, 0).unwrap();
        let b = (2.0f64 / 3.0).sqrt();
        let disc = (b * b - 4.0 / 3.0).abs().sqrt();
        let alphas = [c(b / 2.0, disc / 2.0), c(b / 2.0, -disc / 2.0)];
        assert!(residual_norm(&sys, &alphas, c(3.0, 0.0)) < 1e-14);
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences() {
        for (k, l, p) in [(2, 0, 0.5), (3, 1, 0.6), (3, 2, 0.35), (4, 4, 0.8), (1, 0, 0.2)] {
            let sys = FlipSystem::new(k, p, l).unwrap();
            let x = DVector::from_iterator(2 * k + 2, (0..2 * k + 2).map(|i| 0.3 * ((i as f64 * 1.7).sin())));
            let jac = jacobian(&sys, &x);
            let h = 1e-6;
            for col in 0..2 * k + 2 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[col] += h;
                xm[col] -= h;
                let fd = (real_residual(&sys, &xp) - real_residual(&sys, &xm)) / (2.0 * h);
                let err = (fd - jac.column(col)).amax();
                assert!(err < 1e-7, "k={k} l={l} column {col}: {err}");
            }
        }
    }

    #[test]
    fn converges_near_known_root() {
        let sys = FlipSystem::new(2, 0.5, 0).unwrap();
        let rep = solve(&sys, &[c(0.4, 0.6), c(0.45, -0.55)], c(2.8, 0.1), &SolveOptions::default());
        assert_eq!(rep.status, SolveStatus::Converged);
        assert!(rep.iterations <= 10, "{} iterations", rep.iterations);
        let cand = rep.candidate.unwrap();
        let e = elementary_symmetric(&cand.alphas);
        assert!((e[0] - c((2.0f64 / 3.0).sqrt(), 0.0)).norm() < 1e-10);
        assert!((e[1] - c(1.0 / 3.0, 0.0)).norm() < 1e-10);
        assert!((cand.lambda - c(3.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn all_blaschke_start_goes_to_monomial() {
        let sys = FlipSystem::new(3, 2.0 / 3.0, 3).unwrap();
        let rep = solve(&sys, &[c(0.01, 0.0), c(0.01, 0.0), c(0.01, 0.0)], c(1.0, 0.0), &SolveOptions::default());
        assert_eq!(rep.status, SolveStatus::Converged);
        let cand = rep.candidate.unwrap();
        assert!(cand.alphas.iter().all(|a| a.norm() < 1e-8));
        assert!((cand.lambda - 1.0).norm() < 1e-10);
    }

    #[test]
    fn canonical_form_is_rotation_invariant() {
        let sys = FlipSystem::new(3, 2.0 / 3.0, 1).unwrap();
        let alphas = [c(0.3, 0.2), c(-0.1, 0.5), c(0.4, -0.3)];
        let lambda = c(1.2, 0.7);
        let (a0, l0) = canonicalize(&sys, &alphas, lambda);
        for theta in [0.3, 1.9, -2.5] {
            let (a, lam) = rotate(&alphas, lambda, 1, theta);
            let (a1, l1) = canonicalize(&sys, &a, lam);
            let d = max_dist(&canonical_params(1, &a0, l0), &canonical_params(1, &a1, l1));
            assert!(d < 1e-12, "theta {theta}: {d}");
        }
    }

    #[test]
    fn multistart_is_deterministic() {
        let sys = FlipSystem::new(2, 0.5, 1).unwrap();
        let a = solve_multistart(&sys, 20, 7);
        let b = solve_multistart(&sys, 20, 7);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
