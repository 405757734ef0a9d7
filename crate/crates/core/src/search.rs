//! Brute-force lower bounds for `C(k, p)`: a simplex search over the structured
//! family and a quasi-Newton search over free polynomials.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::closed_form_c;
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::hardy::{h2_norm_sq, hp_norm, pairwise_sum, zeros_in_closed_disc, FactoredFunction};
use crate::nelder_mead::{minimize, NelderMeadOptions};
use crate::series::{eval, series_pow, Poly, Truncation};
use crate::solver::{build_g, build_h};

pub const DEFAULT_SEED: u64 = 20_240_601;
const RADIAL_CLAMP: f64 = 1.0 - 1e-6;
const POLY_GRID: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Structured,
    Polynomial,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchSettings {
    pub starts: usize,
    /// Objective evaluations per start (simplex) or iterations per start (quasi-Newton).
    pub max_evals: usize,
    pub seed: u64,
    pub quad_tol: f64,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self { starts: 64, max_evals: 20_000, seed: DEFAULT_SEED, quad_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub objective: f64,
    /// Zero parameters in structured mode, polynomial coefficients otherwise.
    pub params: Vec<Complex64>,
    pub mode: SearchMode,
    pub k: usize,
    pub p: f64,
    pub l: Option<usize>,
    pub starts: usize,
    pub evals: usize,
    pub seed: u64,
}

fn check(k: usize, p: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p = {p} outside (0, 1)")));
    }
    Ok(())
}

fn start_rng(seed: u64, start: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start as u64);
    rng
}

fn clamp_alphas(x: &[f64]) -> Vec<Complex64> {
    let k = x.len() / 2;
    (0..k)
        .map(|j| {
            let a = Complex64::new(x[2 * j], x[2 * j + 1]);
            if a.norm() > RADIAL_CLAMP {
                a * (RADIAL_CLAMP / a.norm())
            } else {
                a
            }
        })
        .collect()
}

/// `a_k` of the normalized member of the structured family with these zero parameters.
pub fn structured_coefficient(k: usize, p: f64, l: usize, alphas: &[Complex64]) -> Complex64 {
    let g = build_g(alphas, l);
    let h = build_h(alphas);
    let c = series_pow(&h, 2.0 / p - 1.0, Truncation(k)).expect("h(0) = 1");
    let s: Complex64 = (0..=k).map(|j| g.coeff(j) * c.coeff(k - j)).sum();
    s * h2_norm_sq(&h).powf(-1.0 / p)
}

fn lexicographic(a: &[Complex64], b: &[Complex64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| [x.re.total_cmp(&y.re), x.im.total_cmp(&y.im)])
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Best of several `(objective, params)` pairs under a fixed total order.
fn best_of(mut runs: Vec<(f64, Vec<Complex64>, usize)>) -> (f64, Vec<Complex64>, usize) {
    let evals = runs.iter().map(|r| r.2).sum();
    runs.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| lexicographic(&a.1, &b.1)));
    let (obj, params, _) = runs.swap_remove(0);
    (obj, params, evals)
}

/// Maximizes `|a_k|` over the structured family for fixed `l`, then rotates the
/// maximizer so that `a_k` is real positive.
pub fn structured_search(k: usize, p: f64, l: usize, settings: &SearchSettings) -> Result<SearchResult> {
    check(k, p)?;
    if l > k {
        return Err(Error::Domain(format!("l = {l} exceeds k = {k}")));
    }
    let opts = NelderMeadOptions { max_evals: settings.max_evals, ..Default::default() };
    let runs: Vec<(f64, Vec<Complex64>, usize)> = (0..settings.starts.max(1))
        .into_par_iter()
        .map(|s| {
            let mut rng = start_rng(settings.seed, s);
            let x0: Vec<f64> = (0..k)
                .flat_map(|_| {
                    let a = Complex64::from_polar(0.95 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
                    [a.re, a.im]
                })
                .collect();
            let r = minimize(|x| -structured_coefficient(k, p, l, &clamp_alphas(x)).norm(), &x0, &opts);
            (-r.f, clamp_alphas(&r.x), r.evals)
        })
        .collect();
    let (_, mut alphas, evals) = best_of(runs);

    let a_k = structured_coefficient(k, p, l, &alphas);
    if l < k && a_k.norm() > 0.0 {
        let u = Complex64::from_polar(1.0, a_k.arg() / (k - l) as f64);
        alphas.iter_mut().for_each(|a| *a *= u);
    }
    let objective = structured_coefficient(k, p, l, &alphas).re.max(0.0);
    Ok(SearchResult {
        objective,
        params: alphas,
        mode: SearchMode::Structured,
        k,
        p,
        l: Some(l),
        starts: settings.starts.max(1),
        evals,
        seed: settings.seed,
    })
}

/// `Re a_k / ||f||_p` on a fixed grid, with its gradient in the real coordinates
/// `(Re a_0..Re a_m, Im a_0..Im a_m)`.
struct GridObjective {
    k: usize,
    p: f64,
    nodes: Vec<Complex64>,
}

impl GridObjective {
    fn new(k: usize, p: f64) -> Self {
        let nodes = (0..POLY_GRID).map(|j| Complex64::from_polar(1.0, TAU * j as f64 / POLY_GRID as f64)).collect();
        Self { k, p, nodes }
    }

    fn value_grad(&self, x: &DVector<f64>) -> (f64, DVector<f64>) {
        let m1 = x.len() / 2;
        let coeffs: Vec<Complex64> = (0..m1).map(|n| Complex64::new(x[n], x[m1 + n])).collect();
        let pol = Poly::new(coeffs);
        let p = self.p;
        let per_node: Vec<(f64, Complex64, f64)> = self
            .nodes
            .iter()
            .map(|&z| {
                let f = eval(&pol, z);
                let m = f.norm();
                (m.powf(p), f.conj(), if m > 0.0 { m.powf(p - 2.0) } else { 0.0 })
            })
            .collect();
        let total = POLY_GRID as f64;
        let mean = pairwise_sum(&per_node.iter().map(|t| t.0).collect::<Vec<_>>()) / total;
        let norm = mean.powf(1.0 / p);
        let re_ak = pol.coeff(self.k).re;
        let value = re_ak / norm;

        // G_n = mean(|f|^{p-2} conj(f) z^n); dM/dRe a_n = p Re G_n, dM/dIm a_n = -p Im G_n
        let mut grad = DVector::zeros(2 * m1);
        let dnorm = norm / (p * mean);
        for n in 0..m1 {
            let g: Complex64 =
                self.nodes.iter().zip(&per_node).map(|(&z, &(_, fbar, w))| fbar * w * z.powu(n as u32)).sum::<Complex64>() / total;
            let (dmx, dmy) = (p * g.re, -p * g.im);
            grad[n] = -re_ak * dnorm * dmx / (norm * norm);
            grad[m1 + n] = -re_ak * dnorm * dmy / (norm * norm);
        }
        grad[self.k] += 1.0 / norm;
        (value, grad)
    }
}

/// BFGS ascent with Armijo backtracking.
fn bfgs_maximize(obj: &GridObjective, x0: DVector<f64>, max_iter: usize) -> (DVector<f64>, f64, usize) {
    let n = x0.len();
    let mut x = x0;
    let (mut fx, mut gx) = obj.value_grad(&x);
    let mut hinv = DMatrix::<f64>::identity(n, n);
    let mut evals = 1;
    for _ in 0..max_iter {
        if gx.norm() < 1e-12 || !fx.is_finite() {
            break;
        }
        let mut dir = &hinv * &gx;
        if dir.dot(&gx) <= 0.0 {
            hinv = DMatrix::identity(n, n);
            dir = gx.clone();
        }
        let slope = dir.dot(&gx);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xt = &x + &dir * t;
            let (ft, gt) = obj.value_grad(&xt);
            evals += 1;
            if ft.is_finite() && ft >= fx + 1e-4 * t * slope {
                accepted = Some((xt, ft, gt));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else { break };
        let s = &xn - &x;
        let y = &gx - &gnew;
        let sy = s.dot(&y);
        if sy > 1e-16 {
            let rho = 1.0 / sy;
            let hy = &hinv * &y;
            let yhy = y.dot(&hy);
            hinv += (&s * s.transpose()) * (rho * rho * yhy + rho) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        let done = (fnew - fx).abs() <= 1e-15 * fnew.abs().max(1.0);
        // the objective is scale invariant; keep iterates on the unit sphere
        let scale = xn.norm();
        x = xn / scale;
        hinv *= 1.0 / (scale * scale);
        fx = fnew;
        gx = gnew * scale;
        if done {
            break;
        }
    }
    (x, fx, evals)
}

/// Maximizes `Re a_k / ||f||_{H^p}` over polynomials of degree `m`; a lower
/// bound for `C(k, p)` that does not use the structure of extremals.
pub fn polynomial_search(k: usize, p: f64, m: usize, settings: &SearchSettings) -> Result<SearchResult> {
    check(k, p)?;
    let mut result = SearchResult {
        objective: 0.0,
        params: vec![Complex64::new(1.0, 0.0)],
        mode: SearchMode::Polynomial,
        k,
        p,
        l: None,
        starts: settings.starts.max(1),
        evals: 0,
        seed: settings.seed,
    };
    if m < k {
        return Ok(result);
    }
    let obj = GridObjective::new(k, p);
    let runs: Vec<(Result<f64>, Vec<Complex64>, usize)> = (0..settings.starts.max(1))
        .into_par_iter()
        .map(|s| {
            let mut rng = start_rng(settings.seed, s);
            let mut x0: DVector<f64> = DVector::from_fn(2 * (m + 1), |_, _| rng.gen_range(-1.0..1.0));
            x0[k] = x0[k].abs() + 0.5;
            let x0 = x0.normalize();
            let (x, _, evals) = bfgs_maximize(&obj, x0, settings.max_evals);
            let coeffs: Vec<Complex64> = (0..=m).map(|n| Complex64::new(x[n], x[m + 1 + n])).collect();
            let pol = Poly::new(coeffs.clone());
            let value = hp_norm(&FactoredFunction::polynomial(pol), p, settings.quad_tol).map(|est| coeffs[k].re / est.value);
            (value, coeffs, evals)
        })
        .collect();
    let evals = runs.iter().map(|r| r.2).sum();
    let mut first_err = None;
    let mut ok = Vec::new();
    for (value, coeffs, e) in runs {
        match value {
            Ok(v) => ok.push((v, coeffs, e)),
            Err(err) => {
                first_err.get_or_insert(err);
            }
        }
    }
    if ok.is_empty() {
        return Err(first_err.expect("at least one start"));
    }
    let (objective, params, _) = best_of(ok);
    result.objective = objective.max(0.0);
    result.params = params;
    result.evals = evals;
    Ok(result)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub k: usize,
    pub p: f64,
    pub best_l: usize,
    pub best_value: f64,
    pub closed_form: Option<f64>,
    /// `best_value - closed_form`.
    pub gap: Option<f64>,
    /// The winning extremal has no zero in the open disc.
    pub zero_free: bool,
    /// The winning extremal does not vanish at the origin.
    pub a0_nonzero: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Anomaly {
    pub k: usize,
    pub p: f64,
    pub kind: String,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    /// Rows where the extremal vanishes in the disc or C(k, p) fails to grow with k.
    pub anomalies: Vec<Anomaly>,
}

fn scan_row(k: usize, p: Exponent, settings: &SearchSettings) -> Result<ScanRow> {
    let pv = p.value();
    let mut best: Option<SearchResult> = None;
    for l in 0..=k {
        let r = structured_search(k, pv, l, settings)?;
        if best.as_ref().is_none_or(|b| r.objective > b.objective + 1e-9) {
            best = Some(r);
        }
    }
    let best = best.expect("l = 0 is always searched");
    let l = best.l.expect("structured");
    let g = build_g(&best.params, l);
    let h = build_h(&best.params);
    let inside = |pol: &Poly| -> Result<bool> { Ok(!zeros_in_closed_disc(pol, -1e-9)?.is_empty()) };
    let zero_free = !(inside(&g)? || inside(&h)?);
    let closed_form = closed_form_c(k, p);
    Ok(ScanRow {
        k,
        p: pv,
        best_l: l,
        best_value: best.objective,
        closed_form,
        gap: closed_form.map(|c| best.objective - c),
        zero_free,
        a0_nonzero: g.coeff(0).norm() > 1e-8,
    })
}

/// One row per `(k, p)` with `k = 1..=k_max`, plus anomaly reports.
pub fn scan(k_max: usize, p_grid: &[Exponent], settings: &SearchSettings) -> Result<ScanReport> {
    let cells: Vec<(usize, Exponent)> = p_grid.iter().flat_map(|&p| (1..=k_max).map(move |k| (k, p))).collect();
    let mut rows: Vec<ScanRow> = cells.par_iter().map(|&(k, p)| scan_row(k, p, settings)).collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.k.cmp(&b.k).then(a.p.total_cmp(&b.p)));
    let anomalies = anomalies(&rows);
    Ok(ScanReport { rows, anomalies })
}

/// Rows that contradict the expected shape of the extremals or growth in `k`.
pub fn anomalies(rows: &[ScanRow]) -> Vec<Anomaly> {
    let mut anomalies = Vec::new();
    for r in rows {
        if r.best_l != 0 {
            anomalies.push(Anomaly { k: r.k, p: r.p, kind: "best_l".into(), detail: format!("maximum attained at l = {}", r.best_l) });
        }
        if !r.zero_free {
            anomalies.push(Anomaly { k: r.k, p: r.p, kind: "vanishing".into(), detail: "winning extremal vanishes in the disc".into() });
        }
        if !r.a0_nonzero {
            anomalies.push(Anomaly { k: r.k, p: r.p, kind: "origin".into(), detail: "winning extremal vanishes at 0".into() });
        }
    }
    for hi in rows {
        let Some(lo) = rows.iter().find(|r| r.p == hi.p && r.k + 1 == hi.k) else {
            continue;
        };
        if !(hi.best_value > lo.best_value) {
            anomalies.push(Anomaly {
                k: hi.k,
                p: hi.p,
                kind: "monotonicity".into(),
                detail: format!("C({}, p) ~ {} is not above C({}, p) ~ {}", hi.k, hi.best_value, lo.k, lo.best_value),
            });
        }
    }
    anomalies
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SearchSettings {
        SearchSettings { starts: 8, max_evals: 4000, ..Default::default() }
    }

    #[test]
    fn anomaly_detection() {
        let row = |k, p, best_l, best_value, zero_free| ScanRow {
            k,
            p,
            best_l,
            best_value,
            closed_form: None,
            gap: None,
            zero_free,
            a0_nonzero: true,
        };
        let rows = [row(1, 0.5, 0, 1.3, true), row(1, 0.7, 0, 1.2, true), row(2, 0.5, 1, 1.2, true), row(2, 0.7, 0, 1.25, false)];
        let kinds: Vec<(usize, f64, String)> = anomalies(&rows).into_iter().map(|a| (a.k, a.p, a.kind)).collect();
        assert_eq!(kinds, vec![(2, 0.5, "best_l".into()), (2, 0.7, "vanishing".into()), (2, 0.5, "monotonicity".into())]);
    }

    #[test]
    fn structured_k1() {
        let r = structured_search(1, 0.5, 0, &quick()).unwrap();
        assert!((r.objective - 2.0 * 0.75f64.powf(1.5)).abs() < 1e-9, "{}", r.objective);
        // l = 1: (1 + q t) / (1 + t)^{1/p} with t = |alpha|^2 peaks at t = 1/q
        let r = structured_search(1, 0.3, 1, &quick()).unwrap();
        assert!((r.objective - 2.0 * 0.85f64.powf(1.0 / 0.3)).abs() < 1e-9, "{}", r.objective);
    }

    #[test]
    fn grid_gradient_matches_finite_differences() {
        let obj = GridObjective::new(2, 0.6);
        let x = DVector::from_fn(8, |i, _| 0.2 + 0.1 * (i as f64 * 1.3).sin());
        let (_, g) = obj.value_grad(&x);
        for i in 0..8 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += 1e-6;
            xm[i] -= 1e-6;
            let fd = (obj.value_grad(&xp).0 - obj.value_grad(&xm).0) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-6, "{i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn degenerate_degree() {
        let r = polynomial_search(1, 0.5, 0, &quick()).unwrap();
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn deterministic() {
        let a = structured_search(2, 0.4, 1, &quick()).unwrap();
        let b = structured_search(2, 0.4, 1, &quick()).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }
}
