//! Self-check suites run by `hpx verify`.

use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::bounds::{self, closed_form_c};
use crate::candidates::{
    candidates_k1, candidates_k2, candidates_k3_p23, cubic_xi_roots, extremal_coefficient, extremal_function, phi, psi,
    variational_defects, CandidateTable,
};
use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::fejer_riesz::{modulus_squared, spectral_factor, TrigPoly};
use crate::hardy::{check_norm_identities, hp_norm};
use crate::search::{polynomial_search, structured_search, SearchSettings};
use crate::series::Poly;
use crate::solver::{canonical_params, canonicalize, solve_multistart, FlipSystem};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    ReferenceValues,
    Identities,
    Oracle,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-values" => Ok(Self::ReferenceValues),
            "identities" => Ok(Self::Identities),
            "oracle" => Ok(Self::Oracle),
            "all" => Ok(Self::All),
            _ => Err(Error::Parse { input: s.into(), reason: "expected paper-values, identities, oracle or all".into() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Small,
    Full,
}

impl FromStr for Budget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small" => Ok(Self::Small),
            "full" => Ok(Self::Full),
            _ => Err(Error::Parse { input: s.into(), reason: "expected small or full".into() }),
        }
    }
}

/// `p = 0.1, 0.2, ..., 0.9`.
pub fn p_grid() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

/// Four decimals by truncation.
pub fn four_decimals(x: f64) -> String {
    format!("{:.4}", (x * 1e4).trunc() / 1e4)
}

/// True when `x` quoted to four decimals, truncated or rounded, reads `quoted`.
pub fn agrees_to_4_decimals(x: f64, quoted: &str) -> bool {
    four_decimals(x) == quoted || format!("{x:.4}") == quoted
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.0.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    fn push_result(&mut self, name: &str, r: Result<(bool, String)>) {
        match r {
            Ok((ok, detail)) => self.push(name, ok, detail),
            Err(e) => self.push(name, false, e.to_string()),
        }
    }
}

fn tables() -> Result<Vec<CandidateTable>> {
    let mut out = Vec::new();
    for p in p_grid() {
        out.push(candidates_k1(p)?);
        out.push(candidates_k2(p)?);
    }
    out.push(candidates_k3_p23()?);
    Ok(out)
}

fn reference_values(c: &mut Checks) {
    c.push_result(
        "closed forms k = 1, 2 match the candidate tables",
        (|| {
            let mut worst = 0.0f64;
            for p in p_grid() {
                for (k, t) in [(1, candidates_k1(p)?), (2, candidates_k2(p)?)] {
                    let cf = closed_form_c(k, p).expect("k <= 2");
                    worst = worst.max((t.best().value - cf).abs() / cf);
                }
            }
            Ok((worst <= 1e-12, format!("max relative difference {worst:.2e}")))
        })(),
    );
    let c3 = closed_form_c(3, Exponent::from_ratio(2, 3).expect("nonzero")).unwrap_or(f64::NAN);
    c.push("C(3, 2/3) quoted as 1.4973", agrees_to_4_decimals(c3, "1.4973"), format!("{c3:.12}"));
    c.push_result(
        "k = 3, p = 2/3 table decimals",
        (|| {
            let t = candidates_k3_p23()?;
            let want = ["1.4973", "1.2587", "1.1958", "1.1547", "1.1547", "1.1067", "1.0739", "1.0573", "1.0000"];
            let ok = t.entries.len() == want.len()
                && t.entries.iter().zip(want).all(|(e, w)| agrees_to_4_decimals(e.value, w))
                && t.best().branch_label.starts_with("l=0");
            let got: Vec<String> = t.entries.iter().map(|e| format!("{:.6}", e.value)).collect();
            Ok((ok, got.join(", ")))
        })(),
    );
    let roots = cubic_xi_roots().map(|r| r.1);
    let ok = roots.iter().zip(["-0.2049", "0.6281", "0.7768"]).all(|(&r, w)| agrees_to_4_decimals(r, w));
    c.push("cubic roots -0.2049, 0.6281, 0.7768", ok, format!("{roots:?}"));
    let d = bounds::dual_bound(3, 2.0 / 3.0);
    c.push("dual bound 16/(3 pi) = 1.6976", agrees_to_4_decimals(d, "1.6976"), format!("{d:.12}"));
}

fn identities(c: &mut Checks) {
    c.push_result(
        "flip-equation residuals of all closed-form candidates",
        (|| {
            let mut worst = 0.0f64;
            for t in tables()? {
                for e in &t.entries {
                    worst = worst.max(e.residual()?);
                }
            }
            Ok((worst <= 1e-9, format!("max residual {worst:.2e}")))
        })(),
    );
    c.push_result(
        "norm identities, Taylor coefficient and variational identity at the best candidates",
        (|| {
            let (mut norm_err, mut pars_err, mut coef_err, mut var_err) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            for t in tables()? {
                let b = t.best();
                let f = extremal_function(b)?;
                norm_err = norm_err.max((hp_norm(&f, b.p, 1e-13)?.value - 1.0).abs());
                let rep = check_norm_identities(&f, b.p, 1e-8)?;
                pars_err = pars_err.max(rep.residual_h).max(rep.residual_g.unwrap_or(0.0));
                let cf = closed_form_c(b.k, Exponent::from_f64(b.p)).unwrap_or(b.value);
                coef_err = coef_err.max((extremal_coefficient(b)? - Complex64::new(cf, 0.0)).norm());
                var_err = variational_defects(b, b.k + 2)?.into_iter().fold(var_err, f64::max);
            }
            let ok = norm_err <= 1e-7 && pars_err <= 1e-8 && coef_err <= 1e-9 && var_err <= 1e-7;
            Ok((ok, format!("norm {norm_err:.1e}, parseval {pars_err:.1e}, a_k {coef_err:.1e}, variational {var_err:.1e}")))
        })(),
    );
    let worst = p_grid().into_iter().map(|p| (bounds::c2(p) - bounds::c1(p).powi(2)).abs() / bounds::c2(p)).fold(0.0, f64::max);
    c.push("C(2, p) = C(1, p)^2", worst <= 1e-10, format!("max relative difference {worst:.2e}"));
    c.push_result(
        "bounds sandwich",
        (|| {
            let mut cells: Vec<(usize, Exponent)> = Vec::new();
            for k in 1..=3 {
                cells.extend(p_grid().into_iter().map(|p| (k, Exponent::from_f64(p))));
            }
            cells.push((3, Exponent::from_ratio(2, 3)?));
            for (k, p) in &cells {
                bounds::report(*k, *p)?;
            }
            let d = p_grid().into_iter().map(|p| (bounds::dual_bound(2, p) * p - 1.0).abs()).fold(0.0, f64::max);
            Ok((d <= 1e-12, format!("{} cells ordered, |p dual(2, p) - 1| <= {d:.1e}", cells.len())))
        })(),
    );
    c.push_result(
        "spectral factorization",
        (|| {
            let q = TrigPoly::from_half(&[Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)])?;
            let err = spectral_factor(&q, 1e-12)?.max_abs_diff(&Poly::from_real(&[1.0, 1.0]));
            let mut worst = 0.0f64;
            for t in tables()? {
                let h = crate::solver::build_h(&t.best().alphas);
                worst = worst.max(spectral_factor(&modulus_squared(&h), 1e-12)?.max_abs_diff(&h));
            }
            Ok((err <= 1e-8 && worst <= 1e-9, format!("2 + 2 cos: {err:.1e}, extremal h: {worst:.1e}")))
        })(),
    );
    c.push_result(
        "comparison functions",
        (|| {
            let n = 10_000;
            let grid: Vec<f64> = (0..n).map(|i| 1000f64.powf(i as f64 / (n - 1) as f64)).collect();
            let phis = grid.iter().map(|&q| phi(q)).collect::<Result<Vec<_>>>()?;
            let monotone = phis.windows(2).all(|w| w[1] >= w[0]);
            let psi_pos = grid[1..].iter().map(|&q| psi(q)).collect::<Result<Vec<_>>>()?.iter().all(|&v| v > 0.0);
            let phi1 = phi(1.0)?;
            Ok(((phi1 - 1.0).abs() <= 1e-12 && monotone && psi_pos, format!("Phi(1) = {phi1}, monotone {monotone}, Psi > 0 {psi_pos}")))
        })(),
    );
}

fn oracle(c: &mut Checks, budget: Budget) {
    let (settings, grid, starts, poly) = match budget {
        Budget::Small => (
            SearchSettings { starts: 8, max_evals: 6000, ..Default::default() },
            vec![0.25, 0.5, 0.75],
            50,
            SearchSettings { starts: 4, max_evals: 1500, ..Default::default() },
        ),
        Budget::Full => (SearchSettings::default(), p_grid(), 200, SearchSettings { starts: 16, max_evals: 2000, ..Default::default() }),
    };
    c.push_result(
        "structured search reaches the closed forms",
        (|| {
            let mut worst = 0.0f64;
            let mut cells: Vec<(usize, Exponent)> = grid.iter().map(|&p| (2, Exponent::from_f64(p))).collect();
            cells.push((3, Exponent::from_ratio(2, 3)?));
            for (k, p) in cells {
                let mut best = 0.0f64;
                for l in 0..=k {
                    best = best.max(structured_search(k, p.value(), l, &settings)?.objective);
                }
                worst = worst.max((best - closed_form_c(k, p).expect("closed form")).abs());
            }
            Ok((worst <= 1e-7, format!("max gap {worst:.1e}")))
        })(),
    );
    c.push_result(
        "polynomial search reaches the closed forms",
        (|| {
            let a = polynomial_search(2, 0.5, 8, &poly)?.objective;
            let b = polynomial_search(3, 2.0 / 3.0, 9, &poly)?.objective;
            let ok = (a - 27.0 / 16.0).abs() <= 1e-4 && (b - bounds::c3_two_thirds()).abs() <= 1e-3;
            Ok((ok, format!("k = 2: {a:.8}, k = 3: {b:.8}")))
        })(),
    );
    c.push_result(
        "multistart solver recovers every admissible branch and nothing else",
        (|| {
            let mut tabs = vec![candidates_k2(0.5)?, candidates_k3_p23()?];
            if budget == Budget::Full {
                tabs.extend(grid.iter().map(|&p| candidates_k2(p)).collect::<Result<Vec<_>>>()?);
            }
            let mut failures = Vec::new();
            for t in &tabs {
                for l in 0..=t.k {
                    let sys = FlipSystem::new(t.k, t.p, l)?;
                    let want: Vec<Vec<Complex64>> = t
                        .for_l(l)
                        .filter(|e| e.is_admissible())
                        .map(|e| {
                            let (a, lam) = canonicalize(&sys, &e.alphas, e.lambda);
                            canonical_params(l, &a, lam)
                        })
                        .collect();
                    let got = solve_multistart(&sys, starts, crate::search::DEFAULT_SEED);
                    let keys: Vec<Vec<Complex64>> = got
                        .solutions
                        .iter()
                        .filter_map(|s| s.candidate.as_ref())
                        .filter(|c| c.is_admissible())
                        .map(|c| canonical_params(l, &c.alphas, c.lambda))
                        .collect();
                    if !same_sets(&want, &keys, 1e-8) {
                        failures.push(format!("k={} p={} l={}: expected {}, found {}", t.k, t.p, l, want.len(), keys.len()));
                    }
                }
            }
            Ok((failures.is_empty(), if failures.is_empty() { "all cases match".into() } else { failures.join("; ") }))
        })(),
    );
}

/// Every element of `a` has a partner in `b` within `tol` and vice versa.
pub fn same_sets(a: &[Vec<Complex64>], b: &[Vec<Complex64>], tol: f64) -> bool {
    let close = |x: &Vec<Complex64>, y: &Vec<Complex64>| x.iter().zip(y).all(|(u, v)| (u - v).norm() <= tol);
    a.iter().all(|x| b.iter().any(|y| close(x, y))) && b.iter().all(|y| a.iter().any(|x| close(x, y)))
}

pub fn run(suite: Suite, budget: Budget) -> SuiteReport {
    let mut c = Checks::default();
    let name = match suite {
        Suite::ReferenceValues => "paper-values",
        Suite::Identities => "identities",
        Suite::Oracle => "oracle",
        Suite::All => "all",
    };
    if matches!(suite, Suite::ReferenceValues | Suite::All) {
        reference_values(&mut c);
    }
    if matches!(suite, Suite::Identities | Suite::All) {
        identities(&mut c);
    }
    if matches!(suite, Suite::Oracle | Suite::All) {
        oracle(&mut c, budget);
    }
    let passed = c.0.iter().all(|x| x.passed);
    SuiteReport { suite: name.into(), passed, checks: c.0 }
}
