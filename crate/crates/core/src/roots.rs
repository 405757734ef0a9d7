//! All roots of a complex polynomial by Aberth–Ehrlich iteration.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::Poly;

const ZERO_COEFF: f64 = 1e-300;
const MAX_ITER: usize = 2000;

/// Returns every root of `pol`, repeated according to multiplicity.
///
/// Coefficients with modulus below `1e-300` are treated as exact zeros, so a
/// trailing zero lowers the degree and a leading one contributes a root at 0.
pub fn roots(pol: &Poly) -> Result<Vec<Complex64>> {
    let c = pol.coeffs();
    let Some(top) = c.iter().rposition(|x| x.norm() > ZERO_COEFF) else {
        return Err(Error::DegenerateInput("all coefficients vanish".into()));
    };
    let low = c.iter().position(|x| x.norm() > ZERO_COEFF).unwrap_or(top);
    let mut out = vec![Complex64::default(); low];
    let core: Vec<Complex64> = c[low..=top].to_vec();
    out.extend(aberth(&core));
    Ok(out)
}

/// Value and derivative by Horner's scheme.
fn horner2(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::default();
    let mut dp = Complex64::default();
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

fn aberth(c: &[Complex64]) -> Vec<Complex64> {
    let d = c.len() - 1;
    match d {
        0 => return Vec::new(),
        1 => return vec![-c[0] / c[1]],
        _ => {}
    }
    // start on a circle whose radius is the geometric mean of the root moduli
    let radius = (c[0].norm() / c[d].norm()).powf(1.0 / d as f64).max(1e-3);
    let mut w: Vec<Complex64> =
        (0..d).map(|j| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * j as f64 / d as f64 + 0.4)).collect();

    for _ in 0..MAX_ITER {
        let mut max_rel = 0.0f64;
        for i in 0..d {
            let (p, dp) = horner2(c, w[i]);
            if p == Complex64::default() {
                continue;
            }
            let newton = p / dp;
            let repulsion: Complex64 = (0..d).filter(|&j| j != i).map(|j| 1.0 / (w[i] - w[j])).sum();
            let corr = newton / (1.0 - newton * repulsion);
            if corr.is_finite() {
                w[i] -= corr;
                max_rel = max_rel.max(corr.norm() / w[i].norm().max(1e-12));
            }
        }
        if max_rel < 1e-15 {
            break;
        }
    }
    for z in &mut w {
        polish(c, z);
    }
    w
}

/// A few guarded Newton steps; a step is kept only if it lowers |p|.
fn polish(c: &[Complex64], z: &mut Complex64) {
    let mut best = horner2(c, *z).0.norm();
    for _ in 0..3 {
        let (p, dp) = horner2(c, *z);
        if dp == Complex64::default() {
            return;
        }
        let cand = *z - p / dp;
        let val = horner2(c, cand).0.norm();
        if val < best {
            best = val;
            *z = cand;
        } else {
            return;
        }
    }
}
