//! Nelder–Mead simplex minimization with restarts on stall.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    pub initial_scale: f64,
    /// Stop a round once the simplex values spread less than this.
    pub ftol: f64,
    /// Stop a round once every vertex lies this close to the best one.
    pub xtol: f64,
    /// Number of reinitializations around the incumbent, each at a tenth of the previous scale.
    pub max_restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_evals: 20_000, initial_scale: 0.1, ftol: 1e-15, xtol: 1e-10, max_restarts: 6 }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub restarts: usize,
}

pub fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut best_x = x0.to_vec();
    let mut best_f = eval(&best_x, &mut evals);
    if n == 0 {
        return NelderMeadResult { x: best_x, f: best_f, evals, restarts: 0 };
    }
    let mut scale = opts.initial_scale;
    let mut restarts = 0;

    loop {
        let before = best_f;
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((best_x.clone(), best_f));
        for i in 0..n {
            let mut x = best_x.clone();
            x[i] += scale;
            let v = eval(&x, &mut evals);
            simplex.push((x, v));
        }

        while evals < opts.max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[n].1 - simplex[0].1;
            let size = simplex[1..]
                .iter()
                .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if spread.abs() <= opts.ftol && size <= opts.xtol || size <= opts.xtol * 1e-3 {
                break;
            }
            let centroid: Vec<f64> = (0..n).map(|i| simplex[..n].iter().map(|(x, _)| x[i]).sum::<f64>() / n as f64).collect();
            let towards = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (w - c)).collect() };

            let xr = towards(-1.0);
            let fr = eval(&xr, &mut evals);
            if fr < simplex[0].1 {
                let xe = towards(-2.0);
                let fe = eval(&xe, &mut evals);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let xc = towards(-0.5);
                    let fc = eval(&xc, &mut evals);
                    (xc, fc)
                } else {
                    let xc = towards(0.5);
                    let fc = eval(&xc, &mut evals);
                    (xc, fc)
                };
                if fc < fr.min(simplex[n].1) {
                    simplex[n] = (xc, fc);
                } else {
                    let x0 = simplex[0].0.clone();
                    for v in simplex.iter_mut().skip(1) {
                        v.0 = v.0.iter().zip(&x0).map(|(a, b)| b + 0.5 * (a - b)).collect();
                        v.1 = eval(&v.0, &mut evals);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 <= best_f {
            best_x = simplex[0].0.clone();
            best_f = simplex[0].1;
        }
        let improved = before - best_f > opts.ftol.max(1e-14 * best_f.abs());
        if evals >= opts.max_evals || restarts >= opts.max_restarts || (!improved && restarts > 0) {
            break;
        }
        restarts += 1;
        scale *= 0.1;
    }
    NelderMeadResult { x: best_x, f: best_f, evals, restarts }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let r = minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &NelderMeadOptions { initial_scale: 0.5, ..Default::default() },
        );
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r);
    }

    #[test]
    fn quadratic_in_six_dimensions() {
        let r = minimize(|x| x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * (v - 0.3).powi(2)).sum(), &[0.0; 6], &Default::default());
        assert!(r.f < 1e-14);
        assert!(r.evals <= 20_000 + 7);
    }

    #[test]
    fn respects_budget() {
        let r = minimize(|x| x[0].sin() + x[1].cos(), &[0.0, 0.0], &NelderMeadOptions { max_evals: 50, ..Default::default() });
        assert!(r.evals <= 50 + 6);
    }
}
