//! Small dense optimizers for the calibration objectives: Nelder-Mead for
//! derivative-free coarse search and BFGS with backtracking line search for
//! polishing, both over a handful of unconstrained coordinates.

/// Outcome of one minimization run.
#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder-Mead simplex minimizer with adaptive coefficients.
#[derive(Debug, Clone)]
pub struct NelderMead {
    pub max_iters: usize,
    /// Convergence on the simplex value spread.
    pub ftol: f64,
    /// Initial simplex edge length.
    pub step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_iters: 600, ftol: 1e-12, step: 0.25 }
    }
}

impl NelderMead {
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> OptimResult {
        let n = x0.len();
        // Adaptive coefficients, useful beyond two dimensions.
        let nf = n as f64;
        let (alpha, gamma, rho, sigma) =
            (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);

        let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n + 1);
        simplex.push((f(x0), x0.to_vec()));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += self.step;
            simplex.push((f(&x), x));
        }

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iters {
            iterations += 1;
            simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
            let best = simplex[0].0;
            let worst = simplex[n].0;
            if (worst - best).abs() <= self.ftol * (best.abs().max(1.0)) {
                converged = true;
                break;
            }
            // Centroid of all but the worst.
            let mut centroid = vec![0.0; n];
            for (_, x) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / nf;
                }
            }
            let worst_x = simplex[n].1.clone();
            let reflect: Vec<f64> = centroid
                .iter()
                .zip(&worst_x)
                .map(|(c, w)| c + alpha * (c - w))
                .collect();
            let fr = f(&reflect);
            if fr < simplex[0].0 {
                let expand: Vec<f64> = centroid
                    .iter()
                    .zip(&worst_x)
                    .map(|(c, w)| c + gamma * alpha * (c - w))
                    .collect();
                let fe = f(&expand);
                simplex[n] = if fe < fr { (fe, expand) } else { (fr, reflect) };
            } else if fr < simplex[n - 1].0 {
                simplex[n] = (fr, reflect);
            } else {
                // Contract toward the centroid, inside or outside.
                let outside = fr < simplex[n].0;
                let base: &[f64] = if outside { &reflect } else { &worst_x };
                let contract: Vec<f64> =
                    centroid.iter().zip(base).map(|(c, b)| c + rho * (b - c)).collect();
                let fc = f(&contract);
                if fc < simplex[n].0.min(fr) {
                    simplex[n] = (fc, contract);
                } else {
                    // Shrink toward the best point.
                    let best_x = simplex[0].1.clone();
                    for entry in simplex[1..].iter_mut() {
                        let x: Vec<f64> = best_x
                            .iter()
                            .zip(&entry.1)
                            .map(|(b, xi)| b + sigma * (xi - b))
                            .collect();
                        *entry = (f(&x), x);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
        OptimResult {
            x: simplex[0].1.clone(),
            value: simplex[0].0,
            iterations,
            converged,
        }
    }
}

/// BFGS quasi-Newton minimizer with Armijo backtracking. The objective
/// fills the gradient slice alongside the value.
#[derive(Debug, Clone)]
pub struct Bfgs {
    pub max_iters: usize,
    /// Convergence on the gradient sup-norm.
    pub gtol: f64,
}

impl Default for Bfgs {
    fn default() -> Self {
        Self { max_iters: 200, gtol: 1e-8 }
    }
}

impl Bfgs {
    pub fn minimize<F: FnMut(&[f64], &mut [f64]) -> f64>(
        &self,
        mut f: F,
        x0: &[f64],
    ) -> OptimResult {
        let n = x0.len();
        let mut x = x0.to_vec();
        let mut g = vec![0.0; n];
        let mut value = f(&x, &mut g);
        // Inverse Hessian approximation, started at the identity.
        let mut h: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| f64::from(i == j)).collect())
            .collect();

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iters {
            iterations += 1;
            let gnorm = g.iter().fold(0.0f64, |m, gi| m.max(gi.abs()));
            if gnorm <= self.gtol {
                converged = true;
                break;
            }
            // Search direction d = -H g.
            let mut d = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    d[i] -= h[i][j] * g[j];
                }
            }
            let slope: f64 = d.iter().zip(&g).map(|(di, gi)| di * gi).sum();
            if slope >= 0.0 {
                // Stale curvature; restart from steepest descent.
                for (i, row) in h.iter_mut().enumerate() {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = f64::from(i == j);
                    }
                }
                for (di, gi) in d.iter_mut().zip(&g) {
                    *di = -gi;
                }
            }
            let slope: f64 = d.iter().zip(&g).map(|(di, gi)| di * gi).sum();

            // Backtracking line search with the Armijo condition.
            let mut step = 1.0f64;
            let mut new_x;
            let mut new_g = vec![0.0; n];
            let mut new_value;
            let mut ok = false;
            loop {
                new_x = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect::<Vec<f64>>();
                new_value = f(&new_x, &mut new_g);
                if new_value.is_finite() && new_value <= value + 1e-4 * step * slope {
                    ok = true;
                    break;
                }
                step *= 0.5;
                if step < 1e-14 {
                    break;
                }
            }
            if !ok {
                // No descent left at float resolution; for large smooth
                // objectives this is the practical stationary point.
                converged = g.iter().fold(0.0f64, |m, gi| m.max(gi.abs()))
                    <= 1e-3 * (1.0 + value.abs());
                break;
            }
            let progress = value - new_value;

            // BFGS update of the inverse Hessian.
            let s: Vec<f64> = new_x.iter().zip(&x).map(|(a, b)| a - b).collect();
            let yv: Vec<f64> = new_g.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy: f64 = s.iter().zip(&yv).map(|(a, b)| a * b).sum();
            if sy > 1e-14 {
                let mut hy = vec![0.0; n];
                for i in 0..n {
                    for j in 0..n {
                        hy[i] += h[i][j] * yv[j];
                    }
                }
                let yhy: f64 = yv.iter().zip(&hy).map(|(a, b)| a * b).sum();
                for i in 0..n {
                    for j in 0..n {
                        h[i][j] += (sy + yhy) * s[i] * s[j] / (sy * sy)
                            - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                    }
                }
            }
            x = new_x;
            g = new_g;
            value = new_value;
            if progress <= 1e-14 * (1.0 + value.abs()) {
                converged = true;
                break;
            }
        }
        OptimResult { x, value, iterations, converged }
    }
}

/// Central finite-difference gradient, for objectives without an analytic
/// one and for cross-checking those with.
pub fn numerical_gradient<F: FnMut(&[f64]) -> f64>(mut f: F, x: &[f64], h: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let step = h * (1.0 + x[i].abs());
        xp[i] = x[i] + step;
        let fp = f(&xp);
        xp[i] = x[i] - step;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * step);
    }
    g
}
