//! Nelder–Mead simplex minimization with restart-on-convergence.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelderMead {
    pub max_iterations: usize,
    /// Relative spread of simplex values at which a run stops.
    pub tolerance: f64,
    /// Initial simplex edge as a fraction of each coordinate.
    pub relative_step: f64,
    /// Edge used for zero coordinates.
    pub zero_step: f64,
    /// Fresh-simplex restarts allowed after a converged run.
    pub max_restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            max_iterations: 20_000,
            tolerance: 1e-8,
            relative_step: 0.1,
            zero_step: 2.5e-4,
            max_restarts: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best simplex value after every iteration.
    pub best_history: Vec<f64>,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

impl NelderMead {
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> Minimum {
        let mut evals = 0usize;
        let mut eval = |x: &[f64]| {
            evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut best_x = x0.to_vec();
        let mut best_f = eval(&best_x);
        let mut history = Vec::new();
        let mut iterations = 0usize;
        let mut converged = false;
        let mut restarts = 0usize;
        while iterations < self.max_iterations {
            let (x, v, done) = self.run(&mut eval, &best_x, best_f, &mut iterations, &mut history);
            let gain = best_f - v;
            if v <= best_f {
                best_x = x;
                best_f = v;
            }
            if !done {
                break;
            }
            // a converged run that no longer improves ends the search
            if restarts >= self.max_restarts
                || gain <= self.tolerance * (best_f.abs() + self.tolerance)
            {
                converged = true;
                break;
            }
            restarts += 1;
        }
        Minimum {
            x: best_x,
            value: best_f,
            iterations,
            evaluations: evals,
            converged,
            best_history: history,
        }
    }

    fn run<E: FnMut(&[f64]) -> f64>(
        &self,
        eval: &mut E,
        x0: &[f64],
        f0: f64,
        iterations: &mut usize,
        history: &mut Vec<f64>,
    ) -> (Vec<f64>, f64, bool) {
        let n = x0.len();
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), f0));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += if x[i] != 0.0 {
                self.relative_step * x[i]
            } else {
                self.zero_step
            };
            let v = eval(&x);
            simplex.push((x, v));
        }
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            let worst = simplex[n].1;
            if (worst - best).abs() <= self.tolerance * (best.abs() + self.tolerance) {
                return (simplex[0].0.clone(), best, true);
            }
            if *iterations >= self.max_iterations {
                return (simplex[0].0.clone(), best, false);
            }
            *iterations += 1;

            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / n as f64;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };
            let xr = along(REFLECT);
            let fr = eval(&xr);
            if fr < simplex[0].1 {
                let xe = along(EXPAND);
                let fe = eval(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < worst {
                    let xc = along(CONTRACT * REFLECT);
                    let fc = eval(&xc);
                    (xc, fc)
                } else {
                    let xc = along(-CONTRACT);
                    let fc = eval(&xc);
                    (xc, fc)
                };
                if fc < fr.min(worst) {
                    simplex[n] = (xc, fc);
                } else {
                    let x_best = simplex[0].0.clone();
                    for (x, v) in simplex.iter_mut().skip(1) {
                        for (xi, bi) in x.iter_mut().zip(&x_best) {
                            *xi = bi + SHRINK * (*xi - bi);
                        }
                        *v = eval(x);
                    }
                }
            }
            let current_best = simplex.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
            history.push(current_best);
        }
    }
}
