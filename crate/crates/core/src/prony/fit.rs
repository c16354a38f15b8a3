use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{ExpModeSet, Mode, SurvivalCurve};
use crate::error::{DecayError, Result};

/// Settings of the Monte Carlo seeded exponential-sum fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Number of modes to fit.
    pub modes: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Objective evaluations allowed per restart.
    pub max_iters: usize,
    /// RMSE above which the fit is reported as failed.
    pub tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            modes: 8,
            restarts: 16,
            seed: 0,
            max_iters: 20_000,
            tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub modes: ExpModeSet<f64>,
    pub rmse: f64,
    /// Final RMSE of every restart, in restart order.
    pub restart_rmse: Vec<f64>,
    pub best_restart: usize,
}

/// Fits `sum_j w_j exp(-gamma_j t / 2)` to a modulus curve.
///
/// Widths are searched in log space by Nelder-Mead; for each trial set of
/// widths the weights come from the least-squares problem with `sum w = 1`
/// eliminated, then negative weights are clipped and the rest renormalized,
/// so the objective is always the RMSE of an admissible model. Restart `k`
/// draws its starting widths log-uniformly from a ChaCha8 stream `k` of the
/// master seed, which makes the result independent of thread scheduling.
pub fn fit_prony(curve: &SurvivalCurve<f64>, cfg: &FitConfig) -> Result<FitReport> {
    if cfg.modes == 0 || cfg.restarts == 0 {
        return Err(DecayError::Domain("mode count and restarts must be at least 1".into()));
    }
    let needed = 2 * cfg.modes;
    if curve.len() < needed {
        return Err(DecayError::InsufficientSamples {
            needed,
            got: curve.len(),
        });
    }
    let problem = Problem::new(curve);
    let t_first = curve
        .samples()
        .iter()
        .map(|s| s.0)
        .find(|&t| t > 0.0)
        .ok_or_else(|| DecayError::Domain("curve has no positive sample time".into()))?;
    let t_last = curve.samples()[curve.len() - 1].0;
    let log_lo = (0.5 / t_last).ln();
    let log_hi = (20.0 / t_first).ln();

    let outcomes: Vec<(Vec<f64>, f64)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            let mut start: Vec<f64> = (0..cfg.modes)
                .map(|_| rng.random_range(log_lo..log_hi))
                .collect();
            start.sort_by(f64::total_cmp);
            local_search(&problem, start, cfg.max_iters)
        })
        .collect();

    let restart_rmse: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
    let best_restart = restart_rmse
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("at least one restart");
    let modes = problem.assemble(&outcomes[best_restart].0)?;
    let rmse = problem.rmse_of(&modes);
    if !(rmse <= cfg.tolerance) {
        return Err(DecayError::FitFailed {
            best: Box::new(modes),
            rmse,
        });
    }
    Ok(FitReport {
        modes,
        rmse,
        restart_rmse,
        best_restart,
    })
}

struct Problem {
    times: Vec<f64>,
    values: DVector<f64>,
}

impl Problem {
    fn new(curve: &SurvivalCurve<f64>) -> Self {
        Problem {
            times: curve.samples().iter().map(|s| s.0).collect(),
            values: DVector::from_iterator(curve.len(), curve.samples().iter().map(|s| s.1)),
        }
    }

    fn basis(&self, widths: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.times.len(), widths.len(), |i, j| {
            (-0.5 * widths[j] * self.times[i]).exp()
        })
    }

    /// Weights for fixed widths: constrained least squares, then clip and renormalize.
    fn weights(&self, basis: &DMatrix<f64>) -> Option<Vec<f64>> {
        let n = basis.ncols();
        if n == 1 {
            return Some(vec![1.0]);
        }
        let last = basis.column(n - 1).into_owned();
        let mut reduced = basis.columns(0, n - 1).into_owned();
        for mut col in reduced.column_iter_mut() {
            col -= &last;
        }
        let rhs = &self.values - &last;
        let head = solve_least_squares(reduced, rhs)?;
        let mut w: Vec<f64> = head.iter().copied().collect();
        w.push(1.0 - head.sum());
        if w.iter().any(|&x| !(x > 0.0)) {
            for x in &mut w {
                *x = x.max(0.0);
            }
            let total: f64 = w.iter().sum();
            if !(total > 0.0) {
                return None;
            }
            for x in &mut w {
                *x /= total;
            }
        }
        Some(w)
    }

    fn objective(&self, log_widths: &[f64]) -> f64 {
        let widths: Vec<f64> = log_widths.iter().map(|x| x.exp()).collect();
        if widths.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return f64::INFINITY;
        }
        let basis = self.basis(&widths);
        match self.weights(&basis) {
            Some(w) => {
                let fitted = &basis * DVector::from_vec(w);
                rms(&(fitted - &self.values))
            }
            None => f64::INFINITY,
        }
    }

    fn assemble(&self, log_widths: &[f64]) -> Result<ExpModeSet<f64>> {
        let mut widths: Vec<f64> = log_widths.iter().map(|x| x.exp()).collect();
        widths.sort_by(f64::total_cmp);
        let basis = self.basis(&widths);
        let weights = self
            .weights(&basis)
            .ok_or_else(|| DecayError::NoSolution("no admissible weights for fitted widths".into()))?;
        let mut modes: Vec<Mode<f64>> = Vec::with_capacity(widths.len());
        for (w, g) in weights.into_iter().zip(widths) {
            match modes.last_mut() {
                // merge near-degenerate widths, keeping the weight
                Some(prev) if (g - prev.gamma).abs() <= 1e-9 * g => {
                    prev.gamma = (prev.w * prev.gamma + w * g) / (prev.w + w).max(f64::MIN_POSITIVE);
                    prev.w += w;
                }
                _ => modes.push(Mode::new(w, g)),
            }
        }
        modes.retain(|m| m.w > 0.0);
        ExpModeSet::normalized(modes)
    }

    fn rmse_of(&self, modes: &ExpModeSet<f64>) -> f64 {
        let sq: f64 = self
            .times
            .iter()
            .zip(self.values.iter())
            .map(|(&t, &v)| {
                let m: f64 = modes
                    .modes()
                    .iter()
                    .map(|m| m.w * (-0.5 * m.gamma * t).exp())
                    .sum();
                (m - v) * (m - v)
            })
            .sum();
        (sq / self.times.len() as f64).sqrt()
    }
}

fn rms(v: &DVector<f64>) -> f64 {
    (v.norm_squared() / v.len() as f64).sqrt()
}

fn solve_least_squares(a: DMatrix<f64>, b: DVector<f64>) -> Option<DVector<f64>> {
    let qr = a.clone().qr();
    let r = qr.r();
    let diag_max = r.diagonal().amax();
    let well_posed = r.diagonal().iter().all(|d| d.abs() > 1e-13 * diag_max);
    if well_posed {
        let rhs = qr.q().transpose() * &b;
        if let Some(x) = r.solve_upper_triangular(&rhs) {
            return Some(x);
        }
    }
    let svd = a.svd(true, true);
    let cutoff = 1e-14 * svd.singular_values.max();
    svd.solve(&b, cutoff).ok()
}

/// Nelder-Mead restarted from its own optimum until it stops improving.
fn local_search(problem: &Problem, start: Vec<f64>, budget: usize) -> (Vec<f64>, f64) {
    let f = |x: &[f64]| problem.objective(x);
    let mut x = start;
    let mut fx = f(&x);
    let mut used = 0;
    let mut step = 0.25;
    for _ in 0..4 {
        if used >= budget {
            break;
        }
        let run = nelder_mead(&f, &x, step, budget - used);
        used += run.evaluations;
        let improved = run.value < fx * (1.0 - 1e-9) || (fx.is_infinite() && run.value.is_finite());
        if run.value <= fx {
            x = run.point;
            fx = run.value;
        }
        if !improved {
            break;
        }
        step = 0.05;
    }
    (x, fx)
}

struct Simplex {
    point: Vec<f64>,
    value: f64,
    evaluations: usize,
}

/// Adaptive Nelder-Mead (dimension-dependent coefficients).
fn nelder_mead(f: &impl Fn(&[f64]) -> f64, x0: &[f64], step: f64, max_evals: usize) -> Simplex {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut evals = 0;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    let mut verts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    verts.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        verts.push(v);
    }
    let mut vals: Vec<f64> = verts.iter().map(|v| eval(v, &mut evals)).collect();

    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        verts = order.iter().map(|&i| verts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let f_spread = (vals[n] - vals[0]).abs();
        let x_spread = verts[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&verts[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if x_spread <= 1e-10 && f_spread <= 1e-15 * vals[0].abs().max(1e-300) + 1e-300 {
            break;
        }
        if x_spread <= 1e-12 {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| verts[..n].iter().map(|v| v[k]).sum::<f64>() / nf)
            .collect();
        let along = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&verts[n])
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let reflected = along(alpha);
        let fr = eval(&reflected, &mut evals);
        if fr < vals[0] {
            let expanded = along(alpha * beta);
            let fe = eval(&expanded, &mut evals);
            if fe < fr {
                verts[n] = expanded;
                vals[n] = fe;
            } else {
                verts[n] = reflected;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            verts[n] = reflected;
            vals[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < vals[n] {
            let c = along(alpha * gamma);
            let fc = eval(&c, &mut evals);
            (c, fc)
        } else {
            let c = along(-gamma);
            let fc = eval(&c, &mut evals);
            (c, fc)
        };
        if fc < fr.min(vals[n]) {
            verts[n] = contracted;
            vals[n] = fc;
            continue;
        }
        for i in 1..=n {
            let shrunk: Vec<f64> = verts[0]
                .iter()
                .zip(&verts[i])
                .map(|(b, v)| b + delta * (v - b))
                .collect();
            vals[i] = eval(&shrunk, &mut evals);
            verts[i] = shrunk;
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .expect("simplex is nonempty");
    Simplex {
        point: verts[best].clone(),
        value: vals[best],
        evaluations: evals,
    }
}
