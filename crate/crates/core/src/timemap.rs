//! Inversion of the rest-frame decay law and the time map `phi_p`.
//!
//! `phi_p(t)` is the rest-frame time at which the rest-frame survival
//! probability equals the lab-frame one, `P0(phi_p(t)) = P_p(t)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, DecayError, Result};
use crate::grid::geometric_grid;
use crate::labframe::{survival_probability_lab, LabContext, LabOptions, LabSurvival};
use crate::prony::{survival_probability_rest, ExpModeSet, RestModel};
use crate::scalar::{lit, wide, Real};
use crate::windows::IntervalSet;

/// Root `u` of `sum_j w_j u^(gamma_j / gamma_1) = sqrt(r)` in `(0, 1]`.
///
/// Bisection until the bracket is narrower than `1e-3`, then Newton steps
/// kept inside the bracket.
pub fn p0_inverse_root<T: Real>(model: &ExpModeSet<T>, r: T) -> Result<T> {
    if r.is_nan() || r < T::zero() || r > T::one() {
        return Err(domain(format!("probability {r} outside (0, 1]")));
    }
    if r == T::zero() {
        return Err(DecayError::NoSolution("probability 0 is reached only at infinite time".into()));
    }
    if r == T::one() {
        return Ok(T::one());
    }
    let target = r.sqrt();
    let g1 = model.gamma_min();
    let exps: Vec<(T, T)> = model.modes().iter().map(|m| (m.w, m.gamma / g1)).collect();
    let eval = |u: T| -> (T, T) {
        if u <= T::zero() {
            return (-target, T::zero());
        }
        let ln_u = u.ln();
        let mut value = -target;
        let mut slope = T::zero();
        for &(w, e) in &exps {
            let pow = (e * ln_u).exp();
            value = value + w * pow;
            slope = slope + w * e * pow / u;
        }
        (value, slope)
    };

    let (mut lo, mut hi) = (T::zero(), T::one());
    let switch: T = lit(1e-3);
    while hi - lo > switch {
        let mid = (lo + hi) / lit(2.0);
        if eval(mid).0 < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut u = (lo + hi) / lit(2.0);
    for _ in 0..200 {
        let (value, slope) = eval(u);
        if value == T::zero() {
            return Ok(u);
        }
        if value < T::zero() {
            lo = u;
        } else {
            hi = u;
        }
        let newton = u - value / slope;
        let next = if slope > T::zero() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) / lit(2.0)
        };
        let step = (next - u).abs();
        u = next;
        if step <= lit::<T>(4.0) * T::epsilon() * u || hi - lo <= T::epsilon() * hi {
            break;
        }
    }
    Ok(u)
}

/// `P0^-1(r) = -(2 / gamma_1) ln u(r)`.
pub fn p0_inverse<T: Real>(model: &ExpModeSet<T>, r: T) -> Result<T> {
    let u = p0_inverse_root(model, r)?;
    let t = -(lit::<T>(2.0) / model.gamma_min()) * u.ln();
    Ok(t.max(T::zero()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiValue<T> {
    pub phi: T,
    pub lab: LabSurvival<T>,
    /// `P_p(t)` exceeded one, so `phi` was set to zero.
    pub overshoot: bool,
}

/// `phi_p(t) = P0^-1(P_p(t))` with `P_p` from the closed form.
pub fn phi_p<T: Real>(
    model: &RestModel<T>,
    ctx: &LabContext<T>,
    t: T,
    opts: &LabOptions<T>,
) -> Result<PhiValue<T>> {
    let raw_opts = LabOptions {
        clamp: false,
        ..*opts
    };
    let lab = survival_probability_lab(model, ctx, t, &raw_opts)?;
    if !(lab.value > T::zero()) {
        return Err(domain(format!("lab survival probability {} is not positive", lab.value)));
    }
    if lab.value > T::one() {
        return Ok(PhiValue {
            phi: T::zero(),
            lab,
            overshoot: true,
        });
    }
    let phi = p0_inverse(model.modes(), lab.value)?;
    Ok(PhiValue {
        phi,
        lab,
        overshoot: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiRow {
    pub t: f64,
    pub phi: Option<f64>,
    pub t_over_gamma: f64,
    /// `|phi gamma / t - 1|`.
    pub deviation: Option<f64>,
    pub p_lab: Option<f64>,
    /// `|P_p(t) - P0(t / gamma)| / P0(t / gamma)`.
    pub scaling_deviation: Option<f64>,
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearityReport {
    pub lorentz_gamma: f64,
    pub rows: Vec<PhiRow>,
    pub max_deviation: f64,
    pub mean_deviation: f64,
    pub max_scaling_deviation: f64,
    /// Least-squares line `phi = slope t + intercept` through the valid rows.
    pub slope: f64,
    pub intercept: f64,
    /// `|slope gamma - 1|`.
    pub slope_deviation: f64,
    pub flagged_rows: usize,
}

/// Evaluates `phi_p` on `times` and summarizes how close it is to `t / gamma`.
///
/// Points where `P_p` leaves `(0, 1]` are kept as flagged rows and excluded
/// from the statistics.
pub fn phi_diagnostic<T: Real>(
    model: &RestModel<T>,
    ctx: &LabContext<T>,
    times: &[T],
    opts: &LabOptions<T>,
) -> Result<LinearityReport> {
    let g = ctx.gamma();
    let rows: Vec<PhiRow> = times
        .par_iter()
        .map(|&t| phi_row(model, ctx, t, opts))
        .collect::<Result<Vec<_>>>()?;
    let valid: Vec<&PhiRow> = rows.iter().filter(|r| r.deviation.is_some()).collect();
    if valid.is_empty() {
        return Err(domain("no grid point produced a usable phi value"));
    }
    let devs: Vec<f64> = valid.iter().filter_map(|r| r.deviation).collect();
    let max_deviation = devs.iter().copied().fold(0.0, f64::max);
    let mean_deviation = devs.iter().sum::<f64>() / devs.len() as f64;
    let max_scaling_deviation = valid
        .iter()
        .filter_map(|r| r.scaling_deviation)
        .fold(0.0, f64::max);
    let (slope, intercept) = least_squares_line(
        &valid.iter().map(|r| (r.t, r.phi.unwrap_or(0.0))).collect::<Vec<_>>(),
    );
    let gamma = wide(g);
    Ok(LinearityReport {
        lorentz_gamma: gamma,
        max_deviation,
        mean_deviation,
        max_scaling_deviation,
        slope,
        intercept,
        slope_deviation: (slope * gamma - 1.0).abs(),
        flagged_rows: rows.iter().filter(|r| r.flag.is_some()).count(),
        rows,
    })
}

fn phi_row<T: Real>(model: &RestModel<T>, ctx: &LabContext<T>, t: T, opts: &LabOptions<T>) -> Result<PhiRow> {
    let g = ctx.gamma();
    let t_over_gamma = wide(t / g);
    let rest = survival_probability_rest(model.modes(), t / g)?;
    match phi_p(model, ctx, t, opts) {
        Ok(v) if v.overshoot => Ok(PhiRow {
            t: wide(t),
            phi: Some(0.0),
            t_over_gamma,
            deviation: None,
            p_lab: Some(wide(v.lab.value)),
            scaling_deviation: None,
            flag: Some("P_p above 1; phi set to 0".into()),
        }),
        Ok(v) => Ok(PhiRow {
            t: wide(t),
            phi: Some(wide(v.phi)),
            t_over_gamma,
            deviation: Some(wide((v.phi * g / t - T::one()).abs())),
            p_lab: Some(wide(v.lab.value)),
            scaling_deviation: (rest > T::zero()).then(|| wide(((v.lab.value - rest) / rest).abs())),
            flag: None,
        }),
        Err(DecayError::Domain(msg)) => Ok(PhiRow {
            t: wide(t),
            phi: None,
            t_over_gamma,
            deviation: None,
            p_lab: None,
            scaling_deviation: None,
            flag: Some(msg),
        }),
        Err(e) => Err(e),
    }
}

fn least_squares_line(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    if points.len() < 2 {
        let (t, phi) = points.first().copied().unwrap_or((1.0, 0.0));
        return (phi / t, 0.0);
    }
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_phi = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_phi)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_t) * (p.0 - mean_t)).sum();
    let slope = sxy / sxx;
    (slope, mean_phi - slope * mean_t)
}

/// [`phi_diagnostic`] on a geometric grid of `grid_size` points across the window.
///
/// Grid points falling in gaps of a disconnected window are skipped.
pub fn linearity_diagnostic<T: Real>(
    model: &RestModel<T>,
    ctx: &LabContext<T>,
    window: &IntervalSet<T>,
    grid_size: usize,
) -> Result<LinearityReport> {
    let (lo, hi) = match (window.infimum(), window.supremum()) {
        (Some(lo), Some(hi)) if lo > T::zero() && hi > lo => (lo, hi),
        _ => {
            return Err(domain(
                "linearity diagnostic unavailable: the window is empty or degenerate",
            ))
        }
    };
    let times: Vec<T> = geometric_grid(lo, hi, grid_size)?
        .into_iter()
        .filter(|&t| window.contains(t))
        .collect();
    phi_diagnostic(model, ctx, &times, &LabOptions::default())
}
