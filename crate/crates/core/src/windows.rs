//! Window of exponential times in the rest and laboratory frames.
//!
//! Mode `j` dominates the power-law background while
//! `K(gamma_j t / (2 g)) >= threshold`, with `K(z) = sqrt(z) exp(-z)` and `g`
//! the Lorentz factor, provided its dominance parameter `xi_j` is small. The
//! window is the union of those per-mode intervals over the modes that pass.

use serde::Serialize;

use crate::error::{domain, DecayError, Result};
use crate::labframe::LabContext;
use crate::prony::RestModel;
use crate::scalar::{lit, Real};

/// Sorted union of disjoint closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct IntervalSet<T> {
    intervals: Vec<(T, T)>,
}

impl<T: Real> IntervalSet<T> {
    pub fn empty() -> Self {
        IntervalSet {
            intervals: Vec::new(),
        }
    }

    /// Normalizes `intervals`: sorted by left end, overlapping or touching pieces merged.
    pub fn new(mut intervals: Vec<(T, T)>) -> Result<Self> {
        for &(lo, hi) in &intervals {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(domain(format!("invalid interval [{lo}, {hi}]")));
            }
        }
        intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite endpoints"));
        let mut merged: Vec<(T, T)> = Vec::with_capacity(intervals.len());
        for (lo, hi) in intervals {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        Ok(IntervalSet { intervals: merged })
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Number of disjoint pieces.
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn contains(&self, t: T) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= t && t <= hi)
    }

    pub fn infimum(&self) -> Option<T> {
        self.intervals.first().map(|iv| iv.0)
    }

    pub fn supremum(&self) -> Option<T> {
        self.intervals.last().map(|iv| iv.1)
    }

    /// Total length of the pieces.
    pub fn measure(&self) -> T {
        self.intervals
            .iter()
            .fold(T::zero(), |acc, &(lo, hi)| acc + (hi - lo))
    }

    /// Every endpoint multiplied by `factor > 0`.
    pub fn scaled(&self, factor: T) -> Self {
        IntervalSet {
            intervals: self
                .intervals
                .iter()
                .map(|&(lo, hi)| (lo * factor, hi * factor))
                .collect(),
        }
    }
}

/// `K(z) = sqrt(z) exp(-z)`.
pub fn k_function<T: Real>(zeta: T) -> Result<T> {
    if !(zeta >= T::zero()) {
        return Err(domain(format!("K needs a nonnegative argument, got {zeta}")));
    }
    if zeta.is_infinite() {
        return Ok(T::zero());
    }
    Ok(zeta.sqrt() * (-zeta).exp())
}

/// The two solutions of `K(z) = threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZetaBounds<T> {
    pub zeta_min: T,
    pub zeta_max: T,
    pub threshold: T,
}

/// Default level of `K` bounding the exponential regime.
pub const DEFAULT_ZETA_THRESHOLD: f64 = 1e-2;

/// Solves `K(z) = threshold` on both sides of the maximum at `z = 1/2` by bisection.
pub fn solve_zeta_bounds<T: Real>(threshold: T) -> Result<ZetaBounds<T>> {
    let half: T = lit(0.5);
    let peak = k_function(half)?;
    if !(threshold > T::zero()) {
        return Err(domain(format!("threshold must be positive, got {threshold}")));
    }
    if threshold >= peak {
        return Err(DecayError::NoSolution(format!(
            "K never reaches {threshold}; its maximum is {peak}"
        )));
    }
    let k = |z: T| z.sqrt() * (-z).exp();
    let zeta_min = bisect(|z| k(z) - threshold, T::zero(), half);
    let mut hi = T::one();
    while k(hi) > threshold {
        hi = hi * lit(2.0);
    }
    let zeta_max = bisect(|z| threshold - k(z), half, hi);
    Ok(ZetaBounds {
        zeta_min,
        zeta_max,
        threshold,
    })
}

/// Root of an increasing function bracketed by `[lo, hi]`.
fn bisect<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T) -> T {
    let abs_tol: T = lit(1e-12);
    for _ in 0..200 {
        let mid = (lo + hi) / lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= abs_tol.max(lit::<T>(2.0) * T::epsilon() * hi) {
            break;
        }
    }
    (lo + hi) / lit(2.0)
}

/// Dominance parameters
/// `xi_j = (sum_i w_i gamma_i / w_j) / (2M) * sqrt((gamma_j / (pi M)) sqrt(1 - 1/g^2))`.
pub fn xi_parameters<T: Real>(model: &RestModel<T>, ctx: &LabContext<T>) -> Result<Vec<T>> {
    let g = ctx.gamma();
    if g <= T::one() {
        return Err(DecayError::ExcludedRegime(
            "Lorentz factor 1: the nonrelativistic limit is outside the model".into(),
        ));
    }
    let mass = model.mass();
    let weighted = model.modes().weighted_width();
    let beta = (T::one() - T::one() / (g * g)).sqrt();
    Ok(model
        .modes()
        .modes()
        .iter()
        .map(|m| weighted / m.w / (lit::<T>(2.0) * mass) * (m.gamma / (T::PI() * mass) * beta).sqrt())
        .collect())
}

/// Indices (0-based, increasing) of the modes with `xi_j <= dominance_factor * 1e-2`.
pub fn dominant_indices<T: Real>(xi: &[T], dominance_factor: T) -> Vec<usize> {
    let bound = dominance_factor * lit(1e-2);
    xi.iter()
        .enumerate()
        .filter(|(_, &x)| x <= bound)
        .map(|(i, _)| i)
        .collect()
}

/// Default factor separating `xi_j` from `1e-2`.
pub const DEFAULT_DOMINANCE_FACTOR: f64 = 1e-2;

/// Interval of exponential times contributed by one dominant mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeInterval<T> {
    pub index: usize,
    pub lab: (T, T),
    pub rest: (T, T),
}

/// Lower-bound constraints evaluated at the left edge of the lab window.
///
/// Each margin is the ratio of the two sides of the corresponding
/// inequality, so the constraint holds with margin `>= 1` for `>` and with
/// margin `>= 10` for "much greater than".
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintMargins<T> {
    /// `2 zeta_min g sqrt(g^2 - 1) / (gamma_jn / M)`, i.e. `pt` at the left edge.
    pub pt_margin: T,
    /// `20 zeta_min g / (gamma_jn / gamma_1)`, i.e. `10 gamma_1 t` at the left edge.
    pub t_gamma1_margin: T,
    /// `2 zeta_min g / (gamma_jn / M)`, i.e. `Mt` at the left edge.
    pub mt_margin: T,
    pub pt_satisfied: bool,
    /// Either `t > 1/(10 gamma_1)` or `Mt >> 1`.
    pub short_time_satisfied: bool,
}

/// Why no mode qualified and what would change that.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmptyWindowDiagnostics<T> {
    pub smallest_xi_index: usize,
    pub smallest_xi: T,
    /// Smallest dominance factor that would admit that mode.
    pub admitting_dominance_factor: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowReport<T> {
    pub mass: T,
    pub p: T,
    pub lorentz_gamma: T,
    pub zeta: ZetaBounds<T>,
    pub dominance_factor: T,
    pub xi: Vec<T>,
    pub dominant_indices: Vec<usize>,
    pub mode_intervals: Vec<ModeInterval<T>>,
    pub lab_window: IntervalSet<T>,
    pub rest_window: IntervalSet<T>,
    /// The lab window is a single closed interval.
    pub closed_interval: bool,
    /// Consecutive dominant widths satisfy `gamma_l / gamma_{l+1} > zeta_min / zeta_max`.
    pub closed_interval_predicted: bool,
    pub margins: Option<ConstraintMargins<T>>,
    pub empty: Option<EmptyWindowDiagnostics<T>>,
    pub warnings: Vec<String>,
}

impl<T: Real> WindowReport<T> {
    /// `T_p`, the length of the lab window when it is one interval.
    pub fn lab_length(&self) -> T {
        self.lab_window.measure()
    }

    pub fn rest_length(&self) -> T {
        self.rest_window.measure()
    }
}

/// Builds the exponential-time windows for a model seen at momentum `ctx.p()`.
pub fn exponential_window<T: Real>(
    model: &RestModel<T>,
    ctx: &LabContext<T>,
    bounds: &ZetaBounds<T>,
    dominance_factor: T,
) -> Result<WindowReport<T>> {
    if !(dominance_factor > T::zero() && dominance_factor < T::one()) {
        return Err(domain(format!("dominance factor {dominance_factor} outside (0, 1)")));
    }
    if ctx.mass() != model.mass() {
        return Err(domain("context and model have different masses"));
    }
    let xi = xi_parameters(model, ctx)?;
    let dominant = dominant_indices(&xi, dominance_factor);
    let g = ctx.gamma();
    let two: T = lit(2.0);
    let modes = model.modes().modes();

    let mode_intervals: Vec<ModeInterval<T>> = dominant
        .iter()
        .map(|&j| {
            let rest = (two * bounds.zeta_min / modes[j].gamma, two * bounds.zeta_max / modes[j].gamma);
            ModeInterval {
                index: j,
                lab: (rest.0 * g, rest.1 * g),
                rest,
            }
        })
        .collect();
    let rest_window = IntervalSet::new(mode_intervals.iter().map(|m| m.rest).collect())?;
    let lab_window = rest_window.scaled(g);
    let ratio = bounds.zeta_min / bounds.zeta_max;
    let closed_interval_predicted = !dominant.is_empty()
        && dominant
            .windows(2)
            .all(|pair| modes[pair[0]].gamma / modes[pair[1]].gamma > ratio);

    let mut warnings = Vec::new();
    let factor: T = lit(10.0);
    let margins = dominant.last().map(|&last| {
        let widest = modes[last].gamma;
        let mass = model.mass();
        let edge = two * bounds.zeta_min * g;
        let pt_margin = edge * (g * g - T::one()).sqrt() * mass / widest;
        let t_gamma1_margin = lit::<T>(10.0) * edge * model.modes().gamma_min() / widest;
        let mt_margin = edge * mass / widest;
        let m = ConstraintMargins {
            pt_margin,
            t_gamma1_margin,
            mt_margin,
            pt_satisfied: pt_margin >= factor,
            short_time_satisfied: t_gamma1_margin > T::one() || mt_margin >= factor,
        };
        if !m.pt_satisfied {
            warnings.push(format!("pt at the window edge is only {pt_margin}"));
        }
        if !m.short_time_satisfied {
            warnings.push(format!(
                "window edge is in the very-short-time regime (10 gamma_1 t = {t_gamma1_margin}, Mt = {mt_margin})"
            ));
        }
        m
    });
    let empty = if dominant.is_empty() {
        let (idx, &smallest) = xi
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite xi"))
            .expect("model has modes");
        warnings.push(format!(
            "no mode passes the dominance test; smallest xi is {smallest} (mode {idx})"
        ));
        Some(EmptyWindowDiagnostics {
            smallest_xi_index: idx,
            smallest_xi: smallest,
            admitting_dominance_factor: smallest / lit(1e-2),
        })
    } else {
        None
    };

    Ok(WindowReport {
        mass: model.mass(),
        p: ctx.p(),
        lorentz_gamma: g,
        zeta: *bounds,
        dominance_factor,
        xi,
        dominant_indices: dominant,
        mode_intervals,
        closed_interval: lab_window.len() == 1,
        closed_interval_predicted,
        lab_window,
        rest_window,
        margins,
        empty,
        warnings,
    })
}

/// `|sum' w_j exp(-gamma_j t / (2 g))|^2` over the dominant modes whose lab interval holds `t`.
pub fn dominant_mode_decay<T: Real>(
    model: &RestModel<T>,
    ctx: &LabContext<T>,
    report: &WindowReport<T>,
    t: T,
) -> Result<T> {
    if !report.lab_window.contains(t) {
        return Err(DecayError::OutOfWindow { t: crate::scalar::wide(t) });
    }
    let g = ctx.gamma();
    let modes = model.modes().modes();
    let sum = report
        .mode_intervals
        .iter()
        .filter(|iv| iv.lab.0 <= t && t <= iv.lab.1)
        .fold(T::zero(), |acc, iv| {
            let m = modes[iv.index];
            acc + m.w * (-m.gamma * t / (lit::<T>(2.0) * g)).exp()
        });
    Ok(sum * sum)
}

/// Rest-frame twin of [`dominant_mode_decay`] on the rest window.
pub fn dominant_mode_decay_rest<T: Real>(model: &RestModel<T>, report: &WindowReport<T>, t: T) -> Result<T> {
    if !report.rest_window.contains(t) {
        return Err(DecayError::OutOfWindow { t: crate::scalar::wide(t) });
    }
    let modes = model.modes().modes();
    let sum = report
        .mode_intervals
        .iter()
        .filter(|iv| iv.rest.0 <= t && t <= iv.rest.1)
        .fold(T::zero(), |acc, iv| {
            let m = modes[iv.index];
            acc + m.w * (-m.gamma * t / lit::<T>(2.0)).exp()
        });
    Ok(sum * sum)
}

/// Smallest ratio, over the dominant modes whose lab interval holds `t`, of
/// `w_j exp(-gamma_j t / (2 g))` to the asymptotic background modulus
/// `(p sum w gamma / (pi M^2)) sqrt(pi / (2 pt))`.
///
/// Inside the window this is at least `1 / dominance_factor`.
pub fn dominance_ratio<T: Real>(
    model: &RestModel<T>,
    ctx: &LabContext<T>,
    report: &WindowReport<T>,
    t: T,
) -> Result<T> {
    if !report.lab_window.contains(t) {
        return Err(DecayError::OutOfWindow { t: crate::scalar::wide(t) });
    }
    let mass = model.mass();
    let p = ctx.p();
    let background = p * model.modes().weighted_width() / (T::PI() * mass * mass)
        * (T::PI() / (lit::<T>(2.0) * p * t)).sqrt();
    let g = ctx.gamma();
    let modes = model.modes().modes();
    Ok(report
        .mode_intervals
        .iter()
        .filter(|iv| iv.lab.0 <= t && t <= iv.lab.1)
        .map(|iv| {
            let m = modes[iv.index];
            m.w * (-m.gamma * t / (lit::<T>(2.0) * g)).exp() / background
        })
        .fold(T::infinity(), T::min))
}
