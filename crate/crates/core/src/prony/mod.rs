//! Exponential-mode models of the rest-frame survival amplitude.
//!
//! The modulus of the amplitude is `sum_j w_j exp(-gamma_j t / 2)` with
//! positive weights summing to one and strictly increasing widths.

mod fit;
mod io;

pub use fit::{fit_prony, FitConfig, FitReport};
pub use io::{read_curve_csv, read_curve_csv_column, write_curve_csv, ModeRecord, ModelDocument};

use serde::{Deserialize, Serialize};

use crate::error::{domain, DecayError, Result};
use crate::scalar::{lit, wide, Real};

/// One exponential mode: weight and decay width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode<T> {
    pub w: T,
    pub gamma: T,
}

impl<T> Mode<T> {
    pub fn new(w: T, gamma: T) -> Self {
        Mode { w, gamma }
    }
}

/// Normalized set of exponential modes sorted by width.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpModeSet<T> {
    modes: Vec<Mode<T>>,
}

impl<T: Real> ExpModeSet<T> {
    /// Validates and sorts `modes`.
    ///
    /// Weights must be positive and sum to one within `max(1e-12, 8 N eps)`;
    /// widths must be positive, finite and pairwise distinct.
    pub fn new(mut modes: Vec<Mode<T>>) -> Result<Self> {
        if modes.is_empty() {
            return Err(DecayError::InvalidModel("mode set is empty".into()));
        }
        for m in &modes {
            if !(m.w.is_finite() && m.w > T::zero()) {
                return Err(DecayError::InvalidModel(format!("weight {} is not positive", m.w)));
            }
            if !(m.gamma.is_finite() && m.gamma > T::zero()) {
                return Err(DecayError::InvalidModel(format!(
                    "width {} is not positive",
                    m.gamma
                )));
            }
        }
        modes.sort_by(|a, b| a.gamma.partial_cmp(&b.gamma).expect("finite widths"));
        if modes.windows(2).any(|pair| pair[0].gamma >= pair[1].gamma) {
            return Err(DecayError::InvalidModel("widths must be distinct".into()));
        }
        let total = modes.iter().fold(T::zero(), |acc, m| acc + m.w);
        let tol = lit::<T>(1e-12).max(lit::<T>(8.0 * modes.len() as f64) * T::epsilon());
        if (total - T::one()).abs() > tol {
            return Err(DecayError::InvalidModel(format!("weights sum to {total}, not 1")));
        }
        Ok(ExpModeSet { modes })
    }

    /// Like [`ExpModeSet::new`] but rescales the weights to sum to one first.
    pub fn normalized(mut modes: Vec<Mode<T>>) -> Result<Self> {
        let total = modes.iter().fold(T::zero(), |acc, m| acc + m.w);
        if !(total.is_finite() && total > T::zero()) {
            return Err(DecayError::InvalidModel("weights do not have a positive sum".into()));
        }
        for m in &mut modes {
            m.w = m.w / total;
        }
        ExpModeSet::new(modes)
    }

    /// Pure exponential decay with width `gamma`.
    pub fn single(gamma: T) -> Result<Self> {
        ExpModeSet::new(vec![Mode::new(T::one(), gamma)])
    }

    pub fn from_pairs(pairs: &[(T, T)]) -> Result<Self> {
        ExpModeSet::new(pairs.iter().map(|&(w, g)| Mode::new(w, g)).collect())
    }

    pub fn modes(&self) -> &[Mode<T>] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Smallest width.
    pub fn gamma_min(&self) -> T {
        self.modes[0].gamma
    }

    /// Largest width.
    pub fn gamma_max(&self) -> T {
        self.modes[self.modes.len() - 1].gamma
    }

    /// Weighted width sum `sum_j w_j gamma_j`.
    pub fn weighted_width(&self) -> T {
        self.modes.iter().fold(T::zero(), |acc, m| acc + m.w * m.gamma)
    }

    /// Every width multiplied by `factor` (a change of time unit).
    pub fn scaled(&self, factor: T) -> Result<Self> {
        ExpModeSet::new(
            self.modes
                .iter()
                .map(|m| Mode::new(m.w, m.gamma * factor))
                .collect(),
        )
    }

    pub fn cast<U: Real>(&self) -> Result<ExpModeSet<U>> {
        ExpModeSet::normalized(
            self.modes
                .iter()
                .map(|m| Mode::new(lit::<U>(wide(m.w)), lit::<U>(wide(m.gamma))))
                .collect(),
        )
    }

    pub fn modulus(&self, t: T) -> Result<T> {
        evaluate_modulus(self, t)
    }
}

/// `sqrt(P0(t)) = sum_j w_j exp(-gamma_j t / 2)`.
pub fn evaluate_modulus<T: Real>(model: &ExpModeSet<T>, t: T) -> Result<T> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(domain(format!("time must be finite and nonnegative, got {t}")));
    }
    let half = lit::<T>(0.5);
    Ok(model
        .modes
        .iter()
        .fold(T::zero(), |acc, m| acc + m.w * (-m.gamma * t * half).exp()))
}

/// Rest-frame survival probability, the square of [`evaluate_modulus`].
pub fn survival_probability_rest<T: Real>(model: &ExpModeSet<T>, t: T) -> Result<T> {
    let a = evaluate_modulus(model, t)?;
    Ok(a * a)
}

/// Default bound on `gamma_N / M`.
pub const DEFAULT_RATIO_MAX: f64 = 1e-2;

/// Exponential-mode model together with the resonance mass.
#[derive(Debug, Clone, PartialEq)]
pub struct RestModel<T> {
    modes: ExpModeSet<T>,
    mass: T,
    ratio_max: T,
}

impl<T: Real> RestModel<T> {
    pub fn new(modes: ExpModeSet<T>, mass: T) -> Result<Self> {
        RestModel::with_ratio_max(modes, mass, lit(DEFAULT_RATIO_MAX))
    }

    /// Rejects the model unless `gamma_N / mass <= ratio_max`.
    pub fn with_ratio_max(modes: ExpModeSet<T>, mass: T, ratio_max: T) -> Result<Self> {
        if !(mass.is_finite() && mass > T::zero()) {
            return Err(domain(format!("mass must be positive, got {mass}")));
        }
        if !(ratio_max > T::zero()) {
            return Err(domain("ratio_max must be positive"));
        }
        let ratio = modes.gamma_max() / mass;
        if ratio > ratio_max {
            return Err(DecayError::InvalidModel(format!(
                "largest width over mass is {ratio}, above the bound {ratio_max}"
            )));
        }
        Ok(RestModel {
            modes,
            mass,
            ratio_max,
        })
    }

    pub fn modes(&self) -> &ExpModeSet<T> {
        &self.modes
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn ratio_max(&self) -> T {
        self.ratio_max
    }

    /// `gamma_N / M`.
    pub fn width_ratio(&self) -> T {
        self.modes.gamma_max() / self.mass
    }
}

/// Sampled decay trace; times strictly increasing, values in (0, 1] and non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve<T> {
    samples: Vec<(T, T)>,
}

/// What the values of a sampled curve represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    /// `sqrt(P0(t))`, the quantity the fitter works on.
    Modulus,
    /// `P0(t)`; square-rooted before fitting.
    Probability,
}

impl<T: Real> SurvivalCurve<T> {
    pub fn new(samples: Vec<(T, T)>) -> Result<Self> {
        for (i, &(t, v)) in samples.iter().enumerate() {
            if !(t.is_finite() && t >= T::zero()) {
                return Err(domain(format!("sample {i}: time {t} is not a finite nonnegative value")));
            }
            if !(v > T::zero() && v <= T::one()) {
                return Err(domain(format!("sample {i}: value {v} outside (0, 1]")));
            }
        }
        for (i, pair) in samples.windows(2).enumerate() {
            if pair[1].0 <= pair[0].0 {
                return Err(domain(format!("sample {}: times must increase", i + 1)));
            }
            if pair[1].1 > pair[0].1 {
                return Err(domain(format!("sample {}: values must not increase", i + 1)));
            }
        }
        Ok(SurvivalCurve { samples })
    }

    /// Samples `f` on `times`.
    pub fn sample(times: &[T], f: impl Fn(T) -> Result<T>) -> Result<Self> {
        let samples = times
            .iter()
            .map(|&t| f(t).map(|v| (t, v)))
            .collect::<Result<Vec<_>>>()?;
        SurvivalCurve::new(samples)
    }

    pub fn samples(&self) -> &[(T, T)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The curve as `sqrt(P0)` values.
    pub fn into_modulus(self, kind: CurveKind) -> Self {
        match kind {
            CurveKind::Modulus => self,
            CurveKind::Probability => SurvivalCurve {
                samples: self.samples.into_iter().map(|(t, v)| (t, v.sqrt())).collect(),
            },
        }
    }
}

/// Whether `theta = 1` (pure exponential) is accepted by [`stretched_exponential_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaRange {
    #[default]
    Open,
    AllowUnity,
}

/// `exp(-(t / tau)^theta)` for `0 < theta < 1`.
pub fn stretched_exponential<T: Real>(t: T, tau: T, theta: T) -> Result<T> {
    stretched_exponential_with(t, tau, theta, ThetaRange::Open)
}

pub fn stretched_exponential_with<T: Real>(t: T, tau: T, theta: T, range: ThetaRange) -> Result<T> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(domain(format!("time must be nonnegative, got {t}")));
    }
    if !(tau > T::zero()) || !tau.is_finite() {
        return Err(domain(format!("characteristic time must be positive, got {tau}")));
    }
    let upper_ok = match range {
        ThetaRange::Open => theta < T::one(),
        ThetaRange::AllowUnity => theta <= T::one(),
    };
    if !(theta > T::zero() && upper_ok) {
        return Err(domain(format!("stretching exponent {theta} outside (0, 1)")));
    }
    Ok((-(t / tau).powf(theta)).exp())
}
