//! Brute-force survival amplitudes by quadrature over the mass distribution.
//!
//! The rest amplitude is `int w(m) exp(-imt) dm`; the lab amplitude replaces
//! `m` in the phase by `sqrt(p^2 + m^2)`. Integration runs along a deformed
//! contour in the lower half plane: a ray from `m = 0`, a vertical drop at
//! the left end of the resonance region, real-axis panels across it, and a
//! vertical tail to `-i inf` on the right. A threshold density is
//! integrated along a single ray leaving its threshold at `-45` degrees. Along the vertical pieces the
//! phase factor decays instead of oscillating, so late times and large
//! momenta stay affordable. The contour never crosses a pole, so the result
//! equals the real-axis integral.
//!
//! Phases are measured relative to `E(center)`, with `E(center + x) - E(center)`
//! formed without cancellation, so `t E ~ 1e7` does not cost digits.
//!
//! `f64` only.

mod cosine;
mod quad;

pub use cosine::CosineTransform;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::geometric_grid;
use crate::labframe::TailSpec;
use crate::prony::{ExpModeSet, RestModel, SurvivalCurve};
use crate::specfun::gamma;
use quad::Engine;

/// Smooth profile multiplying the threshold power law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FormFactor {
    /// `omega0(m) = omega0(mu0) exp(-(m - mu0) / scale)`.
    Exponential { scale: f64 },
}

/// Mass distribution density.
#[derive(Debug, Clone, PartialEq)]
pub enum MddSpec {
    /// `sum_j (w_j gamma_j / 2pi) / ((m - M)^2 + gamma_j^2 / 4)` on the whole line.
    LorentzianSum { modes: ExpModeSet<f64>, mass: f64 },
    /// Single Lorentzian cut off below `m = 0` and renormalized.
    BreitWigner { mass: f64, width: f64 },
    /// `(m - mu0)^alpha omega0(m)` above `mu0`.
    ThresholdPowerLaw { tail: TailSpec<f64>, form_factor: FormFactor },
}

/// Number of widest widths on either side of the resonance covered by real-axis panels.
const RESONANCE_SPAN: f64 = 20.0;

impl MddSpec {
    pub fn lorentzian_sum(model: &RestModel<f64>) -> Self {
        MddSpec::LorentzianSum {
            modes: model.modes().clone(),
            mass: model.mass(),
        }
    }

    pub fn breit_wigner(mass: f64, width: f64) -> Result<Self> {
        if !(mass > 0.0 && width > 0.0) || !mass.is_finite() || !width.is_finite() {
            return Err(domain(format!("Breit-Wigner needs positive mass and width, got {mass}, {width}")));
        }
        Ok(MddSpec::BreitWigner { mass, width })
    }

    /// Unit-normalized threshold density with an exponential form factor of length `scale`.
    pub fn threshold_power_law(alpha: f64, mu0: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(domain(format!("form-factor scale must be positive, got {scale}")));
        }
        let norm = 1.0 / (gamma(1.0 + alpha)? * scale.powf(1.0 + alpha));
        Ok(MddSpec::ThresholdPowerLaw {
            tail: TailSpec::new(alpha, mu0, norm)?,
            form_factor: FormFactor::Exponential { scale },
        })
    }

    /// Density at real mass `m`.
    pub fn density(&self, m: f64) -> f64 {
        match self {
            MddSpec::LorentzianSum { modes, mass } => lorentz_sum(modes, m - *mass),
            MddSpec::BreitWigner { mass, width } => {
                if m < 0.0 {
                    0.0
                } else {
                    lorentzian(*width, m - mass) / bw_norm(*mass, *width)
                }
            }
            MddSpec::ThresholdPowerLaw { tail, form_factor } => {
                let x = m - tail.mu0;
                if x < 0.0 {
                    0.0
                } else {
                    let FormFactor::Exponential { scale } = form_factor;
                    tail.omega0_at_mu0 * x.powf(tail.alpha) * (-x / scale).exp()
                }
            }
        }
    }

    fn problem(&self, mirror: bool) -> Problem<'_> {
        match self {
            MddSpec::LorentzianSum { modes, mass } => {
                let mass = *mass;
                let terms: Vec<(f64, f64)> = modes
                    .modes()
                    .iter()
                    .map(|m| (m.w * m.gamma / (2.0 * PI), m.gamma * m.gamma / 4.0))
                    .collect();
                Problem {
                    density: Box::new(move |x: Complex64| {
                        let shifted = x + 2.0 * mass;
                        terms.iter().fold(Complex64::new(0.0, 0.0), |acc, &(c, g2)| {
                            let direct = c / (x * x + g2);
                            if mirror {
                                acc + direct + c / (shifted * shifted + g2)
                            } else {
                                acc + direct
                            }
                        })
                    }),
                    center: mass,
                    narrow: modes.gamma_min() / 2.0,
                    wide: modes.gamma_max(),
                    threshold_scale: None,
                }
            }
            MddSpec::BreitWigner { mass, width } => {
                let c = width / (2.0 * PI) / bw_norm(*mass, *width);
                let g2 = width * width / 4.0;
                Problem {
                    density: Box::new(move |x: Complex64| c / (x * x + g2)),
                    center: *mass,
                    narrow: width / 2.0,
                    wide: *width,
                    threshold_scale: None,
                }
            }
            MddSpec::ThresholdPowerLaw { tail, form_factor } => {
                let FormFactor::Exponential { scale } = *form_factor;
                let (c, alpha) = (tail.omega0_at_mu0, tail.alpha);
                Problem {
                    density: Box::new(move |x: Complex64| c * x.powf(alpha) * (-x / scale).exp()),
                    center: tail.mu0,
                    narrow: scale,
                    wide: scale,
                    threshold_scale: Some(scale),
                }
            }
        }
    }
}

fn lorentzian(width: f64, x: f64) -> f64 {
    width / (2.0 * PI) / (x * x + width * width / 4.0)
}

fn lorentz_sum(modes: &ExpModeSet<f64>, x: f64) -> f64 {
    modes.modes().iter().map(|m| m.w * lorentzian(m.gamma, x)).sum()
}

/// Mass of a unit Lorentzian above `m = 0`.
fn bw_norm(mass: f64, width: f64) -> f64 {
    0.5 + (2.0 * mass / width).atan() / PI
}

/// Quadrature controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Relative accuracy target reported by refinement checks.
    pub rel_tol: f64,
    /// Absolute accuracy target per integration path.
    pub abs_tol: f64,
    /// Budget of adaptive panel visits per evaluation.
    pub max_panels: usize,
    /// Real-axis cutoff for the double-integral check; `None` means
    /// `M + max(1e4 gamma_N, 50 M)`.
    pub truncation_mass: Option<f64>,
    /// Gauss–Legendre nodes per panel.
    pub panel_order: usize,
    /// Multiplier on every base panel width.
    pub panel_scale: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-6,
            abs_tol: 1e-13,
            max_panels: 20_000_000,
            truncation_mass: None,
            panel_order: 10,
            panel_scale: 1.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(domain("quadrature tolerances must be positive"));
        }
        if self.max_panels == 0 || self.panel_order < 2 || !(self.panel_scale > 0.0) {
            return Err(domain("quadrature needs a positive panel budget, order >= 2 and scale > 0"));
        }
        Ok(())
    }
}

/// Overall sign of the mass-eigenstate normalization; `|A|^2` does not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum L0Sign {
    #[default]
    Plus,
    Minus,
}

/// Amplitude with its accumulated error estimate and the panel count spent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub amplitude: Complex64,
    pub error: f64,
    pub panels: usize,
}

impl OracleValue {
    pub fn probability(&self) -> f64 {
        self.amplitude.norm_sqr()
    }
}

struct Problem<'a> {
    density: Box<dyn Fn(Complex64) -> Complex64 + Sync + 'a>,
    center: f64,
    /// Distance scale to the nearest singularity from the real axis.
    narrow: f64,
    /// Widest resonance width.
    wide: f64,
    threshold_scale: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
enum Energy {
    Rest,
    Lab { p: f64 },
}

impl Energy {
    fn reference(self, center: f64) -> f64 {
        match self {
            Energy::Rest => center,
            Energy::Lab { p } => p.hypot(center),
        }
    }

    /// `E(center + x) - E(center)`.
    fn delta(self, center: f64, eref: f64, x: Complex64) -> Complex64 {
        match self {
            Energy::Rest => x,
            Energy::Lab { p } => {
                let z = x + center;
                let e = (z * z + p * p).sqrt();
                x * (x + 2.0 * center) / (e + eref)
            }
        }
    }

    fn slope(self, m: f64) -> f64 {
        match self {
            Energy::Rest => 1.0,
            Energy::Lab { p } => m.abs() / p.hypot(m),
        }
    }

    fn curvature(self, m: f64) -> f64 {
        match self {
            Energy::Rest => 0.0,
            Energy::Lab { p } => p * p / p.hypot(m).powi(3),
        }
    }
}

fn evaluate(problem: &Problem<'_>, energy: Energy, t: f64, engine: &mut Engine<'_>) -> Result<Complex64> {
    let center = problem.center;
    let eref = energy.reference(center);
    let integrand = |x: Complex64| -> Complex64 {
        let phase = energy.delta(center, eref, x) * Complex64::new(0.0, -t);
        (problem.density)(x) * phase.exp()
    };
    let decay_len = |m: f64| -> f64 {
        let rate = t * energy.slope(m);
        if rate > 0.0 {
            1.0 / rate
        } else {
            f64::INFINITY
        }
    };

    let sum = if let Some(scale) = problem.threshold_scale {
        let h0 = 1e-6 * scale.min(decay_len(center));
        let dir = Complex64::new(1.0, -1.0);
        let ray = |s: f64| integrand(dir * s) * dir;
        engine.graded(&ray, h0, None)?
    } else {
        let x_a = -(RESONANCE_SPAN * problem.wide).min(center / 2.0);
        let x_c = RESONANCE_SPAN * problem.wide;
        let m_a = center + x_a;
        engine.set_phase_scale(t * x_a.abs().max(x_c));
        let dist = |x: f64| x.hypot(problem.narrow);

        let mut ray_scale = m_a.min(decay_len(m_a));
        if let Energy::Lab { p } = energy {
            if t > 0.0 && p > 0.0 {
                ray_scale = ray_scale.min((p / t).sqrt());
            }
        }
        let dir = Complex64::new(1.0, -1.0);
        let ray = |s: f64| integrand(Complex64::new(s - center, -s)) * dir;
        let from_origin = engine.graded(&ray, 0.25 * ray_scale, Some(m_a))?;

        let drop_a = |s: f64| integrand(Complex64::new(x_a, -s)) * Complex64::new(0.0, -1.0);
        let h_a = 0.25 * dist(x_a).min(decay_len(m_a));
        let left_drop = engine.graded(&drop_a, h_a, Some(m_a))?;

        let step = |x: f64| -> f64 {
            let m = center + x;
            let mut h = 0.5 * dist(x);
            if t > 0.0 {
                h = h.min(PI * decay_len(m));
                let curv = energy.curvature(m);
                if curv > 0.0 {
                    h = h.min((PI / (t * curv)).sqrt());
                }
            }
            h
        };
        let real = |x: f64| integrand(Complex64::new(x, 0.0));
        let resonance = engine.march(&real, x_a, x_c, &step)?;

        let drop_c = |s: f64| integrand(Complex64::new(x_c, -s)) * Complex64::new(0.0, -1.0);
        let h_c = 0.25 * dist(x_c).min(decay_len(center + x_c));
        let right_tail = engine.graded(&drop_c, h_c, None)?;

        from_origin - left_drop + resonance + right_tail
    };
    Ok(sum * Complex64::new(0.0, -eref * t).exp())
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(domain(format!("time must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

fn run(mdd: &MddSpec, energy: Energy, t: f64, cfg: &QuadratureConfig) -> Result<OracleValue> {
    cfg.validate()?;
    check_time(t)?;
    let problem = mdd.problem(true);
    let mut engine = Engine::new(cfg);
    let amplitude = evaluate(&problem, energy, t, &mut engine)?;
    Ok(OracleValue {
        amplitude,
        error: engine.error,
        panels: engine.panels,
    })
}

/// Rest-frame amplitude `int_0^inf w(m) exp(-imt) dm`.
///
/// A Lorentzian sum is folded onto `m >= 0` with its mirror term, exactly as
/// in the lab amplitude, so the two agree at `p = 0`.
pub fn amplitude_rest_oracle(mdd: &MddSpec, t: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    Ok(run(mdd, Energy::Rest, t, cfg)?.amplitude)
}

/// Lab-frame amplitude `int_0^inf w(m) exp(-i sqrt(p^2 + m^2) t) dm`.
pub fn amplitude_lab_oracle(mdd: &MddSpec, p: f64, t: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    Ok(amplitude_lab_oracle_detailed(mdd, p, t, cfg, L0Sign::Plus)?.amplitude)
}

pub fn amplitude_lab_oracle_detailed(
    mdd: &MddSpec,
    p: f64,
    t: f64,
    cfg: &QuadratureConfig,
    sign: L0Sign,
) -> Result<OracleValue> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(domain(format!("momentum must be finite and nonnegative, got {p}")));
    }
    let mut value = run(mdd, Energy::Lab { p }, t, cfg)?;
    if sign == L0Sign::Minus {
        value.amplitude = -value.amplitude;
    }
    Ok(value)
}

/// [`amplitude_lab_oracle_detailed`] over `times`, evaluated in parallel, in input order.
pub fn amplitude_lab_oracle_grid(
    mdd: &MddSpec,
    p: f64,
    times: &[f64],
    cfg: &QuadratureConfig,
) -> Vec<Result<OracleValue>> {
    times
        .par_iter()
        .map(|&t| amplitude_lab_oracle_detailed(mdd, p, t, cfg, L0Sign::Plus))
        .collect()
}

/// `int_{-inf}^0 w(m) exp(-imt) dm` for the full-line Lorentzian sum, via the
/// negative imaginary axis.
pub fn negative_mass_contribution(modes: &ExpModeSet<f64>, mass: f64, t: f64, cfg: &QuadratureConfig) -> Result<Complex64> {
    cfg.validate()?;
    check_time(t)?;
    let spec = MddSpec::LorentzianSum {
        modes: modes.clone(),
        mass,
    };
    let problem = spec.problem(false);
    let mut engine = Engine::new(cfg);
    let f = |s: f64| {
        let x = Complex64::new(-mass, -s);
        (problem.density)(x) * (-s * t).exp()
    };
    let scale = if t > 0.0 { mass.min(1.0 / t) } else { mass };
    let integral = engine.graded(&f, 0.25 * scale, None)?;
    Ok(integral * Complex64::new(0.0, 1.0))
}

/// Total mass of the density on its support, with analytic Lorentzian tails
/// beyond `1e4` widest widths.
pub fn total_mass(mdd: &MddSpec, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    let mut engine = Engine::new(cfg);
    let f = |x: f64| Complex64::new(mdd.density(x), 0.0);
    match mdd {
        MddSpec::LorentzianSum { modes, mass } => {
            let span = 1e4 * modes.gamma_max();
            let narrow = modes.gamma_min() / 2.0;
            let core = engine.march(&f, mass - span, mass + span, &|m| 0.5 * (m - mass).hypot(narrow))?;
            let tails: f64 = modes
                .modes()
                .iter()
                .map(|m| m.w * 2.0 / PI * (m.gamma / (2.0 * span)).atan())
                .sum();
            Ok(core.re + tails)
        }
        MddSpec::BreitWigner { mass, width } => {
            let span = 1e4 * width;
            let core = engine.march(&f, 0.0, mass + span, &|m| 0.5 * (m - mass).hypot(width / 2.0))?;
            Ok(core.re + (width / (2.0 * span)).atan() / PI / bw_norm(*mass, *width))
        }
        MddSpec::ThresholdPowerLaw { tail, form_factor } => {
            let FormFactor::Exponential { scale } = *form_factor;
            let core = engine.march(&f, tail.mu0, tail.mu0 + 80.0 * scale, &|_| scale / 4.0)?;
            Ok(core.re)
        }
    }
}

/// What the inverse cosine transform is applied to.
#[derive(Debug, Clone, Copy)]
pub enum ModulusSource<'a> {
    /// Closed-form transform of each exponential mode.
    Modes(&'a ExpModeSet<f64>),
    /// Sampled modulus, interpolated by a natural cubic spline.
    Samples(&'a SurvivalCurve<f64>),
}

/// `w(M + m') = (1/pi) |int_0^inf a(t) cos(m' t) dt|` for a survival modulus `a`.
pub fn mdd_from_modulus(source: ModulusSource<'_>, m_offset: f64) -> Result<f64> {
    if !m_offset.is_finite() {
        return Err(domain("mass offset must be finite"));
    }
    match source {
        ModulusSource::Modes(modes) => Ok(lorentz_sum(modes, m_offset)),
        ModulusSource::Samples(curve) => Ok(CosineTransform::new(curve)?.density(m_offset)),
    }
}

/// Lab survival probability from the nested integral: the density is
/// rebuilt from a sampled rest modulus by inverse cosine transform and then
/// integrated along the real mass axis up to the truncation mass.
pub fn double_integral_link_check(model: &RestModel<f64>, p: f64, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    check_time(t)?;
    if !(p >= 0.0) || !p.is_finite() {
        return Err(domain(format!("momentum must be finite and nonnegative, got {p}")));
    }
    let modes = model.modes();
    let mass = model.mass();
    let m_max = cfg
        .truncation_mass
        .unwrap_or(mass + (1e4 * modes.gamma_max()).max(50.0 * mass));
    if !(m_max > mass) {
        return Err(domain(format!("truncation mass {m_max} must exceed M = {mass}")));
    }
    let times = geometric_grid(1e-3 / modes.gamma_max(), 40.0 / modes.gamma_min(), 400)?;
    let curve = SurvivalCurve::sample(&times, |s| modes.modulus(s))?;
    let transform = CosineTransform::new(&curve)?;

    let energy = Energy::Lab { p };
    let eref = energy.reference(mass);
    let f = |x: f64| {
        let density = transform.density(x) + transform.density(x + 2.0 * mass);
        let phase = energy.delta(mass, eref, Complex64::new(x, 0.0)) * Complex64::new(0.0, -t);
        phase.exp() * density
    };
    let narrow = modes.gamma_min() / 2.0;
    let step = |x: f64| {
        let m = mass + x;
        let mut h = 0.5 * x.hypot(narrow);
        if t > 0.0 {
            let slope = energy.slope(m);
            if slope > 0.0 {
                h = h.min(PI / (t * slope));
            }
            let curv = energy.curvature(m);
            if curv > 0.0 {
                h = h.min((PI / (t * curv)).sqrt());
            }
        }
        h
    };
    let mut engine = Engine::new(cfg);
    let integral = engine.march(&f, -mass, m_max - mass, &step)?;
    Ok(integral.norm_sqr())
}
