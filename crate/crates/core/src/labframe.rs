//! Closed-form laboratory-frame survival probability and its ingredients.
//!
//! For a mode set `(w_j, gamma_j)` with resonance mass `M` observed at
//! momentum `p` the amplitude is approximated by
//!
//! ```text
//! sum_j w_j exp(-upsilon_j t / 2) + i c Xi(M, p, t),    c = p sum_j w_j gamma_j / (pi M^2)
//! ```
//!
//! where `upsilon_j = lambda_minus + i lambda_plus` and `Xi` is built from
//! `J1`, `Y1` and `H1` at `pt`. See [`PhaseConvention`] for the orientation
//! of the `Xi` term.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{domain, DecayError, Result};
use crate::prony::RestModel;
use crate::scalar::{lit, wide, Real};
use crate::specfun::{bessel_j1, bessel_y1, gamma as gamma_fn, struve_h1};

/// Momentum of the observer together with the Lorentz factor it implies for a given mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabContext<T> {
    mass: T,
    p: T,
    gamma: T,
}

impl<T: Real> LabContext<T> {
    pub fn new(mass: T, p: T) -> Result<Self> {
        let gamma = lorentz_gamma(mass, p)?;
        Ok(LabContext { mass, p, gamma })
    }

    pub fn for_model(model: &RestModel<T>, p: T) -> Result<Self> {
        LabContext::new(model.mass(), p)
    }

    /// Context whose momentum produces the Lorentz factor `gamma`.
    pub fn with_gamma(mass: T, gamma: T) -> Result<Self> {
        if !(gamma >= T::one()) || !gamma.is_finite() {
            return Err(domain(format!("Lorentz factor must be at least 1, got {gamma}")));
        }
        let p = mass * (gamma * gamma - T::one()).sqrt();
        let mut ctx = LabContext::new(mass, p)?;
        ctx.gamma = gamma;
        Ok(ctx)
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    fn check_model(&self, model: &RestModel<T>) -> Result<()> {
        if self.mass != model.mass() {
            return Err(domain(format!(
                "context built for mass {} but model has mass {}",
                self.mass,
                model.mass()
            )));
        }
        Ok(())
    }
}

fn check_mass_width<T: Real>(mass: T, width: T, p: T) -> Result<()> {
    if !(mass > T::zero()) || !mass.is_finite() {
        return Err(domain(format!("mass must be positive, got {mass}")));
    }
    if !(width > T::zero()) || !width.is_finite() {
        return Err(domain(format!("width must be positive, got {width}")));
    }
    if !(p >= T::zero()) || !p.is_finite() {
        return Err(domain(format!("momentum must be nonnegative, got {p}")));
    }
    Ok(())
}

/// `sqrt(1 + p^2 / M^2)`.
pub fn lorentz_gamma<T: Real>(mass: T, p: T) -> Result<T> {
    if !(mass > T::zero()) || !mass.is_finite() {
        return Err(domain(format!("mass must be positive, got {mass}")));
    }
    if !(p >= T::zero()) || !p.is_finite() {
        return Err(domain(format!("momentum must be nonnegative, got {p}")));
    }
    Ok(T::one().hypot(p / mass))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaPair<T> {
    pub minus: T,
    pub plus: T,
}

/// `lambda_-+ = sqrt(2 (R -+ A))` with `A = M^2 - gamma^2/4 + p^2` and `R = sqrt(A^2 + M^2 gamma^2)`.
///
/// The smaller root is taken from the product `lambda_- lambda_+ = 2 M gamma`;
/// forming `R - A` directly loses every digit once `gamma / M` drops below
/// about `1e-8`.
pub fn lambda_mp<T: Real>(mass: T, width: T, p: T) -> Result<LambdaPair<T>> {
    check_mass_width(mass, width, p)?;
    let two: T = lit(2.0);
    let a = mass * mass - width * width / lit(4.0) + p * p;
    let r = a.hypot(mass * width);
    let product = two * mass * width;
    Ok(if a >= T::zero() {
        let plus = (two * (r + a)).sqrt();
        LambdaPair {
            minus: product / plus,
            plus,
        }
    } else {
        let minus = (two * (r - a)).sqrt();
        LambdaPair {
            minus,
            plus: product / minus,
        }
    })
}

/// Complex rate `lambda_- + i lambda_+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexRate<T> {
    pub decay: T,
    pub phase: T,
}

impl<T: Real> ComplexRate<T> {
    pub fn to_complex(self) -> Complex<T> {
        Complex::new(self.decay, self.phase)
    }
}

pub fn upsilon<T: Real>(mass: T, width: T, p: T) -> Result<ComplexRate<T>> {
    let pair = lambda_mp(mass, width, p)?;
    Ok(ComplexRate {
        decay: pair.minus,
        phase: pair.plus,
    })
}

/// `2 |Im sqrt((M - i gamma/2)^2 + p^2)|`, through the principal complex square root.
pub fn gamma_p_exact<T: Real>(mass: T, width: T, p: T) -> Result<T> {
    check_mass_width(mass, width, p)?;
    let pole = Complex::new(mass, -width / lit(2.0));
    let root = (pole * pole + Complex::new(p * p, T::zero())).sqrt();
    Ok(lit::<T>(2.0) * root.im.abs())
}

/// `kappa = gamma^2 (g^2 - 1) / (8 M^2 g^4)` with `g` the Lorentz factor.
pub fn bw_kappa<T: Real>(mass: T, width: T, p: T) -> Result<T> {
    check_mass_width(mass, width, p)?;
    let g = lorentz_gamma(mass, p)?;
    let g2 = g * g;
    Ok(width * width * (g2 - T::one()) / (lit::<T>(8.0) * mass * mass * g2 * g2))
}

/// Single Breit-Wigner mode in the lab frame with the kappa-corrected rates,
/// `exp(-((1 + kappa) gamma / (2 g) + i (1 - kappa) M g) t)`.
pub fn breit_wigner_lab_mode<T: Real>(mass: T, width: T, p: T, t: T) -> Result<Complex<T>> {
    check_time(t)?;
    let kappa = bw_kappa(mass, width, p)?;
    let g = lorentz_gamma(mass, p)?;
    let exponent = Complex::new(
        -(T::one() + kappa) * width / (lit::<T>(2.0) * g),
        -(T::one() - kappa) * mass * g,
    ) * t;
    Ok(exponent.exp())
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(domain(format!("time must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

/// `Xi(M, p, t) = (pi/2)(H1 - i J1) - 1 + ((1 - q^2)/(1 + q^2)^2)(1 + (pi/2)(Y1 - H1))`
/// evaluated at `pt`, with `q = p / M`.
pub fn xi_function<T: Real>(mass: T, p: T, t: T) -> Result<Complex<T>> {
    if !(mass > T::zero()) {
        return Err(domain(format!("mass must be positive, got {mass}")));
    }
    if !(p >= T::zero() && t >= T::zero()) {
        return Err(domain("momentum and time must be nonnegative"));
    }
    let x = p * t;
    if x == T::zero() {
        return Err(DecayError::Singularity(
            "Xi needs pt > 0: Y1 diverges at the origin".into(),
        ));
    }
    let j1 = bessel_j1(x)?;
    let y1 = bessel_y1(x)?;
    let h1 = struve_h1(x)?;
    let half_pi = T::FRAC_PI_2();
    let q2 = (p / mass) * (p / mass);
    let coef = (T::one() - q2) / ((T::one() + q2) * (T::one() + q2));
    let re = half_pi * h1 - T::one() + coef * (T::one() + half_pi * (y1 - h1));
    let im = -half_pi * j1;
    Ok(Complex::new(re, im))
}

/// Large-`pt` form `-i sqrt(pi / (2 pt)) exp(i (pt - 3 pi / 4))`.
pub fn xi_asymptotic<T: Real>(p: T, t: T) -> Result<Complex<T>> {
    let x = p * t;
    if !(x > T::zero()) || !x.is_finite() {
        return Err(domain(format!("pt must be positive, got {x}")));
    }
    let modulus = (T::PI() / (lit::<T>(2.0) * x)).sqrt();
    let phase = x - lit::<T>(0.75) * T::PI() - T::FRAC_PI_2();
    Ok(Complex::from_polar(modulus, phase))
}

/// Orientation of the `Xi` term relative to the mode sum.
///
/// With the mode phases `exp(-i lambda_+ t / 2)`, the stationary point of
/// the mass integral at `m = 0` produces `i c conj(Xi)`; the printed
/// combination `i c Xi` has the background rotating the opposite way, which
/// alters the interference with the modes at the `1e-3` level. `Consistent`
/// is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum PhaseConvention {
    #[default]
    Consistent,
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabOptions<T> {
    /// Threshold standing in for "much greater than one".
    pub validity_factor: T,
    /// Clamp the probability into `[0, 1]`.
    pub clamp: bool,
    pub phase: PhaseConvention,
}

impl<T: Real> Default for LabOptions<T> {
    fn default() -> Self {
        LabOptions {
            validity_factor: lit(10.0),
            clamp: false,
            phase: PhaseConvention::Consistent,
        }
    }
}

/// Regime indicators of a closed-form evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityMargins {
    /// `t max(10 gamma_1, M)`; the form needs `t > 1/(10 gamma_1)` or `Mt >> 1`.
    pub short_time: f64,
    /// `pt`.
    pub pt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidityWarning {
    VeryShortTime { margin: f64 },
    SmallPt { pt: f64 },
    Clamped { raw: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabSurvival<T> {
    pub value: T,
    pub margins: ValidityMargins,
    pub warnings: Vec<ValidityWarning>,
}

impl<T> LabSurvival<T> {
    pub fn is_valid_regime(&self) -> bool {
        self.warnings
            .iter()
            .all(|w| matches!(w, ValidityWarning::Clamped { .. }))
    }
}

/// `sum_j w_j exp(-upsilon_j t / 2)`.
pub fn mode_sum_lab<T: Real>(model: &RestModel<T>, ctx: &LabContext<T>, t: T) -> Result<Complex<T>> {
    ctx.check_model(model)?;
    check_time(t)?;
    let half = lit::<T>(0.5);
    let mut sum = Complex::new(T::zero(), T::zero());
    for m in model.modes().modes() {
        let rate = upsilon(model.mass(), m.gamma, ctx.p)?.to_complex();
        sum = sum + (rate * (-t * half)).exp() * m.w;
    }
    Ok(sum)
}

/// Power-law background `i c Xi` (or `i c conj(Xi)`), zero at `p = 0`.
pub fn background_term<T: Real>(
    model: &RestModel<T>,
    ctx: &LabContext<T>,
    t: T,
    phase: PhaseConvention,
) -> Result<Complex<T>> {
    ctx.check_model(model)?;
    if ctx.p == T::zero() {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    let mass = model.mass();
    let c = ctx.p * model.modes().weighted_width() / (T::PI() * mass * mass);
    let xi = xi_function(mass, ctx.p, t)?;
    let xi = match phase {
        PhaseConvention::Consistent => xi.conj(),
        PhaseConvention::Printed => xi,
    };
    Ok(Complex::new(T::zero(), c) * xi)
}

/// Closed-form amplitude whose squared modulus is [`survival_probability_lab`].
pub fn lab_amplitude<T: Real>(
    model: &RestModel<T>,
    ctx: &LabContext<T>,
    t: T,
    phase: PhaseConvention,
) -> Result<Complex<T>> {
    Ok(mode_sum_lab(model, ctx, t)? + background_term(model, ctx, t, phase)?)
}

/// Closed-form lab-frame survival probability with regime diagnostics.
pub fn survival_probability_lab<T: Real>(
    model: &RestModel<T>,
    ctx: &LabContext<T>,
    t: T,
    opts: &LabOptions<T>,
) -> Result<LabSurvival<T>> {
    let amp = lab_amplitude(model, ctx, t, opts.phase)?;
    let raw = amp.norm_sqr();
    let ten: T = lit(10.0);
    let short_time = t * (ten * model.modes().gamma_min()).max(model.mass());
    let pt = ctx.p * t;
    let margins = ValidityMargins {
        short_time: wide(short_time),
        pt: wide(pt),
    };
    let mut warnings = Vec::new();
    if short_time < opts.validity_factor {
        warnings.push(ValidityWarning::VeryShortTime {
            margin: margins.short_time,
        });
    }
    if ctx.p > T::zero() && pt < opts.validity_factor {
        warnings.push(ValidityWarning::SmallPt { pt: margins.pt });
    }
    let value = if opts.clamp && (raw > T::one() || raw < T::zero()) {
        warnings.push(ValidityWarning::Clamped { raw: wide(raw) });
        raw.max(T::zero()).min(T::one())
    } else {
        raw
    };
    Ok(LabSurvival {
        value,
        margins,
        warnings,
    })
}

/// `sum_j w_j exp(-(t/2)(gamma_j / g + 2 i M g))`.
pub fn exp_mode_sum_lab<T: Real>(model: &RestModel<T>, ctx: &LabContext<T>, t: T) -> Result<Complex<T>> {
    ctx.check_model(model)?;
    check_time(t)?;
    let g = ctx.gamma;
    let half = lit::<T>(0.5);
    let decay = model
        .modes()
        .modes()
        .iter()
        .fold(T::zero(), |acc, m| acc + m.w * (-half * t * m.gamma / g).exp());
    // the phase is common to every mode
    Ok(Complex::from_polar(decay, -model.mass() * g * t))
}

/// Threshold behaviour of a mass density: `(m - mu0)^alpha omega0(m)` near `mu0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSpec<T> {
    pub alpha: T,
    pub mu0: T,
    pub omega0_at_mu0: T,
}

impl<T: Real> TailSpec<T> {
    pub fn new(alpha: T, mu0: T, omega0_at_mu0: T) -> Result<Self> {
        if !(alpha >= T::zero()) || !alpha.is_finite() {
            return Err(domain(format!("threshold exponent must be nonnegative, got {alpha}")));
        }
        if !(mu0 > T::zero()) || !mu0.is_finite() {
            return Err(domain(format!("spectral lower bound must be positive, got {mu0}")));
        }
        if !(omega0_at_mu0 > T::zero()) || !omega0_at_mu0.is_finite() {
            return Err(domain("form factor at threshold must be positive"));
        }
        Ok(TailSpec {
            alpha,
            mu0,
            omega0_at_mu0,
        })
    }

    /// `sqrt(1 + p^2 / mu0^2)`.
    pub fn chi(&self, p: T) -> T {
        T::one().hypot(p / self.mu0)
    }
}

/// `(Gamma(1 + alpha) omega0(mu0))^2 (chi_p / t)^(2 (1 + alpha))`.
pub fn power_law_tail<T: Real>(spec: &TailSpec<T>, p: T, t: T) -> Result<T> {
    if !(t > T::zero()) || !t.is_finite() {
        return Err(domain(format!("time must be positive, got {t}")));
    }
    if !(p >= T::zero()) || !p.is_finite() {
        return Err(domain(format!("momentum must be nonnegative, got {p}")));
    }
    let one_plus = T::one() + spec.alpha;
    let amp = gamma_fn(one_plus)? * spec.omega0_at_mu0;
    Ok(amp * amp * (spec.chi(p) / t).powf(lit::<T>(2.0) * one_plus))
}
