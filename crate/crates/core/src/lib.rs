//! Laboratory-frame decay laws of moving unstable systems.
//!
//! A rest-frame survival amplitude is represented as a finite sum of
//! exponential modes. From that representation the crate evaluates the
//! closed-form survival probability at fixed linear momentum, estimates the
//! window of exponential times, and computes the time map `phi_p` that
//! relates the two frames. The `oracle` module evaluates the defining mass
//! integrals by quadrature and is used to check everything else.
//!
//! Scalar-generic code takes `T: Real` (`f32` or `f64`); the aliases at the
//! crate root fix `T = f64`. Fitting and quadrature run in `f64` only.

pub mod error;
pub mod gauss;
pub mod grid;
pub mod labframe;
pub mod oracle;
pub mod prony;
pub mod scalar;
pub mod specfun;
pub mod timemap;
pub mod windows;

pub use error::{DecayError, Result};
pub use scalar::Real;

pub type ExpModeSetF64 = prony::ExpModeSet<f64>;
pub type RestModelF64 = prony::RestModel<f64>;
pub type SurvivalCurveF64 = prony::SurvivalCurve<f64>;
pub type LabContextF64 = labframe::LabContext<f64>;
pub type TailSpecF64 = labframe::TailSpec<f64>;
pub type IntervalSetF64 = windows::IntervalSet<f64>;
pub type ZetaBoundsF64 = windows::ZetaBounds<f64>;
pub type WindowReportF64 = windows::WindowReport<f64>;

pub type ExpModeSetF32 = prony::ExpModeSet<f32>;
pub type RestModelF32 = prony::RestModel<f32>;
pub type LabContextF32 = labframe::LabContext<f32>;
