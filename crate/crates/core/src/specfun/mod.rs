//! Cylinder and Struve functions of order one on the nonnegative real axis.
//!
//! Each function switches between a convergent power series near the origin
//! and an asymptotic (or integral) representation further out. The switch
//! points depend on the scalar's machine epsilon. `J1` and `Y1` leave the
//! power series at x = 2 for a backward recurrence, whose rounding noise
//! stays near `eps`, and switch to the Hankel expansion where its truncation
//! error `e^(-2x)` drops below `eps`: x = 19 for `f64`. The Struve series
//! noise grows like `eps * e^x`; its crossovers sit at 16 and 30.

mod bessel;
mod gamma;
mod struve;

pub use bessel::{bessel_j1, bessel_y1};
pub use gamma::gamma;
pub use struve::struve_h1;

use crate::error::{domain, Result};
use crate::scalar::{lit, Real};

/// Series/asymptotic switch point for `J1` and `Y1`.
pub fn bessel_crossover<T: Real>() -> T {
    log_inv_eps::<T>() / lit(2.0) + T::one()
}

/// Upper end of the power-series regime of `H1`.
pub fn struve_series_limit<T: Real>() -> T {
    log_inv_eps::<T>() / lit(2.25)
}

/// Start of the asymptotic regime of `H1 - Y1`; the Laplace integral covers the gap.
pub fn struve_asymptotic_from<T: Real>() -> T {
    log_inv_eps::<T>() * lit(0.85)
}

fn log_inv_eps<T: Real>() -> T {
    -T::epsilon().ln()
}

fn check_arg<T: Real>(x: T, name: &str) -> Result<()> {
    if !x.is_finite() {
        return Err(domain(format!("{name}: non-finite argument")));
    }
    if x < T::zero() {
        return Err(domain(format!("{name}: negative argument {x}")));
    }
    Ok(())
}
