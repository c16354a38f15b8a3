use super::bessel::bessel_y1;
use super::{check_arg, struve_asymptotic_from, struve_series_limit};
use crate::error::Result;
use crate::gauss::GaussLegendre;
use crate::scalar::{lit, Real};

/// Struve function of order one.
///
/// Three regimes: the power series, then `Y1` plus the Laplace integral
/// `(2/pi) int_0^inf e^{-s} sqrt(1 + s^2/x^2) ds`, then `Y1` plus the
/// asymptotic series of `H1 - Y1`.
pub fn struve_h1<T: Real>(x: T) -> Result<T> {
    check_arg(x, "struve_h1")?;
    if x <= struve_series_limit::<T>() {
        return Ok(h1_series(x));
    }
    let y1 = bessel_y1(x)?;
    if x <= struve_asymptotic_from::<T>() {
        Ok(y1 + h1_minus_y1_integral(x))
    } else {
        Ok(y1 + h1_minus_y1_asymptotic(x))
    }
}

pub(super) fn h1_series<T: Real>(x: T) -> T {
    let half = x / lit(2.0);
    let h2 = half * half;
    // (x/2)^2 / (Gamma(3/2) Gamma(5/2)) = 2 x^2 / (3 pi)
    let mut term = lit::<T>(2.0) * x * x / (lit::<T>(3.0) * T::PI());
    let mut sum = term;
    for k in 0..500 {
        let kf: T = lit(k as f64);
        term = -term * h2 / ((kf + lit(1.5)) * (kf + lit(2.5)));
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum
}

pub(super) fn h1_minus_y1_integral<T: Real>(x: T) -> T {
    let rule = GaussLegendre::ten();
    let panel: T = lit(2.0);
    let mut total = T::zero();
    for i in 0..20 {
        let center = panel * (lit::<T>(i as f64) + lit(0.5));
        let mut part = T::zero();
        for (node, weight) in rule.nodes.iter().zip(&rule.weights) {
            let s = center + lit::<T>(*node) * panel / lit(2.0);
            let ratio = s / x;
            part = part + lit::<T>(*weight) * (-s).exp() * (T::one() + ratio * ratio).sqrt();
        }
        total = total + part * panel / lit(2.0);
    }
    T::FRAC_2_PI() * total
}

/// (1/pi) sum_k Gamma(k + 1/2) / Gamma(3/2 - k) (2/x)^{2k}, truncated at its smallest term.
pub(super) fn h1_minus_y1_asymptotic<T: Real>(x: T) -> T {
    let ratio = lit::<T>(4.0) / (x * x);
    let mut term: T = lit(2.0);
    let mut sum = term;
    let mut previous = term.abs();
    for k in 0..200 {
        let kf: T = lit(k as f64);
        term = term * (kf + lit(0.5)) * (lit::<T>(0.5) - kf) * ratio;
        if term.abs() >= previous {
            break;
        }
        previous = term.abs();
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum / T::PI()
}
