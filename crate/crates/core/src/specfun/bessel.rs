use super::{bessel_crossover, check_arg};
use crate::error::{DecayError, Result};
use crate::scalar::{lit, Real};

/// Below this the power series loses under a digit to cancellation.
const SERIES_LIMIT: f64 = 2.0;

/// Bessel function of the first kind of order one.
///
/// Power series near the origin, backward recurrence up to
/// [`bessel_crossover`], Hankel expansion above it.
pub fn bessel_j1<T: Real>(x: T) -> Result<T> {
    check_arg(x, "bessel_j1")?;
    if x <= lit(SERIES_LIMIT) {
        Ok(j1_series(x))
    } else if x <= bessel_crossover::<T>() {
        Ok(neumann(x).j1)
    } else {
        let (p, q) = hankel_pq(x);
        let chi = x - lit::<T>(0.75) * T::PI();
        Ok(hankel_prefactor(x) * (p * chi.cos() - q * chi.sin()))
    }
}

/// Bessel function of the second kind of order one.
///
/// Near the origin the log-plus-series form is used, which keeps the
/// `-2/(pi x)` pole separate from the regular part.
pub fn bessel_y1<T: Real>(x: T) -> Result<T> {
    check_arg(x, "bessel_y1")?;
    if x == T::zero() {
        return Err(DecayError::Singularity(
            "bessel_y1 diverges to -infinity at x = 0".into(),
        ));
    }
    if x <= lit(SERIES_LIMIT) {
        Ok(y1_series(x))
    } else if x <= bessel_crossover::<T>() {
        Ok(neumann(x).y1)
    } else {
        let (p, q) = hankel_pq(x);
        let chi = x - lit::<T>(0.75) * T::PI();
        Ok(hankel_prefactor(x) * (p * chi.sin() + q * chi.cos()))
    }
}

pub(super) fn j1_series<T: Real>(x: T) -> T {
    let half = x / lit(2.0);
    let h2 = half * half;
    let mut term = half;
    let mut sum = term;
    for k in 1..500 {
        let kf: T = lit(k as f64);
        term = -term * h2 / (kf * (kf + T::one()));
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() {
            break;
        }
    }
    sum
}

/// Y1(x) = (2/pi)(ln(x/2) + euler_gamma) J1(x) - 2/(pi x) - (1/pi) sum_k (H_k + H_{k+1}) t_k
/// where t_k are the J1 series terms and H_k the harmonic numbers.
fn y1_series<T: Real>(x: T) -> T {
    let half = x / lit(2.0);
    let h2 = half * half;
    let mut term = half;
    let mut j1 = term;
    let mut harmonic_next = T::one();
    let mut weighted = harmonic_next * term;
    for k in 1..500 {
        let kf: T = lit(k as f64);
        term = -term * h2 / (kf * (kf + T::one()));
        let harmonic = harmonic_next;
        harmonic_next = harmonic_next + T::one() / (kf + T::one());
        let contribution = (harmonic + harmonic_next) * term;
        j1 = j1 + term;
        weighted = weighted + contribution;
        if contribution.abs() <= T::epsilon() * weighted.abs()
            && term.abs() <= T::epsilon() * j1.abs()
        {
            break;
        }
    }
    let two_over_pi = T::FRAC_2_PI();
    two_over_pi * ((half.ln() + T::euler_gamma()) * j1 - T::one() / x) - weighted / T::PI()
}

struct Neumann<T> {
    j1: T,
    y1: T,
}

/// `J1` from Miller's backward recurrence normalized by `J0 + 2 sum J_2k = 1`,
/// and `Y1` from the Neumann expansion
/// `(2/pi)(ln(x/2) + euler_gamma) J1 - 2 J0 / (pi x) + (2/pi) sum (-1)^k (J_{2k-1} - J_{2k+1}) / k`.
/// Every term is bounded by one, so the rounding noise stays near `eps`.
fn neumann<T: Real>(x: T) -> Neumann<T> {
    let top = 2 * ((1.5 * x.to_f64().unwrap_or(0.0)) as usize / 2 + 16);
    let big = T::max_value().sqrt();
    let two_over_x = lit::<T>(2.0) / x;
    let mut orders = vec![T::zero(); top + 2];
    orders[top] = T::min_positive_value().sqrt();
    for k in (1..=top).rev() {
        let below = lit::<T>(k as f64) * two_over_x * orders[k] - orders[k + 1];
        orders[k - 1] = below;
        if below.abs() > big {
            for v in orders.iter_mut().skip(k - 1) {
                *v = *v / big;
            }
        }
    }
    let norm = orders[0]
        + lit::<T>(2.0) * orders.iter().skip(2).step_by(2).fold(T::zero(), |acc, &v| acc + v);
    let j: Vec<T> = orders.iter().map(|&v| v / norm).collect();
    let mut sum = T::zero();
    for k in 1..=top / 2 {
        let term = (j[2 * k - 1] - j[2 * k + 1]) / lit(k as f64);
        sum = if k % 2 == 0 { sum + term } else { sum - term };
    }
    let two_over_pi = T::FRAC_2_PI();
    let y1 = two_over_pi * (((x / lit(2.0)).ln() + T::euler_gamma()) * j[1] - j[0] / x + sum);
    Neumann { j1: j[1], y1 }
}

fn hankel_prefactor<T: Real>(x: T) -> T {
    (T::FRAC_2_PI() / x).sqrt()
}

/// Auxiliary P and Q series of the Hankel expansion for order one, summed
/// until the terms stop decreasing.
fn hankel_pq<T: Real>(x: T) -> (T, T) {
    let mu: T = lit(4.0);
    let inv_x = x.recip();
    let mut coeff = T::one();
    let mut power = T::one();
    let mut p = T::one();
    let mut q = T::zero();
    let mut previous = T::infinity();
    for k in 1..200usize {
        let kf: T = lit(k as f64);
        let odd: T = lit((2 * k - 1) as f64);
        coeff = coeff * (mu - odd * odd) / (lit::<T>(8.0) * kf);
        power = power * inv_x;
        let term = coeff * power;
        if term.abs() >= previous {
            break;
        }
        previous = term.abs();
        match k % 4 {
            1 => q = q + term,
            2 => p = p - term,
            3 => q = q - term,
            _ => p = p + term,
        }
        if term.abs() <= T::epsilon() * lit(1e-2) {
            break;
        }
    }
    (p, q)
}


#[cfg(test)]
mod properties {
    use super::*;
    use crate::specfun::struve_h1;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn wronskian(x in 0.5_f64..50.0) {
            let h = 1e-5;
            let dj = (bessel_j1(x + h).unwrap() - bessel_j1(x - h).unwrap()) / (2.0 * h);
            let dy = (bessel_y1(x + h).unwrap() - bessel_y1(x - h).unwrap()) / (2.0 * h);
            let w = bessel_j1(x).unwrap() * dy - dj * bessel_y1(x).unwrap();
            prop_assert!((w - 2.0 / (std::f64::consts::PI * x)).abs() <= 1e-8);
        }

        #[test]
        fn struve_is_nonnegative(x in 0.0_f64..50.0) {
            prop_assert!(struve_h1(x).unwrap() >= 0.0);
        }
    }
}
