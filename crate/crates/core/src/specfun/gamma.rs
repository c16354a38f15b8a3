use crate::error::{domain, Result};
use crate::scalar::{lit, Real};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for positive real arguments (Lanczos approximation).
pub fn gamma<T: Real>(x: T) -> Result<T> {
    if !x.is_finite() || x <= T::zero() {
        return Err(domain(format!("gamma: argument {x} must be positive and finite")));
    }
    if x < lit(0.5) {
        // reflection keeps the Lanczos sum in its accurate range
        let s = (T::PI() * x).sin();
        return Ok(T::PI() / (s * gamma(T::one() - x)?));
    }
    let z = x - T::one();
    let mut acc: T = lit(LANCZOS[0]);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + lit::<T>(*c) / (z + lit(i as f64));
    }
    let t = z + lit(LANCZOS_G + 0.5);
    Ok((T::PI() * lit(2.0)).sqrt() * t.powf(z + lit(0.5)) * (-t).exp() * acc)
}
