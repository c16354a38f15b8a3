//! Sample grids.

use crate::error::{domain, Result};
use crate::scalar::{lit, Real};

/// How points are spread between the grid ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Geometric,
}

/// `points` samples from `lo` to `hi` inclusive.
pub fn make_grid<T: Real>(lo: T, hi: T, points: usize, spacing: Spacing) -> Result<Vec<T>> {
    if points < 2 {
        return Err(domain(format!("grid needs at least 2 points, got {points}")));
    }
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(domain(format!("grid bounds must satisfy lo < hi, got {lo}..{hi}")));
    }
    let steps: T = lit((points - 1) as f64);
    let out = match spacing {
        Spacing::Linear => (0..points)
            .map(|i| lo + (hi - lo) * lit::<T>(i as f64) / steps)
            .collect(),
        Spacing::Geometric => {
            if lo <= T::zero() {
                return Err(domain("geometric grid needs lo > 0"));
            }
            let ratio = (hi / lo).ln();
            (0..points)
                .map(|i| lo * (ratio * lit::<T>(i as f64) / steps).exp())
                .collect()
        }
    };
    let mut out: Vec<T> = out;
    // pin the endpoints against rounding in exp/ln
    out[0] = lo;
    out[points - 1] = hi;
    Ok(out)
}

pub fn geometric_grid<T: Real>(lo: T, hi: T, points: usize) -> Result<Vec<T>> {
    make_grid(lo, hi, points, Spacing::Geometric)
}

pub fn linear_grid<T: Real>(lo: T, hi: T, points: usize) -> Result<Vec<T>> {
    make_grid(lo, hi, points, Spacing::Linear)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_ratio() {
        let g = geometric_grid(1.0_f64, 100.0, 3).unwrap();
        assert_eq!(g[0], 1.0);
        assert!((g[1] - 10.0).abs() < 1e-12);
        assert_eq!(g[2], 100.0);
        let l = linear_grid(0.0_f64, 1.0, 5).unwrap();
        assert_eq!(l, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(linear_grid(1.0_f64, 1.0, 4).is_err());
        assert!(geometric_grid(0.0_f64, 1.0, 4).is_err());
        assert!(linear_grid(0.0_f64, 1.0, 1).is_err());
    }
}
