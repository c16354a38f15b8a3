//! Adaptive composite Gauss–Legendre quadrature of complex integrands.

use num_complex::Complex64;

use crate::error::{DecayError, Result};
use crate::gauss::GaussLegendre;

use super::QuadratureConfig;

pub(crate) struct Engine<'a> {
    cfg: &'a QuadratureConfig,
    rule: GaussLegendre,
    pub panels: usize,
    pub error: f64,
    /// Relative roundoff of one integrand value.
    noise: f64,
}

impl<'a> Engine<'a> {
    pub fn new(cfg: &'a QuadratureConfig) -> Self {
        let rule = if cfg.panel_order == 10 {
            GaussLegendre::ten().clone()
        } else {
            GaussLegendre::new(cfg.panel_order)
        };
        Engine {
            cfg,
            rule,
            panels: 0,
            error: 0.0,
            noise: 64.0 * f64::EPSILON,
        }
    }

    /// Widens the roundoff floor for integrands whose phase reaches `phase` radians.
    pub fn set_phase_scale(&mut self, phase: f64) {
        self.noise = 64.0 * f64::EPSILON * (1.0 + phase.abs());
    }

    /// Fixed rule on `[a, b]`, returning the integral and the integral of `|f|`.
    fn rule_on(&self, f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut abs = 0.0;
        for (x, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            let v = f(mid + half * x);
            sum += v * *w;
            abs += v.norm() * w;
        }
        (sum * half, abs * half.abs())
    }

    /// Integral over `[a, b]`, bisecting panels until the two-half estimate
    /// agrees with the whole-panel one to `tol` or to roundoff.
    pub fn adaptive(&mut self, f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Result<Complex64> {
        let mut total = Complex64::new(0.0, 0.0);
        let mut stack = vec![(a, b, tol, self.rule_on(f, a, b).0)];
        while let Some((lo, hi, tol, coarse)) = stack.pop() {
            self.panels += 1;
            if self.panels > self.cfg.max_panels {
                return Err(DecayError::Precision {
                    estimate: total + coarse,
                    error: self.error.max((coarse).norm()),
                });
            }
            let mid = 0.5 * (lo + hi);
            let (left, left_abs) = self.rule_on(f, lo, mid);
            let (right, right_abs) = self.rule_on(f, mid, hi);
            let fine = left + right;
            let diff = (fine - coarse).norm();
            let floor = self.noise * (left_abs + right_abs);
            let narrow = (hi - lo) <= 1e-13 * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
            if diff <= tol.max(floor) || narrow {
                total += fine;
                self.error += diff;
            } else {
                stack.push((mid, hi, 0.5 * tol, right));
                stack.push((lo, mid, 0.5 * tol, left));
            }
        }
        Ok(total)
    }

    /// Integral over `[a, b]` marched in panels of width `step(x)`.
    pub fn march(
        &mut self,
        f: &dyn Fn(f64) -> Complex64,
        a: f64,
        b: f64,
        step: &dyn Fn(f64) -> f64,
    ) -> Result<Complex64> {
        let span = b - a;
        let mut total = Complex64::new(0.0, 0.0);
        let mut x = a;
        while x < b {
            let h = step(x) * self.cfg.panel_scale;
            let h = h.max(span * 1e-12);
            let mut x1 = x + h;
            if x1 >= b || b - x1 < 0.25 * h {
                x1 = b;
            }
            let tol = self.cfg.abs_tol * (x1 - x) / span;
            total += self.adaptive(f, x, x1, tol)?;
            x = x1;
        }
        Ok(total)
    }

    /// Integral over `[0, length)` (or `[0, inf)`) with panels growing from `h0`
    /// by doubling; stops once the integrand has decayed below the tolerance.
    pub fn graded(&mut self, f: &dyn Fn(f64) -> Complex64, h0: f64, length: Option<f64>) -> Result<Complex64> {
        let tail_tol = self.cfg.abs_tol * 1e-2;
        let mut total = Complex64::new(0.0, 0.0);
        let mut s = 0.0;
        let mut h = (h0 * self.cfg.panel_scale).max(f64::MIN_POSITIVE);
        let mut prev = f64::INFINITY;
        for k in 0..4000 {
            let mut b = s + h;
            if let Some(len) = length {
                if b >= len || len - b < h {
                    b = len;
                }
            }
            total += self.adaptive(f, s, b, self.cfg.abs_tol / 64.0)?;
            if Some(b) == length {
                return Ok(total);
            }
            let fb = f(b).norm();
            if k >= 3 && fb * (b + 2.0 * h) < tail_tol && fb <= prev {
                self.error += fb * b;
                return Ok(total);
            }
            prev = fb;
            s = b;
            h *= 2.0;
        }
        Err(DecayError::Precision {
            estimate: total,
            error: f64::INFINITY,
        })
    }
}
