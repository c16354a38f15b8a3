//! Inverse cosine transform of a sampled survival modulus.
//!
//! The samples are joined by a natural cubic spline and each cubic piece is
//! transformed exactly (Filon-type moments), so the result carries no
//! oscillation error and the far wings see only the `C^2` spline's tiny
//! third-derivative jumps. Past the last sample the modulus is continued as
//! an exponential with the rate of the final interval.

use num_complex::Complex64;

use crate::error::{domain, DecayError, Result};
use crate::prony::SurvivalCurve;

#[derive(Debug, Clone, Copy)]
struct Piece {
    start: f64,
    width: f64,
    /// Cubic coefficients in the local variable `u = (t - start) / width`.
    coef: [f64; 4],
}

/// `(1/pi) |int_0^inf a(t) cos(m t) dt|` for a spline-interpolated modulus `a`.
#[derive(Debug, Clone)]
pub struct CosineTransform {
    pieces: Vec<Piece>,
    tail_start: f64,
    tail_value: f64,
    tail_rate: f64,
}

impl CosineTransform {
    /// An implicit `(0, 1)` point is prepended when the curve starts later.
    pub fn new(curve: &SurvivalCurve<f64>) -> Result<Self> {
        let mut pts: Vec<(f64, f64)> = curve.samples().to_vec();
        if pts.first().map(|p| p.0 > 0.0).unwrap_or(true) {
            pts.insert(0, (0.0, 1.0));
        }
        if pts.len() < 3 {
            return Err(DecayError::InsufficientSamples {
                needed: 3,
                got: pts.len(),
            });
        }
        let n = pts.len();
        let (t_end, a_end) = pts[n - 1];
        let (t_prev, a_prev) = pts[n - 2];
        if !(a_end > 0.0 && a_prev > a_end) {
            return Err(DecayError::Precision {
                estimate: Complex64::new(f64::NAN, 0.0),
                error: f64::INFINITY,
            });
        }
        if pts.iter().any(|p| !p.1.is_finite()) {
            return Err(domain("modulus samples must be finite"));
        }
        let second = natural_spline_second_derivatives(&pts);
        let pieces = pts
            .windows(2)
            .zip(second.windows(2))
            .map(|(w, s)| {
                let h = w[1].0 - w[0].0;
                let (y0, y1) = (w[0].1, w[1].1);
                let (m0, m1) = (s[0] * h * h, s[1] * h * h);
                Piece {
                    start: w[0].0,
                    width: h,
                    coef: [y0, y1 - y0 - (2.0 * m0 + m1) / 6.0, m0 / 2.0, (m1 - m0) / 6.0],
                }
            })
            .collect();
        Ok(CosineTransform {
            pieces,
            tail_start: t_end,
            tail_value: a_end,
            tail_rate: (a_prev / a_end).ln() / (t_end - t_prev),
        })
    }

    pub fn density(&self, m_offset: f64) -> f64 {
        let m = m_offset;
        let mut total = Complex64::new(0.0, 0.0);
        for piece in &self.pieces {
            let moments = unit_moments(m * piece.width);
            let local: Complex64 = piece
                .coef
                .iter()
                .zip(moments.iter())
                .map(|(c, mu)| mu * c)
                .sum();
            total += Complex64::from_polar(piece.width, m * piece.start) * local;
        }
        total += Complex64::from_polar(self.tail_value, m * self.tail_start) / Complex64::new(self.tail_rate, -m);
        total.re.abs() / std::f64::consts::PI
    }
}

/// `int_0^1 u^k exp(i theta u) du` for `k = 0..=3`.
fn unit_moments(theta: f64) -> [Complex64; 4] {
    let mut out = [Complex64::new(0.0, 0.0); 4];
    if theta.abs() < 2.0 {
        let z = Complex64::new(0.0, theta);
        let mut term = Complex64::new(1.0, 0.0);
        for n in 0..40 {
            for (k, slot) in out.iter_mut().enumerate() {
                *slot += term / (n + k + 1) as f64;
            }
            if term.norm() < 1e-18 {
                break;
            }
            term = term * z / (n + 1) as f64;
        }
    } else {
        let z = Complex64::new(0.0, theta);
        let e = z.exp();
        out[0] = (e - 1.0) / z;
        for k in 1..4 {
            out[k] = (e - out[k - 1] * k as f64) / z;
        }
    }
    out
}

/// Second derivatives of the natural cubic spline through `pts` (Thomas algorithm).
fn natural_spline_second_derivatives(pts: &[(f64, f64)]) -> Vec<f64> {
    let n = pts.len();
    let mut diag = vec![1.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut lower = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = pts[i].0 - pts[i - 1].0;
        let h1 = pts[i + 1].0 - pts[i].0;
        lower[i] = h0;
        diag[i] = 2.0 * (h0 + h1);
        upper[i] = h1;
        rhs[i] = 6.0 * ((pts[i + 1].1 - pts[i].1) / h1 - (pts[i].1 - pts[i - 1].1) / h0);
    }
    for i in 1..n {
        let factor = lower[i] / diag[i - 1];
        diag[i] -= factor * upper[i - 1];
        rhs[i] -= factor * rhs[i - 1];
    }
    let mut out = vec![0.0; n];
    out[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = (rhs[i] - upper[i] * out[i + 1]) / diag[i];
    }
    out
}
