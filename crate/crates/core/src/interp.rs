//! Monotone piecewise-cubic interpolation (Fritsch-Carlson slopes).
//!
//! Used by the fixed-point solver to evaluate an LST grid between its
//! abscissae without introducing spurious oscillation: data that is monotone
//! stays monotone, which is what keeps iterated transforms stable.

use crate::error::{Result, SntError};

#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    /// Build an interpolant through (x, y); x must be strictly increasing
    /// and both slices at least 2 points long.
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(SntError::InvalidParameter(
                "interpolation needs >= 2 matched points".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SntError::InvalidParameter(
                "interpolation abscissae must be strictly increasing".into(),
            ));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(SntError::InvalidParameter(
                "interpolation data must be finite".into(),
            ));
        }
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];

        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                d[i] = 0.0;
            } else {
                // Weighted harmonic mean of adjacent secants.
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        d[0] = endpoint_slope(h[0], h.get(1).copied().unwrap_or(h[0]), delta[0], delta.get(1).copied().unwrap_or(delta[0]));
        d[n - 1] = endpoint_slope(
            h[n - 2],
            if n >= 3 { h[n - 3] } else { h[n - 2] },
            delta[n - 2],
            if n >= 3 { delta[n - 3] } else { delta[n - 2] },
        );
        Ok(Pchip { x: x.to_vec(), y: y.to_vec(), d })
    }

    /// Hermite evaluation; arguments outside the abscissa range clamp to the
    /// boundary values.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let idx = match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => return self.y[i],
            Err(i) => i - 1,
        };
        let h = self.x[idx + 1] - self.x[idx];
        let s = (t - self.x[idx]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[idx] + h10 * h * self.d[idx] + h01 * self.y[idx + 1] + h11 * h * self.d[idx + 1]
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }
}

/// Non-centered three-point endpoint slope with the usual shape-preserving
/// clips (zero if it disagrees in sign with the boundary secant, capped at
/// three times that secant).
fn endpoint_slope(h0: f64, h1: f64, delta0: f64, delta1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * delta0 - h0 * delta1) / (h0 + h1);
    if d * delta0 <= 0.0 {
        0.0
    } else if delta0 * delta1 <= 0.0 && d.abs() > 3.0 * delta0.abs() {
        3.0 * delta0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_linear_data_exactly() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let p = Pchip::new(&x, &y).unwrap();
        for i in 0..90 {
            let t = i as f64 * 0.1;
            assert!((p.eval(t) - (3.0 * t - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn preserves_monotonicity_on_dense_probe() {
        // Step-like monotone data is the classic case where unconstrained
        // cubics overshoot.
        let x = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [0.0, 0.01, 0.02, 0.98, 0.99, 1.0];
        let p = Pchip::new(&x, &y).unwrap();
        let mut prev = p.eval(0.0);
        for i in 1..=500 {
            let t = i as f64 * 0.01;
            let v = p.eval(t);
            assert!(v >= prev - 1e-14, "dip at t={t}: {v} < {prev}");
            prev = v;
        }
        assert!(p.eval(5.0) <= 1.0 + 1e-14);
    }

    #[test]
    fn accuracy_on_smooth_curve() {
        let x: Vec<f64> = (0..=64).map(|i| -4.0 + 8.0 * i as f64 / 64.0).collect();
        let y: Vec<f64> = x.iter().map(|v| (-v.exp()).exp()).collect();
        let p = Pchip::new(&x, &y).unwrap();
        for i in 0..=256 {
            let t = -4.0 + 8.0 * i as f64 / 256.0;
            let exact = (-t.exp()).exp();
            assert!((p.eval(t) - exact).abs() < 5e-4, "at {t}");
        }
    }

    #[test]
    fn clamps_outside_range() {
        let p = Pchip::new(&[0.0, 1.0], &[2.0, 5.0]).unwrap();
        assert_eq!(p.eval(-3.0), 2.0);
        assert_eq!(p.eval(9.0), 5.0);
    }
}
