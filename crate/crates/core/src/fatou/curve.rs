use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed polygon sampled at `M` equally spaced parameters `j / M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedCurve {
    samples: Vec<Complex64>,
}

impl ClosedCurve {
    /// Rejects fewer than three samples, non-finite samples and repeats.
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::Precondition("a closed curve needs at least 3 samples".into()));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Precondition("non-finite curve sample".into()));
        }
        let mut sorted = samples.clone();
        sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition("curve samples are not distinct".into()));
        }
        Ok(Self { samples })
    }

    /// `center + radius e^{2 pi i j / m}`.
    pub fn circle(center: Complex64, radius: f64, m: usize) -> Result<Self> {
        Self::new(
            (0..m)
                .map(|j| center + Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / m as f64))
                .collect(),
        )
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn resolution(&self) -> usize {
        self.samples.len()
    }

    /// Sample `j` taken cyclically.
    pub fn at_index(&self, j: usize) -> Complex64 {
        self.samples[j % self.samples.len()]
    }

    /// Piecewise-linear value at parameter `theta` (taken mod 1).
    pub fn interpolate(&self, theta: f64) -> Complex64 {
        let m = self.samples.len();
        let x = theta.rem_euclid(1.0) * m as f64;
        let j = (x.floor() as usize).min(m - 1);
        let f = x - j as f64;
        self.samples[j] * (1.0 - f) + self.samples[(j + 1) % m] * f
    }

    /// Winding number of the polygon about `w`; zero-length edges are skipped.
    pub fn winding_number(&self, w: Complex64) -> i64 {
        let mut total = 0.0;
        let m = self.samples.len();
        for j in 0..m {
            let a = self.samples[j] - w;
            let b = self.samples[(j + 1) % m] - w;
            total += (b / a).arg();
        }
        (total / std::f64::consts::TAU).round() as i64
    }

    pub fn encloses(&self, w: Complex64) -> bool {
        self.winding_number(w) != 0
    }

    /// Distance from `w` to the polygon and the parameter of the closest point.
    pub fn distance(&self, w: Complex64) -> (f64, f64) {
        let m = self.samples.len();
        let mut best = (f64::INFINITY, 0.0);
        for j in 0..m {
            let a = self.samples[j];
            let b = self.samples[(j + 1) % m];
            let ab = b - a;
            let len2 = ab.norm_sqr();
            let t = if len2 == 0.0 {
                0.0
            } else {
                (((w - a) * ab.conj()).re / len2).clamp(0.0, 1.0)
            };
            let d = (a + ab * t - w).norm();
            if d < best.0 {
                best = (d, (j as f64 + t) / m as f64);
            }
        }
        best
    }

    /// Largest gap between consecutive samples.
    pub fn max_spacing(&self) -> f64 {
        let m = self.samples.len();
        (0..m)
            .map(|j| (self.samples[(j + 1) % m] - self.samples[j]).norm())
            .fold(0.0, f64::max)
    }

    /// Largest pointwise distance to another curve of the same resolution.
    pub fn sup_distance(&self, other: &ClosedCurve) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn circle_winding_and_distance() {
        let k = ClosedCurve::circle(c(1.0, 0.0), 0.5, 256).unwrap();
        assert_eq!(k.winding_number(c(1.0, 0.0)), 1);
        assert_eq!(k.winding_number(c(1.2, 0.1)), 1);
        assert_eq!(k.winding_number(c(3.0, 0.0)), 0);
        let (d, theta) = k.distance(c(2.0, 0.0));
        assert!((d - 0.5).abs() < 1e-12);
        assert!(theta.abs() < 1e-12 || (theta - 1.0).abs() < 1e-12);
        let (d, _) = k.distance(c(1.0, 0.0));
        assert!((d - 0.5).abs() < 1e-4);
    }

    #[test]
    fn reversed_circle_winds_negatively() {
        let mut s = ClosedCurve::circle(c(0.0, 0.0), 1.0, 64).unwrap().samples;
        s.reverse();
        assert_eq!(ClosedCurve::new(s).unwrap().winding_number(c(0.0, 0.0)), -1);
    }

    #[test]
    fn interpolation_hits_samples() {
        let k = ClosedCurve::circle(c(0.0, 0.0), 2.0, 16).unwrap();
        assert!((k.interpolate(0.25) - c(0.0, 2.0)).norm() < 1e-12);
        assert!((k.interpolate(1.25) - c(0.0, 2.0)).norm() < 1e-12);
        assert!((k.interpolate(-0.75) - c(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_repeats_and_short_input() {
        assert!(ClosedCurve::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(ClosedCurve::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).is_err());
        assert!(ClosedCurve::new(vec![c(0.0, 0.0), c(1.0, f64::NAN), c(0.0, 1.0)]).is_err());
    }
}
