//! Trigonometric interpolation of periodic samples.

use std::f64::consts::TAU;

/// Real trigonometric interpolant through `m` equispaced samples on `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigInterpolant {
    mean: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl TrigInterpolant {
    pub fn from_samples(samples: &[f64]) -> Self {
        let m = samples.len();
        assert!(m >= 1, "need at least one sample");
        let mean = samples.iter().sum::<f64>() / m as f64;
        let kmax = m / 2;
        let mut cos = Vec::with_capacity(kmax);
        let mut sin = Vec::with_capacity(kmax);
        for k in 1..=kmax {
            let (mut c, mut s) = (0.0, 0.0);
            for (j, &v) in samples.iter().enumerate() {
                let t = TAU * (k * j) as f64 / m as f64;
                c += v * t.cos();
                s += v * t.sin();
            }
            let scale = if 2 * k == m { 1.0 } else { 2.0 } / m as f64;
            cos.push(c * scale);
            sin.push(if 2 * k == m { 0.0 } else { s * scale });
        }
        Self { mean, cos, sin }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut v = self.mean;
        for (k, (c, s)) in self.cos.iter().zip(&self.sin).enumerate() {
            let t = (k + 1) as f64 * theta;
            v += c * t.cos() + s * t.sin();
        }
        v
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        let mut v = 0.0;
        for (k, (c, s)) in self.cos.iter().zip(&self.sin).enumerate() {
            let kk = (k + 1) as f64;
            let t = kk * theta;
            v += kk * (s * t.cos() - c * t.sin());
        }
        v
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `int_0^theta (p(s) - mean) ds`, which is periodic.
    pub fn antiderivative(&self, theta: f64) -> f64 {
        let mut v = 0.0;
        for (k, (c, s)) in self.cos.iter().zip(&self.sin).enumerate() {
            let kk = (k + 1) as f64;
            let t = kk * theta;
            v += (c * t.sin() + s * (1.0 - t.cos())) / kk;
        }
        v
    }
}
