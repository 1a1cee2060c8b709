//! Small Fourier toolbox: equispaced nodes, projection of nodal data onto a
//! truncated trigonometric basis, evaluation and rotation of coefficient sets.
//!
//! The projection uses the plain discrete inner product on M equispaced
//! nodes, which is exact for band-limited data whenever M >= 2K+1.

use std::f64::consts::PI;

/// Angles theta_j = 2 pi j / m, j = 0..m.
pub fn nodes(m: usize) -> Vec<f64> {
    (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect()
}

/// Mean plus cos/sin coefficients for modes 1..=K.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoeffs {
    pub mean: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl FourierCoeffs {
    pub fn order(&self) -> usize {
        self.cos.len()
    }

    /// Coefficient accessors indexed by mode (1-based); zero outside range.
    pub fn cos_coeff(&self, k: usize) -> f64 {
        if k >= 1 && k <= self.cos.len() {
            self.cos[k - 1]
        } else {
            0.0
        }
    }

    pub fn sin_coeff(&self, k: usize) -> f64 {
        if k >= 1 && k <= self.sin.len() {
            self.sin[k - 1]
        } else {
            0.0
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut v = self.mean;
        for k in 1..=self.order() {
            let kt = k as f64 * theta;
            v += self.cos[k - 1] * kt.cos() + self.sin[k - 1] * kt.sin();
        }
        v
    }

    /// Coefficients of theta -> f(theta - phi).
    pub fn rotated(&self, phi: f64) -> FourierCoeffs {
        let mut cos = self.cos.clone();
        let mut sin = self.sin.clone();
        for k in 1..=self.order() {
            let (s, c) = (k as f64 * phi).sin_cos();
            let (a, b) = (self.cos[k - 1], self.sin[k - 1]);
            cos[k - 1] = a * c - b * s;
            sin[k - 1] = a * s + b * c;
        }
        FourierCoeffs { mean: self.mean, cos, sin }
    }
}

/// Project nodal values (sampled at `nodes(values.len())`) onto modes 0..=k_max.
pub fn project(values: &[f64], k_max: usize) -> FourierCoeffs {
    let m = values.len();
    assert!(m >= 2 * k_max + 1, "projection needs M >= 2K+1 ({m} < {})", 2 * k_max + 1);
    let mean = values.iter().sum::<f64>() / m as f64;
    let mut cos = vec![0.0; k_max];
    let mut sin = vec![0.0; k_max];
    for k in 1..=k_max {
        let (mut sc, mut ss) = (0.0, 0.0);
        for (j, &v) in values.iter().enumerate() {
            let kt = 2.0 * PI * (k * j) as f64 / m as f64;
            sc += v * kt.cos();
            ss += v * kt.sin();
        }
        cos[k - 1] = 2.0 * sc / m as f64;
        sin[k - 1] = 2.0 * ss / m as f64;
    }
    FourierCoeffs { mean, cos, sin }
}
