//! Truncated Fourier series `u(t) = b0 + sum_n a_n sin(n w t) + b_n cos(n w t)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default truncation order; gives 11 coefficients per waveform.
pub const DEFAULT_ORDER: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    pub period: f64,
    /// Cosine coefficients `b_0 ..= b_N`.
    pub cosine: Vec<f64>,
    /// Sine coefficients `a_1 ..= a_N`; `a_0` multiplies `sin(0)` and is not stored.
    pub sine: Vec<f64>,
}

impl FourierSeries {
    pub fn new(period: f64, cosine: Vec<f64>, sine: Vec<f64>) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "period must be positive, got {period}"
            )));
        }
        if cosine.len() != sine.len() + 1 {
            return Err(Error::InvalidConfig(format!(
                "need N+1 cosine and N sine coefficients, got {} and {}",
                cosine.len(),
                sine.len()
            )));
        }
        Ok(FourierSeries {
            period,
            cosine,
            sine,
        })
    }

    /// Builds a series from complex harmonic amplitudes `X_n`, where the
    /// signal is `Re(sum X_n exp(i n w t))`.
    pub fn from_phasors(period: f64, phasors: &[Complex64]) -> Result<Self> {
        if phasors.is_empty() {
            return Err(Error::InvalidConfig("no harmonics".into()));
        }
        let cosine = phasors.iter().map(|p| p.re).collect();
        let sine = phasors[1..].iter().map(|p| -p.im).collect();
        FourierSeries::new(period, cosine, sine)
    }

    pub fn order(&self) -> usize {
        self.sine.len()
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Complex amplitude of harmonic `n`.
    pub fn phasor(&self, n: usize) -> Complex64 {
        if n == 0 {
            Complex64::new(self.cosine[0], 0.0)
        } else {
            Complex64::new(self.cosine[n], -self.sine[n - 1])
        }
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        let w = self.omega();
        let mut u = self.cosine[0];
        for n in 1..=self.order() {
            let (s, c) = (n as f64 * w * t).sin_cos();
            u += self.sine[n - 1] * s + self.cosine[n] * c;
        }
        u
    }

    /// Feature layout: `b_0, a_1..a_N, b_1..b_N`.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.order() + 1);
        out.push(self.cosine[0]);
        out.extend_from_slice(&self.sine);
        out.extend_from_slice(&self.cosine[1..]);
        out
    }

    /// Inverse of [`FourierSeries::coefficients`].
    pub fn from_coefficients(period: f64, coeffs: &[f64]) -> Result<Self> {
        if coeffs.len() % 2 != 1 {
            return Err(Error::InvalidConfig(format!(
                "coefficient vector must have odd length, got {}",
                coeffs.len()
            )));
        }
        let n = coeffs.len() / 2;
        let mut cosine = Vec::with_capacity(n + 1);
        cosine.push(coeffs[0]);
        cosine.extend_from_slice(&coeffs[n + 1..]);
        FourierSeries::new(period, cosine, coeffs[1..=n].to_vec())
    }

    pub fn coefficient_names(order: usize) -> Vec<String> {
        let mut names = vec!["b0".to_string()];
        names.extend((1..=order).map(|n| format!("a{n}")));
        names.extend((1..=order).map(|n| format!("b{n}")));
        names
    }
}

/// Least-squares fit of an order-`order` series to `samples` taken at
/// `t_k = k T / M`, `k = 0..M`. With uniform sampling and `M >= 2N+1` the
/// normal equations are diagonal, so the fit reduces to projections.
pub fn fit_fourier(samples: &[f64], period: f64, order: usize) -> Result<FourierSeries> {
    let m = samples.len();
    let needed = 2 * order + 1;
    if m < needed {
        return Err(Error::TooFewSamples { needed, got: m });
    }
    if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let mf = m as f64;
    let mut cosine = Vec::with_capacity(order + 1);
    let mut sine = Vec::with_capacity(order);
    cosine.push(samples.iter().sum::<f64>() / mf);
    for n in 1..=order {
        let (mut cs, mut ss) = (0.0, 0.0);
        for (k, &u) in samples.iter().enumerate() {
            let theta = 2.0 * PI * ((n * k) % m) as f64 / mf;
            let (s, c) = theta.sin_cos();
            cs += u * c;
            ss += u * s;
        }
        cosine.push(2.0 * cs / mf);
        sine.push(2.0 * ss / mf);
    }
    FourierSeries::new(period, cosine, sine)
}
