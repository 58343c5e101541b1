//! Gaussian naive Bayes.

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::hyperparams::NbParams;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    /// Class priors, healthy first.
    pub priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
}

impl NaiveBayes {
    pub fn fit(params: &NbParams, data: &Dataset) -> Result<Self> {
        data.require_both_classes()?;
        let d = data.n_features();
        let mut counts = [0usize; 2];
        let mut means = [vec![0.0; d], vec![0.0; d]];
        for (row, y) in data.x().iter_rows().zip(data.y()) {
            let c = y.is_diseased() as usize;
            counts[c] += 1;
            for (m, v) in means[c].iter_mut().zip(row) {
                *m += v;
            }
        }
        for c in 0..2 {
            means[c].iter_mut().for_each(|m| *m /= counts[c] as f64);
        }
        let mut variances = [vec![0.0; d], vec![0.0; d]];
        for (row, y) in data.x().iter_rows().zip(data.y()) {
            let c = y.is_diseased() as usize;
            for ((s, v), m) in variances[c].iter_mut().zip(row).zip(&means[c]) {
                *s += (v - m) * (v - m);
            }
        }
        // Smoothing is relative to the largest overall feature variance.
        let n = data.n_rows() as f64;
        let max_var = (0..d)
            .map(|j| {
                let mean = data.x().iter_rows().map(|r| r[j]).sum::<f64>() / n;
                data.x()
                    .iter_rows()
                    .map(|r| (r[j] - mean) * (r[j] - mean))
                    .sum::<f64>()
                    / n
            })
            .fold(0.0, f64::max);
        let epsilon = params.var_smoothing * max_var;
        for c in 0..2 {
            for s in variances[c].iter_mut() {
                *s = (*s / counts[c] as f64 + epsilon).max(params.variance_floor);
            }
        }
        let priors = [counts[0] as f64 / n, counts[1] as f64 / n];
        Ok(NaiveBayes {
            priors,
            means,
            variances,
        })
    }

    /// `ln P(C) + Σ ln N(x_j | μ_cj, σ²_cj)` for each class.
    pub fn log_joint(&self, x: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (c, o) in out.iter_mut().enumerate() {
            let mut s = self.priors[c].ln();
            for ((v, m), var) in x.iter().zip(&self.means[c]).zip(&self.variances[c]) {
                s -=
                    0.5 * (2.0 * std::f64::consts::PI * var).ln() + (v - m) * (v - m) / (2.0 * var);
            }
            *o = s;
        }
        out
    }

    /// Posterior probability of the diseased class.
    pub fn score(&self, x: &[f64]) -> f64 {
        let [h, d] = self.log_joint(x);
        1.0 / (1.0 + (h - d).exp())
    }

    pub fn n_features(&self) -> usize {
        self.means[0].len()
    }
}
