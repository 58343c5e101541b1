//! L2-regularised logistic regression solved by damped Newton iterations.
//!
//! The objective is `Σ log(1 + exp(-s_i z_i)) + λ/2 ‖w‖²` with the intercept
//! left unpenalised.

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::hyperparams::LrParams;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, dot, norm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Objective and gradient at `theta = [w..., b]`.
pub fn loss_and_gradient(data: &Dataset, l2: f64, theta: &[f64]) -> (f64, Vec<f64>) {
    let d = data.n_features();
    let (w, b) = (&theta[..d], theta[d]);
    let mut loss = 0.5 * l2 * dot(w, w);
    let mut grad = vec![0.0; d + 1];
    for (j, g) in grad[..d].iter_mut().enumerate() {
        *g = l2 * w[j];
    }
    for (row, y) in data.x().iter_rows().zip(data.y()) {
        let z = dot(w, row) + b;
        let t = y.target();
        // -[t ln σ(z) + (1-t) ln(1-σ(z))] = softplus(z) - t z
        loss += softplus(z) - t * z;
        let r = sigmoid(z) - t;
        for (g, v) in grad[..d].iter_mut().zip(row) {
            *g += r * v;
        }
        grad[d] += r;
    }
    (loss, grad)
}

impl LogisticRegression {
    pub fn fit(params: &LrParams, data: &Dataset) -> Result<Self> {
        data.require_both_classes()?;
        let d = data.n_features();
        let p = d + 1;
        let mut theta = vec![0.0; p];
        let (mut loss, mut grad) = loss_and_gradient(data, params.l2_strength, &theta);
        for it in 0..params.max_iterations {
            if norm(&grad) <= params.tolerance {
                return Ok(Self::from_theta(theta, it));
            }
            let mut hess = vec![0.0; p * p];
            for row in data.x().iter_rows() {
                let s = sigmoid(dot(&theta[..d], row) + theta[d]);
                let h = s * (1.0 - s);
                for a in 0..p {
                    let xa = if a < d { row[a] } else { 1.0 };
                    let ha = h * xa;
                    for bb in 0..=a {
                        let xb = if bb < d { row[bb] } else { 1.0 };
                        hess[a * p + bb] += ha * xb;
                    }
                }
            }
            for a in 0..p {
                if a < d {
                    hess[a * p + a] += params.l2_strength;
                }
                for bb in 0..a {
                    hess[bb * p + a] = hess[a * p + bb];
                }
            }
            // A tiny ridge keeps the intercept block positive definite when
            // every sample saturates.
            hess[p * p - 1] += 1e-12;
            let step = cholesky_solve(&hess, &grad).ok_or(Error::NotConverged {
                iterations: it,
                residual: norm(&grad),
            })?;
            let mut t = 1.0;
            loop {
                let trial: Vec<f64> = theta.iter().zip(&step).map(|(a, s)| a - t * s).collect();
                let (l, g) = loss_and_gradient(data, params.l2_strength, &trial);
                let sufficient = l <= loss - 1e-4 * t * dot(&grad, &step);
                // Near the optimum the decrease falls below the rounding of
                // the loss itself; a smaller gradient then decides.
                let flat = l <= loss + 1e-12 * loss.abs().max(1.0) && norm(&g) < norm(&grad);
                if sufficient || flat || t < 1e-10 {
                    theta = trial;
                    loss = l;
                    grad = g;
                    break;
                }
                t *= 0.5;
            }
        }
        let residual = norm(&grad);
        if residual <= params.tolerance {
            Ok(Self::from_theta(theta, params.max_iterations))
        } else {
            Err(Error::NotConverged {
                iterations: params.max_iterations,
                residual,
            })
        }
    }

    fn from_theta(mut theta: Vec<f64>, iterations: usize) -> Self {
        let intercept = theta.pop().expect("intercept");
        LogisticRegression {
            weights: theta,
            intercept,
            iterations,
        }
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.intercept
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }

    pub fn n_features(&self) -> usize {
        self.weights.len()
    }
}
