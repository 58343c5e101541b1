//! Soft-margin RBF support vector machine trained with SMO.
//!
//! The working pair is chosen with second-order information (maximal
//! violating `i`, then the `j` giving the largest guaranteed decrease) and
//! the pairwise update is clipped to the box `[0, C]`.

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::hyperparams::SvmParams;
use crate::error::{Error, Result};
use crate::linalg::{squared_distance, Matrix};

const TAU: f64 = 1e-12;
/// Beyond this many rows kernel rows are recomputed instead of cached.
const FULL_KERNEL_LIMIT: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Svm {
    pub gamma: f64,
    pub support_vectors: Matrix,
    /// `y_i α_i` of each support vector, with `y ∈ {-1, +1}`.
    pub dual_coef: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
}

/// `1 / (d · var(X))` over all entries; 1 when the data has no spread.
pub fn scale_gamma(x: &Matrix) -> f64 {
    let v = x.as_slice();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (x.cols() as f64 * var)
    } else {
        1.0
    }
}

struct Kernel<'a> {
    x: &'a Matrix,
    gamma: f64,
    full: Option<Vec<f64>>,
}

impl<'a> Kernel<'a> {
    fn new(x: &'a Matrix, gamma: f64) -> Self {
        let n = x.rows();
        let mut k = Kernel {
            x,
            gamma,
            full: None,
        };
        if n <= FULL_KERNEL_LIMIT {
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..=i {
                    let v = k.eval(i, j);
                    m[i * n + j] = v;
                    m[j * n + i] = v;
                }
            }
            k.full = Some(m);
        }
        k
    }

    fn eval(&self, i: usize, j: usize) -> f64 {
        (-self.gamma * squared_distance(self.x.row(i), self.x.row(j))).exp()
    }

    fn row(&self, i: usize) -> std::borrow::Cow<'_, [f64]> {
        let n = self.x.rows();
        match &self.full {
            Some(m) => std::borrow::Cow::Borrowed(&m[i * n..(i + 1) * n]),
            None => std::borrow::Cow::Owned((0..n).map(|j| self.eval(i, j)).collect()),
        }
    }
}

impl Svm {
    pub fn fit(params: &SvmParams, data: &Dataset) -> Result<Self> {
        data.require_both_classes()?;
        let x = data.x();
        let n = x.rows();
        let c = params.c;
        let gamma = params.gamma.unwrap_or_else(|| scale_gamma(x));
        let y: Vec<f64> = data
            .y()
            .iter()
            .map(|l| if l.is_diseased() { 1.0 } else { -1.0 })
            .collect();
        let kernel = Kernel::new(x, gamma);
        let mut alpha = vec![0.0; n];
        let mut grad = vec![-1.0; n];
        let is_up = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
        let is_low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < c);

        let mut iterations = 0;
        loop {
            let mut g_max = f64::NEG_INFINITY;
            let mut i = usize::MAX;
            for t in 0..n {
                if is_up(alpha[t], y[t]) && -y[t] * grad[t] > g_max {
                    g_max = -y[t] * grad[t];
                    i = t;
                }
            }
            if i == usize::MAX {
                break;
            }
            let ki = kernel.row(i);
            let mut g_min = f64::INFINITY;
            let mut j = usize::MAX;
            let mut best = f64::INFINITY;
            for t in 0..n {
                if !is_low(alpha[t], y[t]) {
                    continue;
                }
                let v = -y[t] * grad[t];
                g_min = g_min.min(v);
                let b = g_max - v;
                if b > 0.0 {
                    let a = (1.0 + 1.0 - 2.0 * ki[t]).max(TAU);
                    let obj = -b * b / a;
                    if obj < best {
                        best = obj;
                        j = t;
                    }
                }
            }
            if g_max - g_min < params.tolerance || j == usize::MAX {
                break;
            }
            if iterations >= params.max_iterations {
                return Err(Error::NotConverged {
                    iterations,
                    residual: g_max - g_min,
                });
            }
            iterations += 1;

            let kj = kernel.row(j);
            let (old_i, old_j) = (alpha[i], alpha[j]);
            let quad = (2.0 - 2.0 * ki[j]).max(TAU);
            if y[i] != y[j] {
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
            let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
            for t in 0..n {
                grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
            }
        }

        // Bias from free vectors, else the midpoint of the feasible interval.
        let (mut sum, mut n_free) = (0.0, 0usize);
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        for t in 0..n {
            let yg = y[t] * grad[t];
            if alpha[t] > 0.0 && alpha[t] < c {
                sum += yg;
                n_free += 1;
            } else if (alpha[t] >= c && y[t] < 0.0) || (alpha[t] <= 0.0 && y[t] > 0.0) {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        }
        let rho = if n_free > 0 {
            sum / n_free as f64
        } else {
            (ub + lb) / 2.0
        };

        let sv: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
        Ok(Svm {
            gamma,
            support_vectors: x.select_rows(&sv),
            dual_coef: sv.iter().map(|&t| y[t] * alpha[t]).collect(),
            bias: -rho,
            iterations,
        })
    }

    /// Signed decision value; positive means diseased.
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter_rows()
            .zip(&self.dual_coef)
            .map(|(sv, a)| a * (-self.gamma * squared_distance(sv, x)).exp())
            .sum::<f64>()
            + self.bias
    }

    pub fn n_features(&self) -> usize {
        self.support_vectors.cols()
    }
}
