//! Gradient boosting for binary logistic deviance.
//!
//! Starts from the log-odds of the training prevalence. Each stage fits a
//! squared-error regression tree to the residuals `y - p` and sets every leaf
//! to the Newton step `Σ(y - p) / Σ p(1 - p)` of the rows it holds.

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::hyperparams::GbParams;
use super::logistic::sigmoid;
use super::tree::{build_tree, Criterion, Presorted, Tree, TreeSpec};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub n_features: usize,
    pub init: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

impl GradientBoosting {
    pub fn fit(params: &GbParams, data: &Dataset) -> Result<Self> {
        data.require_both_classes()?;
        let n = data.n_rows();
        let target = data.targets();
        let prevalence = target.iter().sum::<f64>() / n as f64;
        let init = (prevalence / (1.0 - prevalence)).ln();
        let presorted = Presorted::new(data.x());
        let weight = vec![1.0; n];
        let mut raw = vec![init; n];
        let mut residual = vec![0.0; n];
        let mut hessian = vec![0.0; n];
        let mut trees = Vec::with_capacity(params.n_trees);
        for _ in 0..params.n_trees {
            for i in 0..n {
                let p = sigmoid(raw[i]);
                residual[i] = target[i] - p;
                hessian[i] = p * (1.0 - p);
            }
            let spec = TreeSpec {
                criterion: Criterion::Sse,
                max_depth: params.max_depth,
                max_features: None,
                target: &residual,
                weight: &weight,
            };
            let tree = build_tree(&presorted, &spec, None, |rows| {
                let (g, h) = rows.iter().fold((0.0, 0.0), |(g, h), &r| {
                    (g + residual[r as usize], h + hessian[r as usize])
                });
                if h.abs() < 1e-150 {
                    0.0
                } else {
                    g / h
                }
            });
            for (i, f) in raw.iter_mut().enumerate() {
                *f += params.learning_rate * tree.predict(data.x().row(i));
            }
            trees.push(tree);
        }
        Ok(GradientBoosting {
            n_features: data.n_features(),
            init,
            learning_rate: params.learning_rate,
            trees,
        })
    }

    /// Additive log-odds `F(x)`.
    pub fn raw_score(&self, x: &[f64]) -> f64 {
        self.init + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.raw_score(x))
    }
}
