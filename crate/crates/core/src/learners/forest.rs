//! Random forest of Gini trees on bootstrap samples.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::hyperparams::RfParams;
use super::tree::{build_tree, Criterion, Presorted, Tree, TreeSpec};
use crate::error::Result;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub n_features: usize,
    pub max_features: usize,
    pub trees: Vec<Tree>,
}

pub fn default_max_features(d: usize) -> usize {
    ((d as f64).sqrt().ceil() as usize).clamp(1, d.max(1))
}

impl RandomForest {
    pub fn fit(params: &RfParams, data: &Dataset, seed: u64) -> Result<Self> {
        data.require_both_classes()?;
        let (n, d) = (data.n_rows(), data.n_features());
        let max_features = params
            .max_features
            .unwrap_or_else(|| default_max_features(d))
            .min(d);
        let presorted = Presorted::new(data.x());
        let target = data.targets();
        let trees = (0..params.n_trees as u64)
            .into_par_iter()
            .map(|t| {
                let mut rng = seed::derived_stream(seed, &[t]);
                let mut weight = vec![0.0; n];
                for _ in 0..n {
                    weight[rng.gen_range(0..n)] += 1.0;
                }
                let spec = TreeSpec {
                    criterion: Criterion::Gini,
                    max_depth: params.max_depth,
                    max_features: Some(max_features),
                    target: &target,
                    weight: &weight,
                };
                build_tree(&presorted, &spec, Some(&mut rng), |rows| {
                    let (w, s) = rows.iter().fold((0.0, 0.0), |(w, s), &r| {
                        let r = r as usize;
                        (w + weight[r], s + weight[r] * target[r])
                    });
                    s / w
                })
            })
            .collect();
        Ok(RandomForest {
            n_features: d,
            max_features,
            trees,
        })
    }

    /// Fraction of trees voting diseased.
    pub fn score(&self, x: &[f64]) -> f64 {
        let votes = self.trees.iter().filter(|t| t.predict(x) > 0.5).count();
        votes as f64 / self.trees.len() as f64
    }
}
