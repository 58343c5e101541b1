//! Split-improvement feature importance of boosted ensembles.

use serde::{Deserialize, Serialize};

use super::{ModelParams, TrainedModel};
use crate::error::{Error, Result};
use crate::features::MeasurementCombination;
use crate::sites::Measurement;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub weights: Vec<f64>,
}

impl FeatureImportance {
    /// Feature indices sorted by decreasing weight.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.weights.len()).collect();
        idx.sort_by(|&a, &b| self.weights[b].total_cmp(&self.weights[a]).then(a.cmp(&b)));
        idx
    }
}

/// Each tree's gains are normalised to sum 1, averaged over the trees that
/// split at all, and renormalised.
pub fn split_improvement_importance(model: &TrainedModel) -> Result<FeatureImportance> {
    let gb = match &model.model {
        ModelParams::GB(gb) => gb,
        _ => {
            return Err(Error::WrongModel {
                expected: "GB",
                got: model.method().name(),
            })
        }
    };
    let d = gb.n_features;
    let mut acc = vec![0.0; d];
    let mut counted = 0usize;
    for tree in &gb.trees {
        let gains = tree.gains(d);
        let total: f64 = gains.iter().sum();
        if total > 0.0 {
            for (a, g) in acc.iter_mut().zip(&gains) {
                *a += g / total;
            }
            counted += 1;
        }
    }
    if counted == 0 {
        return Err(Error::NoSplits);
    }
    let total: f64 = acc.iter().sum();
    Ok(FeatureImportance {
        weights: acc.into_iter().map(|a| a / total).collect(),
    })
}

/// Sums the importances of each measurement's coefficients.
pub fn aggregate_by_measurement(
    importance: &FeatureImportance,
    combo: &MeasurementCombination,
    order: usize,
) -> Result<Vec<(Measurement, f64)>> {
    let expected = combo.feature_len(order);
    if importance.weights.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: importance.weights.len(),
        });
    }
    let per = expected / combo.len();
    Ok(combo
        .measurements()
        .into_iter()
        .zip(importance.weights.chunks(per))
        .map(|(m, w)| (m, w.iter().sum()))
        .collect())
}
