//! Binary classifiers sharing one fit/predict contract.
//!
//! [`fit`] sorts the training rows by subject id before handing them to a
//! learner, so a fitted model depends only on the set of rows, the
//! hyperparameters and the seed.

pub mod boost;
pub mod dataset;
pub mod forest;
pub mod grid;
pub mod hyperparams;
pub mod importance;
pub mod logistic;
pub mod mlp;
pub mod naive_bayes;
pub mod svm;
pub mod tree;

use serde::{Deserialize, Serialize};

pub use boost::GradientBoosting;
pub use dataset::{Dataset, Label};
pub use forest::RandomForest;
pub use hyperparams::{
    GbParams, Hyperparams, LrParams, Method, MlpParams, NbParams, RfParams, SvmParams,
};
pub use importance::{aggregate_by_measurement, split_improvement_importance, FeatureImportance};
pub use logistic::LogisticRegression;
pub use mlp::Mlp;
pub use naive_bayes::NaiveBayes;
pub use svm::Svm;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", content = "parameters")]
pub enum ModelParams {
    NB(NaiveBayes),
    LR(LogisticRegression),
    SVM(Svm),
    MLP(Mlp),
    RF(RandomForest),
    GB(GradientBoosting),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub version: u32,
    pub seed: u64,
    pub hyperparams: Hyperparams,
    pub n_features: usize,
    pub model: ModelParams,
}

/// Fits `hyperparams` to `data`. All randomness comes from `seed`.
pub fn fit(hyperparams: &Hyperparams, data: &Dataset, seed: u64) -> Result<TrainedModel> {
    hyperparams.validate()?;
    data.require_both_classes()?;
    let data = data.canonical();
    let model = match hyperparams {
        Hyperparams::NB(p) => ModelParams::NB(NaiveBayes::fit(p, &data)?),
        Hyperparams::LR(p) => ModelParams::LR(LogisticRegression::fit(p, &data)?),
        Hyperparams::SVM(p) => ModelParams::SVM(Svm::fit(p, &data)?),
        Hyperparams::MLP(p) => ModelParams::MLP(Mlp::fit(p, &data, seed)?),
        Hyperparams::RF(p) => ModelParams::RF(RandomForest::fit(p, &data, seed)?),
        Hyperparams::GB(p) => ModelParams::GB(GradientBoosting::fit(p, &data)?),
    };
    Ok(TrainedModel {
        version: MODEL_FORMAT_VERSION,
        seed,
        hyperparams: hyperparams.clone(),
        n_features: data.n_features(),
        model,
    })
}

impl TrainedModel {
    pub fn method(&self) -> Method {
        self.hyperparams.method()
    }

    /// Probability of disease, or the signed margin for SVM.
    pub fn predict_score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        Ok(match &self.model {
            ModelParams::NB(m) => m.score(x),
            ModelParams::LR(m) => m.score(x),
            ModelParams::SVM(m) => m.decision(x),
            ModelParams::MLP(m) => m.score(x),
            ModelParams::RF(m) => m.score(x),
            ModelParams::GB(m) => m.score(x),
        })
    }

    /// Thresholded score: 0 for SVM margins, 0.5 otherwise. Ties are healthy.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        let s = self.predict_score(x)?;
        Ok(match self.model {
            ModelParams::SVM(_) => Label::from_diseased(s > 0.0),
            _ => Label::from_probability(s),
        })
    }

    pub fn predict_all(&self, x: &Matrix) -> Result<Vec<Label>> {
        x.iter_rows().map(|r| self.predict(r)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: TrainedModel = serde_json::from_str(s)?;
        if m.version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidRecord(format!(
                "unsupported model format version {}",
                m.version
            )));
        }
        if m.hyperparams.method() != m.model_method() {
            return Err(Error::InvalidRecord(
                "hyperparameters and parameters disagree on method".into(),
            ));
        }
        Ok(m)
    }

    fn model_method(&self) -> Method {
        match self.model {
            ModelParams::NB(_) => Method::NB,
            ModelParams::LR(_) => Method::LR,
            ModelParams::SVM(_) => Method::SVM,
            ModelParams::MLP(_) => Method::MLP,
            ModelParams::RF(_) => Method::RF,
            ModelParams::GB(_) => Method::GB,
        }
    }
}
