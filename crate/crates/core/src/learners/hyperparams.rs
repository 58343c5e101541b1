use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    NB,
    LR,
    SVM,
    MLP,
    RF,
    GB,
}

impl Method {
    /// Column order of the combination tables.
    pub const ALL: [Method; 6] = [
        Method::NB,
        Method::LR,
        Method::SVM,
        Method::RF,
        Method::MLP,
        Method::GB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::NB => "NB",
            Method::LR => "LR",
            Method::SVM => "SVM",
            Method::MLP => "MLP",
            Method::RF => "RF",
            Method::GB => "GB",
        }
    }

    pub fn code(self) -> u64 {
        match self {
            Method::NB => 1,
            Method::LR => 2,
            Method::SVM => 3,
            Method::MLP => 4,
            Method::RF => 5,
            Method::GB => 6,
        }
    }

    pub fn default_hyperparams(self) -> Hyperparams {
        match self {
            Method::NB => Hyperparams::NB(NbParams::default()),
            Method::LR => Hyperparams::LR(LrParams::default()),
            Method::SVM => Hyperparams::SVM(SvmParams::default()),
            Method::MLP => Hyperparams::MLP(MlpParams::default()),
            Method::RF => Hyperparams::RF(RfParams::default()),
            Method::GB => Hyperparams::GB(GbParams::default()),
        }
    }

    /// Parses a comma-separated list; `all` selects every method.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(Method::ALL.to_vec());
        }
        let mut out: Vec<Method> = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        if out.is_empty() {
            return Err(Error::InvalidConfig("empty method list".into()));
        }
        out.sort_by_key(|m| Method::ALL.iter().position(|x| x == m));
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NbParams {
    /// Added to every variance, relative to the largest feature variance.
    pub var_smoothing: f64,
    /// Absolute lower bound on every variance.
    pub variance_floor: f64,
}

impl Default for NbParams {
    fn default() -> Self {
        NbParams {
            var_smoothing: 1e-9,
            variance_floor: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LrParams {
    pub l2_strength: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for LrParams {
    fn default() -> Self {
        LrParams {
            l2_strength: 1.0,
            tolerance: 1e-6,
            max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    /// RBF width; `None` means `1 / (d · var(X))`.
    pub gamma: Option<f64>,
    /// Stopping gap of the working-set selection.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            gamma: None,
            tolerance: 5e-4,
            max_iterations: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    pub neurons_per_layer: usize,
    pub n_hidden_layers: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// L2 penalty on weights (not biases), per sample.
    pub l2: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            neurons_per_layer: 100,
            n_hidden_layers: 1,
            epochs: 200,
            batch_size: 64,
            learning_rate: 1e-3,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfParams {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Features tried per split; `None` means `ceil(sqrt(d))`.
    pub max_features: Option<usize>,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams {
            n_trees: 100,
            max_depth: 20,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
}

impl Default for GbParams {
    fn default() -> Self {
        GbParams {
            n_trees: 100,
            max_depth: 3,
            learning_rate: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method")]
pub enum Hyperparams {
    NB(NbParams),
    LR(LrParams),
    SVM(SvmParams),
    MLP(MlpParams),
    RF(RfParams),
    GB(GbParams),
}

impl Hyperparams {
    pub fn method(&self) -> Method {
        match self {
            Hyperparams::NB(_) => Method::NB,
            Hyperparams::LR(_) => Method::LR,
            Hyperparams::SVM(_) => Method::SVM,
            Hyperparams::MLP(_) => Method::MLP,
            Hyperparams::RF(_) => Method::RF,
            Hyperparams::GB(_) => Method::GB,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("{}: {what}", self.method())));
        match self {
            Hyperparams::NB(p) if !(p.var_smoothing >= 0.0 && p.variance_floor >= 0.0) => {
                bad("negative variance term")
            }
            Hyperparams::LR(p)
                if !(p.l2_strength > 0.0 && p.tolerance > 0.0) || p.max_iterations == 0 =>
            {
                bad("l2_strength and tolerance must be positive")
            }
            Hyperparams::SVM(p)
                if !(p.c > 0.0 && p.tolerance > 0.0) || p.gamma.is_some_and(|g| !(g > 0.0)) =>
            {
                bad("C, gamma and tolerance must be positive")
            }
            Hyperparams::MLP(p)
                if p.neurons_per_layer == 0
                    || p.n_hidden_layers == 0
                    || p.epochs == 0
                    || p.batch_size == 0
                    || !(p.learning_rate > 0.0)
                    || !(p.l2 >= 0.0) =>
            {
                bad("counts and learning rate must be positive")
            }
            Hyperparams::RF(p) if p.n_trees == 0 || p.max_features == Some(0) => {
                bad("n_trees must be positive")
            }
            Hyperparams::GB(p) if p.n_trees == 0 || !(p.learning_rate > 0.0) => {
                bad("n_trees and learning_rate must be positive")
            }
            _ => Ok(()),
        }
    }

    /// Short description used in grid tables, e.g. `trees=40 depth=3`.
    pub fn summary(&self) -> String {
        match self {
            Hyperparams::NB(p) => format!("var_smoothing={}", p.var_smoothing),
            Hyperparams::LR(p) => format!("l2={}", p.l2_strength),
            Hyperparams::SVM(p) => match p.gamma {
                Some(g) => format!("C={} gamma={g}", p.c),
                None => format!("C={} gamma=scale", p.c),
            },
            Hyperparams::MLP(p) => format!(
                "neurons={} layers={}",
                p.neurons_per_layer, p.n_hidden_layers
            ),
            Hyperparams::RF(p) => format!("trees={} depth={}", p.n_trees, p.max_depth),
            Hyperparams::GB(p) => format!(
                "trees={} depth={} lr={}",
                p.n_trees, p.max_depth, p.learning_rate
            ),
        }
    }
}
