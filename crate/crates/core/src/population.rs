//! Virtual-patient populations.
//!
//! Each subject gets physiological scalings from its own seeded stream keyed
//! by `(seed, subject index)`. A diseased cohort re-uses those scalings and
//! adds one sampled disease from a stream keyed by `(seed, disease, index)`,
//! so every diseased patient is the exact twin of a healthy one.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disease::{apply_disease, sample_disease, DiseaseKind, DiseaseSpec};
use crate::error::{Error, Result};
use crate::fourier::DEFAULT_ORDER;
use crate::network::{build_reference_network, NetworkConfig, DEFAULT_NODES, REFERENCE_SEGMENTS};
use crate::seed;
use crate::surrogate::{solve_network, HeartInflow, WaveformSet};

const SUBJECT_TAG: u64 = 0x5u64 << 56;
const DISEASE_TAG: u64 = 0xDu64 << 56;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PopulationConfig {
    /// Log-normal spread of every multiplicative scaling.
    pub sigma: f64,
    pub period_range: (f64, f64),
    pub stroke_volume: f64,
    pub ejection_fraction: f64,
    pub nodes_per_segment: usize,
    pub order: usize,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        PopulationConfig {
            sigma: 0.1,
            period_range: (0.7, 1.1),
            stroke_volume: 70.0,
            ejection_fraction: 1.0 / 3.0,
            nodes_per_segment: DEFAULT_NODES,
            order: DEFAULT_ORDER,
        }
    }
}

impl PopulationConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.period_range;
        if !(self.sigma >= 0.0) || !(lo > 0.0 && hi >= lo) || !(self.stroke_volume > 0.0) {
            return Err(Error::InvalidConfig("invalid population parameters".into()));
        }
        if self.order < 1 || self.nodes_per_segment < 1 {
            return Err(Error::InvalidConfig(
                "order and nodes_per_segment must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Per-subject physiological parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectParams {
    pub heart_period: f64,
    pub stroke_volume: f64,
    pub network: NetworkConfig,
}

impl SubjectParams {
    pub fn sample<R: Rng + ?Sized>(config: &PopulationConfig, rng: &mut R) -> Self {
        let ln = LogNormal::new(0.0, config.sigma).expect("sigma validated");
        let (lo, hi) = config.period_range;
        let heart_period = lo + rng.gen::<f64>() * (hi - lo);
        let stroke_volume = config.stroke_volume * ln.sample(rng);
        let area_scale = ln.sample(rng);
        let stiffness_scale = ln.sample(rng);
        let resistance_scale = ln.sample(rng);
        let segment_wave_speed = (0..REFERENCE_SEGMENTS).map(|_| ln.sample(rng)).collect();
        let terminal_resistance = (0..reference_leaf_count())
            .map(|_| ln.sample(rng))
            .collect();
        SubjectParams {
            heart_period,
            stroke_volume,
            network: NetworkConfig {
                area_scale,
                stiffness_scale,
                resistance_scale,
                segment_wave_speed,
                terminal_resistance,
                nodes_per_segment: config.nodes_per_segment,
            },
        }
    }

    pub fn inflow(&self, config: &PopulationConfig) -> Result<HeartInflow> {
        HeartInflow::half_sine(
            self.heart_period,
            self.stroke_volume,
            config.ejection_fraction,
            config.order,
        )
    }
}

fn reference_leaf_count() -> usize {
    static LEAVES: std::sync::OnceLock<usize> = std::sync::OnceLock::new();
    *LEAVES.get_or_init(|| {
        build_reference_network(&NetworkConfig::default())
            .expect("reference network is valid")
            .loads
            .len()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cohort {
    Healthy,
    Diseased(DiseaseKind),
}

impl Cohort {
    pub fn tag(self) -> &'static str {
        match self {
            Cohort::Healthy => "H",
            Cohort::Diseased(k) => k.tag(),
        }
    }
}

impl fmt::Display for Cohort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Cohort {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("h") {
            Ok(Cohort::Healthy)
        } else {
            s.parse().map(Cohort::Diseased)
        }
    }
}

impl Serialize for Cohort {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.tag())
    }
}

impl<'de> Deserialize<'de> for Cohort {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VirtualPatient {
    pub id: u64,
    pub cohort: Cohort,
    pub subject: SubjectParams,
    pub disease: Option<DiseaseSpec>,
    pub waveforms: WaveformSet,
}

pub fn subject_params(config: &PopulationConfig, seed: u64, index: u64) -> SubjectParams {
    SubjectParams::sample(
        config,
        &mut seed::derived_stream(seed, &[SUBJECT_TAG, index]),
    )
}

pub fn subject_disease(kind: DiseaseKind, seed: u64, index: u64) -> DiseaseSpec {
    sample_disease(
        kind,
        &mut seed::derived_stream(seed, &[DISEASE_TAG, kind.code(), index]),
    )
}

/// Simulates one subject, healthy or with the given disease.
pub fn simulate_subject(
    config: &PopulationConfig,
    subject: &SubjectParams,
    disease: Option<&DiseaseSpec>,
) -> Result<WaveformSet> {
    let healthy = build_reference_network(&subject.network)?;
    let network = match disease {
        Some(spec) => apply_disease(&healthy, healthy.chain_for(spec)?, spec)?,
        None => healthy,
    };
    solve_network(&network, &subject.inflow(config)?, config.order)
}

/// Generates subjects `0..n`. With `disease` set, each record is the diseased
/// twin of the healthy subject with the same id.
pub fn generate_population(
    n_subjects: usize,
    disease: Option<DiseaseKind>,
    config: &PopulationConfig,
    seed: u64,
) -> Result<Vec<VirtualPatient>> {
    if n_subjects < 1 {
        return Err(Error::InvalidConfig(
            "population needs at least one subject".into(),
        ));
    }
    config.validate()?;
    (0..n_subjects as u64)
        .into_par_iter()
        .map(|id| {
            let subject = subject_params(config, seed, id);
            let spec = disease.map(|k| subject_disease(k, seed, id));
            let waveforms = simulate_subject(config, &subject, spec.as_ref())?;
            Ok(VirtualPatient {
                id,
                cohort: disease.map_or(Cohort::Healthy, Cohort::Diseased),
                subject,
                disease: spec,
                waveforms,
            })
        })
        .collect()
}
