//! Fold protocol, metrics and the combination search.

pub mod metrics;
pub mod report;
pub mod split;
pub mod studies;

use std::collections::BTreeMap;

use rayon::prelude::*;

pub use metrics::{compute_metrics, ConfusionCounts, Metrics};
pub use report::{
    measurement_count_summary, CellRecord, CountSummary, EvaluationReport, MetricKind,
};
pub use split::{build_split_plan, Fold, Member, SplitPlan, DEFAULT_FOLDS};
pub use studies::{
    low_severity_ratio_study, q1_inclusion_histograms, unilateral_study, Histogram, Q1Histograms,
    RatioRow, UnilateralRow,
};

use crate::disease::DiseaseKind;
use crate::error::{Error, Result};
use crate::features::{assemble_features, MeasurementCombination, StandardizationStats};
use crate::learners::{self, Dataset, Hyperparams, Label, Method};
use crate::linalg::Matrix;
use crate::population::{Cohort, VirtualPatient};
use crate::seed;
use crate::surrogate::WaveformSet;

const CELL_TAG: u64 = 0xCE << 56;

/// Healthy records and their diseased twins, keyed by subject id.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedCohorts {
    pub disease: DiseaseKind,
    pub healthy: BTreeMap<u64, WaveformSet>,
    pub diseased: BTreeMap<u64, WaveformSet>,
}

impl PairedCohorts {
    pub fn new(
        disease: DiseaseKind,
        healthy: BTreeMap<u64, WaveformSet>,
        diseased: BTreeMap<u64, WaveformSet>,
    ) -> Self {
        PairedCohorts {
            disease,
            healthy,
            diseased,
        }
    }

    pub fn from_patients(healthy: &[VirtualPatient], diseased: &[VirtualPatient]) -> Result<Self> {
        let disease = match diseased.first().map(|p| p.cohort) {
            Some(Cohort::Diseased(k)) => k,
            _ => {
                return Err(Error::InvalidDataset(
                    "diseased cohort is empty or healthy".into(),
                ))
            }
        };
        if healthy.iter().any(|p| p.cohort != Cohort::Healthy)
            || diseased
                .iter()
                .any(|p| p.cohort != Cohort::Diseased(disease))
        {
            return Err(Error::InvalidDataset("cohorts mix disease tags".into()));
        }
        let map = |ps: &[VirtualPatient]| ps.iter().map(|p| (p.id, p.waveforms.clone())).collect();
        Ok(PairedCohorts::new(disease, map(healthy), map(diseased)))
    }

    pub fn split_plan(&self, n_folds: usize, seed: u64) -> Result<SplitPlan> {
        let h: Vec<u64> = self.healthy.keys().copied().collect();
        let d: Vec<u64> = self.diseased.keys().copied().collect();
        build_split_plan(self.disease, &h, &d, n_folds, seed)
    }

    fn waveforms(&self, m: Member) -> Result<&WaveformSet> {
        let source = if m.label.is_diseased() {
            &self.diseased
        } else {
            &self.healthy
        };
        source
            .get(&m.id)
            .ok_or_else(|| Error::InvalidPlan(format!("subject {} missing from its cohort", m.id)))
    }

    /// Unscaled dataset of `members` restricted to `combo`.
    pub fn dataset(&self, members: &[Member], combo: &MeasurementCombination) -> Result<Dataset> {
        let mut data = Vec::new();
        let mut cols = 0;
        for &m in members {
            let f = assemble_features(self.waveforms(m)?, combo)?;
            cols = f.len();
            data.extend(f);
        }
        let x = Matrix::from_vec(members.len(), cols, data)?;
        let y: Vec<Label> = members.iter().map(|m| m.label).collect();
        let ids = members.iter().map(|m| m.id).collect();
        Dataset::new(x, y, ids)
    }

    /// Train and test sets of one fold, Z-scored with training statistics.
    pub fn fold_datasets(
        &self,
        fold: &Fold,
        combo: &MeasurementCombination,
    ) -> Result<(Dataset, Dataset)> {
        let train = self.dataset(&fold.train, combo)?;
        let test = self.dataset(&fold.test, combo)?;
        let stats = StandardizationStats::fit(train.x())?;
        let train = train.with_features(stats.transform(train.x())?)?;
        let test = test.with_features(stats.transform(test.x())?)?;
        Ok((train, test))
    }
}

/// Seed of one (disease, method, combination, fold) cell.
pub fn cell_seed(
    master: u64,
    disease: DiseaseKind,
    method: Method,
    combo: &MeasurementCombination,
    fold: usize,
) -> u64 {
    seed::derive(
        master,
        &[
            CELL_TAG,
            disease.code(),
            method.code(),
            combo.seed_key(),
            fold as u64,
        ],
    )
}

/// Trains on one fold's training rows and counts test outcomes.
pub fn evaluate_cell(
    cohorts: &PairedCohorts,
    plan: &SplitPlan,
    fold: usize,
    combo: &MeasurementCombination,
    hyperparams: &Hyperparams,
    master_seed: u64,
) -> Result<ConfusionCounts> {
    let f = plan
        .folds
        .get(fold)
        .ok_or_else(|| Error::InvalidPlan(format!("fold {fold} out of range")))?;
    let (train, test) = cohorts.fold_datasets(f, combo)?;
    let seed = cell_seed(master_seed, plan.disease, hyperparams.method(), combo, fold);
    let model = learners::fit(hyperparams, &train, seed)?;
    let predicted = model.predict_all(test.x())?;
    ConfusionCounts::tally(test.y(), &predicted)
}

/// Evaluates every (method, combination, fold) cell in parallel. Failing
/// cells are recorded with their error instead of aborting the search.
pub fn run_combination_search(
    cohorts: &PairedCohorts,
    plan: &SplitPlan,
    hyperparams: &[Hyperparams],
    combos: &[MeasurementCombination],
    master_seed: u64,
) -> Result<EvaluationReport> {
    if hyperparams.is_empty() || combos.is_empty() {
        return Err(Error::InvalidConfig(
            "combination search needs methods and combinations".into(),
        ));
    }
    plan.validate()?;
    let n_folds = plan.folds.len();
    let cells: Vec<(usize, usize, usize)> = (0..hyperparams.len())
        .flat_map(|m| (0..combos.len()).flat_map(move |c| (0..n_folds).map(move |f| (m, c, f))))
        .collect();
    let records = cells
        .into_par_iter()
        .map(|(m, c, f)| {
            let outcome = evaluate_cell(cohorts, plan, f, &combos[c], &hyperparams[m], master_seed);
            if let Err(e) = &outcome {
                log::warn!("{} {} fold {f}: {e}", hyperparams[m].method(), combos[c]);
            }
            CellRecord::from_outcome(hyperparams[m].method(), combos[c], f, outcome)
        })
        .collect();
    Ok(EvaluationReport {
        disease: plan.disease,
        methods: hyperparams.iter().map(Hyperparams::method).collect(),
        combinations: combos.to_vec(),
        n_folds,
        records,
    })
}
