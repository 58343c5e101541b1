//! Healthy/diseased split and the five resampled folds.
//!
//! Paired subjects are shuffled; the first half contributes its healthy
//! record and the next half its diseased twin, so no subject appears in both
//! classes. An odd count drops the last subject. Each fold then reshuffles
//! both classes independently and holds out `floor(k / 3)` subjects per class.
//! The shuffles depend only on the seed and the paired ids, so cohorts of
//! different diseases built on the same subjects share one split.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::disease::DiseaseKind;
use crate::error::{Error, Result};
use crate::learners::Label;
use crate::seed;

pub const DEFAULT_FOLDS: usize = 5;
const PLAN_TAG: u64 = 0x51 << 56;

/// One row of the combined set: a subject id and which of its records is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Member {
    pub id: u64,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<Member>,
    pub test: Vec<Member>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub disease: DiseaseKind,
    /// Subjects used through their healthy record, sorted.
    pub healthy_ids: Vec<u64>,
    /// Subjects used through their diseased twin, sorted.
    pub diseased_ids: Vec<u64>,
    pub folds: Vec<Fold>,
}

fn members(ids: &[u64], label: Label) -> impl Iterator<Item = Member> + '_ {
    ids.iter().map(move |&id| Member { id, label })
}

pub fn build_split_plan(
    disease: DiseaseKind,
    healthy_ids: &[u64],
    diseased_ids: &[u64],
    n_folds: usize,
    seed: u64,
) -> Result<SplitPlan> {
    if n_folds == 0 {
        return Err(Error::InvalidPlan("at least one fold is required".into()));
    }
    let healthy: BTreeSet<u64> = healthy_ids.iter().copied().collect();
    let diseased: BTreeSet<u64> = diseased_ids.iter().copied().collect();
    if healthy.len() != healthy_ids.len() || diseased.len() != diseased_ids.len() {
        return Err(Error::InvalidPlan("duplicate subject ids".into()));
    }
    let mut paired: Vec<u64> = healthy.intersection(&diseased).copied().collect();
    let per_class = paired.len() / 2;
    if per_class / 3 == 0 || per_class - per_class / 3 == 0 {
        return Err(Error::TooFewSamples {
            needed: 6,
            got: paired.len(),
        });
    }
    paired.shuffle(&mut seed::derived_stream(seed, &[PLAN_TAG]));
    let mut h: Vec<u64> = paired[..per_class].to_vec();
    let mut d: Vec<u64> = paired[per_class..2 * per_class].to_vec();
    h.sort_unstable();
    d.sort_unstable();

    let n_test = per_class / 3;
    let folds = (0..n_folds as u64)
        .map(|f| {
            let mut rng = seed::derived_stream(seed, &[PLAN_TAG, f + 1]);
            let mut hs = h.clone();
            let mut ds = d.clone();
            hs.shuffle(&mut rng);
            ds.shuffle(&mut rng);
            let mut test: Vec<Member> = members(&hs[..n_test], Label::Healthy)
                .chain(members(&ds[..n_test], Label::Diseased))
                .collect();
            let mut train: Vec<Member> = members(&hs[n_test..], Label::Healthy)
                .chain(members(&ds[n_test..], Label::Diseased))
                .collect();
            test.sort_unstable();
            train.sort_unstable();
            Fold { train, test }
        })
        .collect();
    Ok(SplitPlan {
        disease,
        healthy_ids: h,
        diseased_ids: d,
        folds,
    })
}

impl SplitPlan {
    /// Checks class disjointness, balance and train/test separation.
    pub fn validate(&self) -> Result<()> {
        let h: BTreeSet<u64> = self.healthy_ids.iter().copied().collect();
        let d: BTreeSet<u64> = self.diseased_ids.iter().copied().collect();
        if h.len() != d.len() {
            return Err(Error::InvalidPlan("classes are unbalanced".into()));
        }
        if !h.is_disjoint(&d) {
            return Err(Error::InvalidPlan(
                "a subject is used as both healthy and diseased".into(),
            ));
        }
        for (i, fold) in self.folds.iter().enumerate() {
            let train: BTreeSet<u64> = fold.train.iter().map(|m| m.id).collect();
            if let Some(m) = fold.test.iter().find(|m| train.contains(&m.id)) {
                return Err(Error::InvalidPlan(format!(
                    "subject {} leaks into fold {i} test set",
                    m.id
                )));
            }
            for m in fold.train.iter().chain(&fold.test) {
                let source = if m.label.is_diseased() { &d } else { &h };
                if !source.contains(&m.id) {
                    return Err(Error::InvalidPlan(format!(
                        "subject {} has the wrong class in fold {i}",
                        m.id
                    )));
                }
            }
            if train.len() + fold.test.len() != h.len() + d.len() {
                return Err(Error::InvalidPlan(format!(
                    "fold {i} does not cover the combined set"
                )));
            }
        }
        Ok(())
    }
}
