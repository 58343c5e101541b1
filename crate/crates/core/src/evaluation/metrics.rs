use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::Label;

/// Confusion counts with diseased as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn tally(truth: &[Label], predicted: &[Label]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::DimensionMismatch {
                expected: truth.len(),
                got: predicted.len(),
            });
        }
        let mut c = ConfusionCounts::default();
        for (t, p) in truth.iter().zip(predicted) {
            match (t.is_diseased(), p.is_diseased()) {
                (true, true) => c.tp += 1,
                (true, false) => c.fn_ += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fn_ + self.fp + self.tn
    }
}

/// Ratios derived from [`ConfusionCounts`]. A ratio with a zero denominator
/// is reported as 0 and sets `degenerate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub degenerate: bool,
}

pub fn compute_metrics(c: ConfusionCounts) -> Result<Metrics> {
    if c.total() == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let mut degenerate = false;
    let mut ratio = |num: usize, den: usize| {
        if den == 0 {
            degenerate = true;
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let sensitivity = ratio(c.tp, c.tp + c.fn_);
    let specificity = ratio(c.tn, c.tn + c.fp);
    let precision = ratio(c.tp, c.tp + c.fp);
    // 2PR/(P+R) written on counts avoids rounding in the ratios.
    let f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_);
    Ok(Metrics {
        sensitivity,
        specificity,
        precision,
        recall: sensitivity,
        f1,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(tp: usize, fn_: usize, fp: usize, tn: usize) -> ConfusionCounts {
        ConfusionCounts { tp, fn_, fp, tn }
    }

    #[test]
    fn symmetric_counts() {
        let m = compute_metrics(counts(2, 1, 1, 2)).unwrap();
        for v in [m.sensitivity, m.specificity, m.precision, m.f1] {
            assert!((v - 2.0 / 3.0).abs() < 1e-15);
        }
        assert!(!m.degenerate);
    }

    #[test]
    fn perfect_and_degenerate() {
        let m = compute_metrics(counts(100, 0, 0, 100)).unwrap();
        assert_eq!(
            (m.sensitivity, m.specificity, m.precision, m.f1),
            (1.0, 1.0, 1.0, 1.0)
        );
        let m = compute_metrics(counts(0, 5, 0, 5)).unwrap();
        assert!(m.degenerate);
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.f1, 0.0);
        assert!(compute_metrics(counts(0, 0, 0, 0)).is_err());
    }

    #[test]
    fn f1_is_harmonic_mean() {
        let m = compute_metrics(counts(7, 3, 2, 11)).unwrap();
        let (p, r) = (m.precision, m.recall);
        assert!((m.f1 - 2.0 * p * r / (p + r)).abs() < 1e-15);
    }
}
