use std::io::Write;

use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, ConfusionCounts, Metrics};
use crate::disease::DiseaseKind;
use crate::error::{Error, Result};
use crate::features::MeasurementCombination;
use crate::learners::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricKind {
    F1,
    Sensitivity,
    Specificity,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [
        MetricKind::F1,
        MetricKind::Sensitivity,
        MetricKind::Specificity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::F1 => "f1",
            MetricKind::Sensitivity => "sensitivity",
            MetricKind::Specificity => "specificity",
        }
    }

    pub fn of(self, m: &Metrics) -> f64 {
        match self {
            MetricKind::F1 => m.f1,
            MetricKind::Sensitivity => m.sensitivity,
            MetricKind::Specificity => m.specificity,
        }
    }
}

/// Outcome of one (method, combination, fold) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub method: Method,
    pub combination: MeasurementCombination,
    pub fold: usize,
    pub counts: Option<ConfusionCounts>,
    pub metrics: Option<Metrics>,
    pub error: Option<String>,
}

impl CellRecord {
    pub fn from_outcome(
        method: Method,
        combination: MeasurementCombination,
        fold: usize,
        outcome: Result<ConfusionCounts>,
    ) -> Self {
        let (counts, metrics, error) = match outcome.and_then(|c| Ok((c, compute_metrics(c)?))) {
            Ok((c, m)) => (Some(c), Some(m), None),
            Err(e) => (None, None, Some(e.to_string())),
        };
        CellRecord {
            method,
            combination,
            fold,
            counts,
            metrics,
            error,
        }
    }
}

/// Fold means of one (method, combination) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: Method,
    pub combination: MeasurementCombination,
    pub f1: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub folds: usize,
    pub failed_folds: usize,
}

impl Aggregate {
    pub fn get(&self, kind: MetricKind) -> f64 {
        match kind {
            MetricKind::F1 => self.f1,
            MetricKind::Sensitivity => self.sensitivity,
            MetricKind::Specificity => self.specificity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub disease: DiseaseKind,
    pub methods: Vec<Method>,
    pub combinations: Vec<MeasurementCombination>,
    pub n_folds: usize,
    pub records: Vec<CellRecord>,
}

impl EvaluationReport {
    pub fn has_failures(&self) -> bool {
        self.records.iter().any(|r| r.error.is_some())
    }

    /// Mean over the successful folds; `None` when no fold succeeded.
    pub fn aggregate(&self, method: Method, combo: &MeasurementCombination) -> Option<Aggregate> {
        let cells: Vec<&CellRecord> = self
            .records
            .iter()
            .filter(|r| r.method == method && r.combination == *combo)
            .collect();
        let ok: Vec<&Metrics> = cells.iter().filter_map(|r| r.metrics.as_ref()).collect();
        if ok.is_empty() {
            return None;
        }
        let mean = |k: MetricKind| ok.iter().map(|m| k.of(m)).sum::<f64>() / ok.len() as f64;
        Some(Aggregate {
            method,
            combination: *combo,
            f1: mean(MetricKind::F1),
            sensitivity: mean(MetricKind::Sensitivity),
            specificity: mean(MetricKind::Specificity),
            folds: ok.len(),
            failed_folds: cells.len() - ok.len(),
        })
    }

    /// Aggregates in method-major, then combination order.
    pub fn aggregates(&self) -> Vec<Aggregate> {
        self.methods
            .iter()
            .flat_map(|&m| {
                self.combinations
                    .iter()
                    .filter_map(move |c| self.aggregate(m, c))
            })
            .collect()
    }

    /// Errors unless every (method, combination) pair has all folds without failures.
    pub fn check_complete(&self) -> Result<()> {
        for &m in &self.methods {
            for c in &self.combinations {
                match self.aggregate(m, c) {
                    Some(a) if a.folds == self.n_folds && a.failed_folds == 0 => {}
                    _ => {
                        return Err(Error::IncompleteReport(format!(
                            "{m} / {c} lacks complete folds"
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    /// One row per combination, one column per method. Cells with any failed
    /// fold print `NA`.
    pub fn write_wide_csv<W: Write>(&self, out: W, kind: MetricKind) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["combination".to_string()];
        header.extend(self.methods.iter().map(|m| m.name().to_string()));
        w.write_record(&header)?;
        for c in &self.combinations {
            let mut row = vec![c.label()];
            for &m in &self.methods {
                row.push(match self.aggregate(m, c) {
                    Some(a) if a.failed_folds == 0 => format!("{:.4}", a.get(kind)),
                    _ => "NA".to_string(),
                });
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<wide csv>", e))?;
        Ok(())
    }

    /// Long format: one row per fold with its counts and metrics.
    pub fn write_folds_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "disease",
            "method",
            "combination",
            "fold",
            "tp",
            "fn",
            "fp",
            "tn",
            "sensitivity",
            "specificity",
            "precision",
            "f1",
            "degenerate",
            "error",
        ])?;
        for r in &self.records {
            let mut row = vec![
                self.disease.tag().to_string(),
                r.method.name().to_string(),
                r.combination.label(),
                r.fold.to_string(),
            ];
            match (&r.counts, &r.metrics) {
                (Some(c), Some(m)) => {
                    row.extend([c.tp, c.fn_, c.fp, c.tn].map(|v| v.to_string()));
                    row.extend(
                        [m.sensitivity, m.specificity, m.precision, m.f1]
                            .map(|v| format!("{v:.4}")),
                    );
                    row.push(m.degenerate.to_string());
                    row.push(String::new());
                }
                _ => {
                    row.extend(std::iter::repeat_n(String::new(), 9));
                    row.push(r.error.clone().unwrap_or_default());
                }
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<folds csv>", e))?;
        Ok(())
    }
}

/// F1 statistics over all combinations with `k` measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountSummary {
    pub k: usize,
    pub n_combinations: usize,
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    pub argmax_method: Method,
    pub argmax_combination: MeasurementCombination,
}

/// Groups the 63 combinations by size and reduces the mean fold F1 of every
/// method in the report.
pub fn measurement_count_summary(report: &EvaluationReport) -> Result<Vec<CountSummary>> {
    report.check_complete()?;
    let mut masks: Vec<u8> = report.combinations.iter().map(|c| c.mask()).collect();
    masks.sort_unstable();
    masks.dedup();
    if masks.len() != 63 {
        return Err(Error::IncompleteReport(format!(
            "{} of 63 combinations present",
            masks.len()
        )));
    }
    let aggregates = report.aggregates();
    (1..=6)
        .map(|k| {
            let group: Vec<&Aggregate> = aggregates
                .iter()
                .filter(|a| a.combination.len() == k)
                .collect();
            let best = group
                .iter()
                .copied()
                .reduce(|a, b| if b.f1 > a.f1 { b } else { a })
                .ok_or_else(|| Error::IncompleteReport(format!("no combination of size {k}")))?;
            Ok(CountSummary {
                k,
                n_combinations: group
                    .iter()
                    .map(|a| a.combination)
                    .collect::<std::collections::BTreeSet<_>>()
                    .len(),
                mean: group.iter().map(|a| a.f1).sum::<f64>() / group.len() as f64,
                max: best.f1,
                min: group.iter().map(|a| a.f1).fold(f64::INFINITY, f64::min),
                argmax_method: best.method,
                argmax_combination: best.combination,
            })
        })
        .collect()
}

pub fn write_count_summary_csv<W: Write>(out: W, rows: &[CountSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "measurements",
        "combinations",
        "mean_f1",
        "max_f1",
        "min_f1",
        "best_method",
        "best_combination",
    ])?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            r.n_combinations.to_string(),
            format!("{:.4}", r.mean),
            format!("{:.4}", r.max),
            format!("{:.4}", r.min),
            r.argmax_method.name().to_string(),
            r.argmax_combination.label(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<summary csv>", e))?;
    Ok(())
}
