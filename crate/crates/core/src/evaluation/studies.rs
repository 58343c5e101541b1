//! Follow-up analyses on top of combination-search reports.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, ConfusionCounts};
use super::report::EvaluationReport;
use super::{evaluate_cell, PairedCohorts, SplitPlan};
use crate::error::{Error, Result};
use crate::features::{Laterality, MeasurementCombination};
use crate::learners::{Hyperparams, Method};
use crate::sites::{Measurement, Side};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges over [0, 1].
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub values: Vec<f64>,
}

impl Histogram {
    pub fn new(values: Vec<f64>, bins: usize) -> Self {
        let edges: Vec<f64> = (0..=bins).map(|i| i as f64 / bins as f64).collect();
        let mut counts = vec![0; bins];
        for &v in &values {
            let b = ((v * bins as f64).floor() as isize).clamp(0, bins as isize - 1) as usize;
            counts[b] += 1;
        }
        Histogram {
            edges,
            counts,
            values,
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Q1Histograms {
    pub include: Histogram,
    pub exclude: Histogram,
}

impl Q1Histograms {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_low", "bin_high", "include_q1", "exclude_q1"])?;
        for i in 0..self.include.counts.len() {
            w.write_record([
                format!("{:.4}", self.include.edges[i]),
                format!("{:.4}", self.include.edges[i + 1]),
                self.include.counts[i].to_string(),
                self.exclude.counts[i].to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<histogram csv>", e))?;
        Ok(())
    }
}

/// Splits the mean F1 of every (method, combination) cell of `methods` by
/// whether the combination contains Q1.
pub fn q1_inclusion_histograms(
    report: &EvaluationReport,
    methods: &[Method],
    bins: usize,
) -> Result<Q1Histograms> {
    report.check_complete()?;
    if bins == 0 {
        return Err(Error::InvalidConfig(
            "histogram needs at least one bin".into(),
        ));
    }
    if let Some(m) = methods.iter().find(|m| !report.methods.contains(m)) {
        return Err(Error::IncompleteReport(format!("method {m} not in report")));
    }
    let (mut inc, mut exc) = (Vec::new(), Vec::new());
    for a in report
        .aggregates()
        .into_iter()
        .filter(|a| methods.contains(&a.method))
    {
        if a.combination.contains(Measurement::Q1) {
            inc.push(a.f1);
        } else {
            exc.push(a.f1);
        }
    }
    Ok(Q1Histograms {
        include: Histogram::new(inc, bins),
        exclude: Histogram::new(exc, bins),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub method: Method,
    pub combination: MeasurementCombination,
    pub f1_reference: f64,
    pub f1_low: f64,
    /// `f1_low / f1_reference`; NaN when the reference F1 is zero.
    pub ratio: f64,
}

/// Element-wise F1 ratio of a low-severity report against its reference.
pub fn low_severity_ratio_study(
    reference: &EvaluationReport,
    low: &EvaluationReport,
) -> Result<Vec<RatioRow>> {
    if reference.methods != low.methods || reference.combinations != low.combinations {
        return Err(Error::MismatchedReports(
            "reports cover different methods or combinations".into(),
        ));
    }
    reference.check_complete()?;
    low.check_complete()?;
    let mut rows = Vec::new();
    for &m in &reference.methods {
        for c in &reference.combinations {
            let r = reference.aggregate(m, c).expect("complete").f1;
            let l = low.aggregate(m, c).expect("complete").f1;
            rows.push(RatioRow {
                method: m,
                combination: *c,
                f1_reference: r,
                f1_low: l,
                ratio: if r > 0.0 { l / r } else { f64::NAN },
            });
        }
    }
    Ok(rows)
}

pub fn write_ratio_csv<W: Write>(out: W, rows: &[RatioRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "method",
        "combination",
        "f1_reference",
        "f1_low_severity",
        "ratio",
    ])?;
    for r in rows {
        w.write_record([
            r.method.name().to_string(),
            r.combination.label(),
            format!("{:.4}", r.f1_reference),
            format!("{:.4}", r.f1_low),
            format!("{:.4}", r.ratio),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<ratio csv>", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnilateralRow {
    pub measurement: Measurement,
    pub laterality: Laterality,
    pub sensitivity: f64,
    pub specificity: f64,
    pub f1: f64,
    pub fold_counts: Vec<ConfusionCounts>,
}

impl UnilateralRow {
    pub fn sides_label(&self) -> &'static str {
        match self.laterality {
            Laterality::Bilateral => "Both",
            Laterality::Unilateral(Side::Right) => "R",
            Laterality::Unilateral(Side::Left) => "L",
        }
    }
}

/// Fold-mean metrics for each measurement read on the right, the left and
/// both sides. The `Both` rows reuse the cell seeds of the main search.
pub fn unilateral_study(
    cohorts: &PairedCohorts,
    plan: &SplitPlan,
    measurements: &[Measurement],
    hyperparams: &Hyperparams,
    master_seed: u64,
) -> Result<Vec<UnilateralRow>> {
    let lateralities = [
        Laterality::Unilateral(Side::Right),
        Laterality::Unilateral(Side::Left),
        Laterality::Bilateral,
    ];
    let combos: Vec<MeasurementCombination> = measurements
        .iter()
        .flat_map(|&m| {
            lateralities
                .iter()
                .map(move |&l| MeasurementCombination::new([m], l))
        })
        .collect::<Result<_>>()?;
    combos
        .par_iter()
        .map(|combo| {
            let counts = (0..plan.folds.len())
                .map(|f| evaluate_cell(cohorts, plan, f, combo, hyperparams, master_seed))
                .collect::<Result<Vec<_>>>()?;
            let metrics = counts
                .iter()
                .map(|&c| compute_metrics(c))
                .collect::<Result<Vec<_>>>()?;
            let mean = |f: fn(&super::Metrics) -> f64| {
                metrics.iter().map(f).sum::<f64>() / metrics.len() as f64
            };
            Ok(UnilateralRow {
                measurement: combo.measurements()[0],
                laterality: combo.laterality(),
                sensitivity: mean(|m| m.sensitivity),
                specificity: mean(|m| m.specificity),
                f1: mean(|m| m.f1),
                fold_counts: counts,
            })
        })
        .collect()
}

pub fn write_unilateral_csv<W: Write>(out: W, rows: &[UnilateralRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["measurement", "sides", "sensitivity", "specificity", "f1"])?;
    for r in rows {
        w.write_record([
            r.measurement.name().to_string(),
            r.sides_label().to_string(),
            format!("{:.4}", r.sensitivity),
            format!("{:.4}", r.specificity),
            format!("{:.4}", r.f1),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<unilateral csv>", e))?;
    Ok(())
}
