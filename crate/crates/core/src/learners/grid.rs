//! Exhaustive hyperparameter search scored by mean fold F1.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hyperparams::{GbParams, Hyperparams, Method, MlpParams, RfParams};
use crate::error::{Error, Result};
use crate::evaluation::{compute_metrics, evaluate_cell, PairedCohorts, SplitPlan};
use crate::features::MeasurementCombination;

/// Integer range `start..=end` stepping by `step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Steps {
    pub start: usize,
    pub end: usize,
    pub step: usize,
}

impl Steps {
    pub const fn new(start: usize, end: usize, step: usize) -> Self {
        Steps { start, end, step }
    }

    pub fn values(&self) -> Vec<usize> {
        if self.step == 0 || self.start > self.end {
            return Vec::new();
        }
        (self.start..=self.end).step_by(self.step).collect()
    }
}

/// Two-axis grid; the axes mean (trees, depth) for RF and GB and
/// (neurons, layers) for MLP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub method: Method,
    pub first: Steps,
    pub second: Steps,
}

impl GridSpec {
    pub fn default_for(method: Method) -> Result<Self> {
        let (first, second) = match method {
            Method::RF => (Steps::new(10, 400, 10), Steps::new(20, 200, 10)),
            Method::GB => (Steps::new(10, 100, 10), Steps::new(2, 20, 1)),
            Method::MLP => (Steps::new(10, 200, 10), Steps::new(1, 6, 1)),
            m => return Err(Error::NoGridForMethod(m.name().into())),
        };
        Ok(GridSpec {
            method,
            first,
            second,
        })
    }

    pub fn axis_names(&self) -> (&'static str, &'static str) {
        match self.method {
            Method::MLP => ("neurons", "layers"),
            _ => ("trees", "depth"),
        }
    }

    /// Grid cells, first axis outermost, built on top of `base`.
    pub fn cells(&self, base: &Hyperparams) -> Result<Vec<Hyperparams>> {
        if base.method() != self.method {
            return Err(Error::InvalidConfig(format!(
                "base hyperparameters are {} but the grid is {}",
                base.method(),
                self.method
            )));
        }
        let mut out = Vec::new();
        for a in self.first.values() {
            for b in self.second.values() {
                out.push(match base {
                    Hyperparams::RF(p) => Hyperparams::RF(RfParams {
                        n_trees: a,
                        max_depth: b,
                        ..p.clone()
                    }),
                    Hyperparams::GB(p) => Hyperparams::GB(GbParams {
                        n_trees: a,
                        max_depth: b,
                        ..p.clone()
                    }),
                    Hyperparams::MLP(p) => Hyperparams::MLP(MlpParams {
                        neurons_per_layer: a,
                        n_hidden_layers: b,
                        ..p.clone()
                    }),
                    _ => return Err(Error::NoGridForMethod(self.method.name().into())),
                });
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub hyperparams: Hyperparams,
    pub mean_f1: f64,
    pub fold_f1: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub rows: Vec<GridRow>,
    pub best: usize,
}

impl GridResult {
    pub fn best(&self) -> &GridRow {
        &self.rows[self.best]
    }

    /// Full table: the two grid axes, mean F1 and per-fold F1.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let n_folds = self.rows.first().map_or(0, |r| r.fold_f1.len());
        let (a, b) = match self.rows.first().map(|r| r.hyperparams.method()) {
            Some(Method::MLP) => ("neurons", "layers"),
            _ => ("trees", "depth"),
        };
        let mut header: Vec<String> = ["method", a, b, "f1"].map(String::from).to_vec();
        header.extend((0..n_folds).map(|f| format!("fold{f}_f1")));
        w.write_record(&header)?;
        for r in &self.rows {
            let (x, y) = grid_axes(&r.hyperparams)
                .ok_or_else(|| Error::NoGridForMethod(r.hyperparams.method().name().into()))?;
            let mut row = vec![
                r.hyperparams.method().name().to_string(),
                x.to_string(),
                y.to_string(),
                format!("{:.4}", r.mean_f1),
            ];
            row.extend(r.fold_f1.iter().map(|v| format!("{v:.4}")));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<grid csv>", e))?;
        Ok(())
    }
}

/// The two searched values of a grid cell.
pub fn grid_axes(h: &Hyperparams) -> Option<(usize, usize)> {
    match h {
        Hyperparams::RF(p) => Some((p.n_trees, p.max_depth)),
        Hyperparams::GB(p) => Some((p.n_trees, p.max_depth)),
        Hyperparams::MLP(p) => Some((p.neurons_per_layer, p.n_hidden_layers)),
        _ => None,
    }
}

/// Scores every cell with `evaluate` (returning per-fold F1) and returns the
/// full table with the first cell of maximal mean F1 marked best. Cells whose
/// evaluation fails score NaN and are never chosen.
pub fn grid_search<F>(cells: &[Hyperparams], evaluate: F) -> Result<GridResult>
where
    F: Fn(&Hyperparams) -> Result<Vec<f64>> + Sync,
{
    if cells.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let rows: Vec<GridRow> = cells
        .par_iter()
        .map(|h| {
            let (mean_f1, fold_f1) = match evaluate(h) {
                Ok(f) if !f.is_empty() => (f.iter().sum::<f64>() / f.len() as f64, f),
                Ok(_) => (f64::NAN, Vec::new()),
                Err(e) => {
                    log::warn!("grid cell {} failed: {e}", h.summary());
                    (f64::NAN, Vec::new())
                }
            };
            GridRow {
                hyperparams: h.clone(),
                mean_f1,
                fold_f1,
            }
        })
        .collect();
    let best = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.mean_f1.is_nan())
        .fold(None, |acc: Option<(usize, f64)>, (i, r)| match acc {
            Some((_, b)) if r.mean_f1 <= b => acc,
            _ => Some((i, r.mean_f1)),
        })
        .map(|(i, _)| i)
        .ok_or_else(|| Error::InvalidConfig("every grid cell failed".into()))?;
    Ok(GridResult { rows, best })
}

/// Grid search using the fold protocol of the combination search.
pub fn grid_search_folds(
    cells: &[Hyperparams],
    cohorts: &PairedCohorts,
    plan: &SplitPlan,
    combo: &MeasurementCombination,
    master_seed: u64,
) -> Result<GridResult> {
    grid_search(cells, |h| {
        (0..plan.folds.len())
            .map(|f| {
                let counts = evaluate_cell(cohorts, plan, f, combo, h, master_seed)?;
                Ok(compute_metrics(counts)?.f1)
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_sizes() {
        let rf = GridSpec::default_for(Method::RF).unwrap();
        let cells = rf.cells(&Method::RF.default_hyperparams()).unwrap();
        assert_eq!(cells.len(), 760);
        assert_eq!(rf.first.values().first(), Some(&10));
        assert_eq!(rf.first.values().last(), Some(&400));
        assert_eq!(rf.second.values().first(), Some(&20));
        assert_eq!(rf.second.values().last(), Some(&200));
        let gb = GridSpec::default_for(Method::GB).unwrap();
        assert_eq!(
            gb.first.values(),
            (1..=10).map(|i| i * 10).collect::<Vec<_>>()
        );
        assert_eq!(gb.second.values(), (2..=20).collect::<Vec<_>>());
        let mlp = GridSpec::default_for(Method::MLP).unwrap();
        assert_eq!(
            mlp.cells(&Method::MLP.default_hyperparams()).unwrap().len(),
            120
        );
        for m in [Method::NB, Method::LR, Method::SVM] {
            assert!(matches!(
                GridSpec::default_for(m),
                Err(Error::NoGridForMethod(_))
            ));
        }
    }

    #[test]
    fn one_cell_and_rigged_cells() {
        let a = Method::GB.default_hyperparams();
        let b = Hyperparams::GB(GbParams {
            n_trees: 7,
            ..GbParams::default()
        });
        let r = grid_search(std::slice::from_ref(&a), |_| Ok(vec![0.3])).unwrap();
        assert_eq!(r.best().hyperparams, a);
        let r = grid_search(&[b.clone(), a.clone()], |h| {
            Ok(if *h == a {
                vec![0.9, 0.8]
            } else {
                vec![0.8, 0.8]
            })
        })
        .unwrap();
        assert_eq!(r.best, 1);
        assert!(matches!(
            grid_search(&[], |_| Ok(vec![1.0])),
            Err(Error::EmptyGrid)
        ));
    }
}
