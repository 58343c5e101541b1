use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Binary class label. `Healthy` is the negative class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Healthy,
    Diseased,
}

impl Label {
    pub fn from_diseased(diseased: bool) -> Self {
        if diseased {
            Label::Diseased
        } else {
            Label::Healthy
        }
    }

    pub fn is_diseased(self) -> bool {
        self == Label::Diseased
    }

    /// 1.0 for diseased, 0.0 for healthy.
    pub fn target(self) -> f64 {
        if self.is_diseased() {
            1.0
        } else {
            0.0
        }
    }

    /// Thresholds a probability; an exact 0.5 is healthy.
    pub fn from_probability(p: f64) -> Self {
        Label::from_diseased(p > 0.5)
    }
}

/// Labelled feature rows with the subject id of each row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Matrix,
    y: Vec<Label>,
    ids: Vec<u64>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<Label>, ids: Vec<u64>) -> Result<Self> {
        if x.rows() == 0 || x.cols() == 0 {
            return Err(Error::EmptyMatrix);
        }
        if y.len() != x.rows() || ids.len() != x.rows() {
            return Err(Error::InvalidDataset(format!(
                "{} rows, {} labels, {} ids",
                x.rows(),
                y.len(),
                ids.len()
            )));
        }
        if let Some(i) = x.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i / x.cols()));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        if let Some(dup) = ids.iter().find(|id| !seen.insert(**id)) {
            return Err(Error::InvalidDataset(format!("duplicate subject id {dup}")));
        }
        Ok(Dataset { x, y, ids })
    }

    /// Convenience constructor with ids `0..n`.
    pub fn from_rows(rows: &[Vec<f64>], y: Vec<Label>) -> Result<Self> {
        let ids = (0..rows.len() as u64).collect();
        Dataset::new(Matrix::from_rows(rows)?, y, ids)
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn y(&self) -> &[Label] {
        &self.y
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn n_rows(&self) -> usize {
        self.x.rows()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.y.iter().map(|l| l.target()).collect()
    }

    /// (healthy, diseased) counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let d = self.y.iter().filter(|l| l.is_diseased()).count();
        (self.y.len() - d, d)
    }

    pub fn require_both_classes(&self) -> Result<()> {
        let (h, d) = self.class_counts();
        if h == 0 || d == 0 {
            return Err(Error::SingleClass);
        }
        Ok(())
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(idx),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            ids: idx.iter().map(|&i| self.ids[i]).collect(),
        }
    }

    /// Copy with rows sorted by subject id, so that fitting does not depend
    /// on the order rows were supplied in.
    pub fn canonical(&self) -> Dataset {
        let mut idx: Vec<usize> = (0..self.n_rows()).collect();
        idx.sort_by_key(|&i| self.ids[i]);
        self.subset(&idx)
    }

    pub fn with_features(&self, x: Matrix) -> Result<Dataset> {
        Dataset::new(x, self.y.clone(), self.ids.clone())
    }
}
