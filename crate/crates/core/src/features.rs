//! Feature vectors built from measurement combinations, and Z-score scaling.
//!
//! Features are concatenated in canonical order: measurements `Q1, Q2, Q3,
//! P1, P2, P3`, right side before left, and within each waveform the
//! coefficients `b0, a1..aN, b1..bN`. A bilateral measurement therefore
//! contributes 22 features at order 5 and a unilateral one 11.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierSeries;
use crate::linalg::Matrix;
use crate::sites::{Measurement, Side, Site};
use crate::surrogate::WaveformSet;

/// Order used when printing and enumerating combinations.
pub const DISPLAY_ORDER: [Measurement; 6] = [
    Measurement::Q3,
    Measurement::Q2,
    Measurement::Q1,
    Measurement::P3,
    Measurement::P2,
    Measurement::P1,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Laterality {
    Bilateral,
    Unilateral(Side),
}

impl Laterality {
    pub fn sides(self) -> &'static [Side] {
        match self {
            Laterality::Bilateral => &Side::BOTH,
            Laterality::Unilateral(Side::Right) => &[Side::Right],
            Laterality::Unilateral(Side::Left) => &[Side::Left],
        }
    }
}

/// A non-empty subset of the six measurements plus laterality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MeasurementCombination {
    mask: u8,
    laterality: Laterality,
}

impl MeasurementCombination {
    pub fn new(
        measurements: impl IntoIterator<Item = Measurement>,
        laterality: Laterality,
    ) -> Result<Self> {
        let mask = measurements
            .into_iter()
            .fold(0u8, |m, x| m | (1 << x.index()));
        Self::from_mask(mask, laterality)
    }

    pub fn bilateral(measurements: &[Measurement]) -> Result<Self> {
        Self::new(measurements.iter().copied(), Laterality::Bilateral)
    }

    pub fn from_mask(mask: u8, laterality: Laterality) -> Result<Self> {
        if mask == 0 || mask >= 64 {
            return Err(Error::InvalidConfig(format!(
                "invalid measurement mask {mask}"
            )));
        }
        Ok(MeasurementCombination { mask, laterality })
    }

    pub fn mask(&self) -> u8 {
        self.mask
    }

    pub fn laterality(&self) -> Laterality {
        self.laterality
    }

    pub fn with_laterality(self, laterality: Laterality) -> Self {
        MeasurementCombination { laterality, ..self }
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, m: Measurement) -> bool {
        self.mask & (1 << m.index()) != 0
    }

    /// Selected measurements in canonical order.
    pub fn measurements(&self) -> Vec<Measurement> {
        Measurement::ALL
            .into_iter()
            .filter(|&m| self.contains(m))
            .collect()
    }

    /// Sites contributing features, in feature order.
    pub fn sites(&self) -> Vec<Site> {
        self.measurements()
            .into_iter()
            .flat_map(|m| {
                self.laterality
                    .sides()
                    .iter()
                    .map(move |&s| Site::new(m, s))
            })
            .collect()
    }

    pub fn feature_len(&self, order: usize) -> usize {
        self.sites().len() * (2 * order + 1)
    }

    /// Stable key used for seed derivation; the bilateral key equals the mask
    /// so the same cell is reproduced across studies.
    pub fn seed_key(&self) -> u64 {
        let offset = match self.laterality {
            Laterality::Bilateral => 0,
            Laterality::Unilateral(Side::Right) => 64,
            Laterality::Unilateral(Side::Left) => 128,
        };
        offset + self.mask as u64
    }

    /// Table label such as `Q3, Q1, P2`.
    pub fn label(&self) -> String {
        let names: Vec<&str> = DISPLAY_ORDER
            .iter()
            .filter(|&&m| self.contains(m))
            .map(|m| m.name())
            .collect();
        let base = names.join(", ");
        match self.laterality {
            Laterality::Bilateral => base,
            Laterality::Unilateral(s) => format!("{base} ({})", s.letter()),
        }
    }

    /// All 63 bilateral combinations grouped by size, each group in
    /// lexicographic order over [`DISPLAY_ORDER`].
    pub fn all_bilateral() -> Vec<MeasurementCombination> {
        let mut out = Vec::with_capacity(63);
        for k in 1..=6 {
            let mut idx: Vec<usize> = (0..k).collect();
            loop {
                let ms = idx.iter().map(|&i| DISPLAY_ORDER[i]);
                out.push(Self::new(ms, Laterality::Bilateral).expect("non-empty"));
                // Advance to the next k-subset of 0..6.
                let mut i = k;
                while i > 0 && idx[i - 1] == 6 - k + i - 1 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                idx[i - 1] += 1;
                for j in i..k {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        }
        out
    }
}

impl fmt::Display for MeasurementCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for MeasurementCombination {
    type Err = Error;

    /// Parses `q1+p1`, `Q3, Q2` or similar lists of measurement names.
    fn from_str(s: &str) -> Result<Self> {
        let ms = s
            .split(|c: char| c == '+' || c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Measurement>>>()?;
        Self::new(ms, Laterality::Bilateral)
    }
}

/// Concatenates the Fourier coefficients of every site in `combo`.
pub fn assemble_features(
    waveforms: &WaveformSet,
    combo: &MeasurementCombination,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(combo.feature_len(waveforms.order()));
    for site in combo.sites() {
        out.extend(waveforms.get(site)?.coefficients());
    }
    Ok(out)
}

/// Column names such as `Q1_R_b0`, aligned with [`assemble_features`].
pub fn feature_names(combo: &MeasurementCombination, order: usize) -> Vec<String> {
    let coeffs = FourierSeries::coefficient_names(order);
    combo
        .sites()
        .into_iter()
        .flat_map(|site| {
            coeffs
                .iter()
                .map(move |c| format!("{}_{}_{}", site.measurement, site.side.letter(), c))
        })
        .collect()
}

/// Writes a feature matrix as CSV with a header row, optionally prefixed by
/// id and label columns.
pub fn write_feature_csv<W: Write>(
    out: W,
    names: &[String],
    matrix: &Matrix,
    ids_and_labels: Option<(&[u64], &[u8])>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = Vec::new();
    if ids_and_labels.is_some() {
        header.extend(["id".to_string(), "label".to_string()]);
    }
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for (i, row) in matrix.iter_rows().enumerate() {
        let mut rec: Vec<String> = Vec::with_capacity(header.len());
        if let Some((ids, labels)) = ids_and_labels {
            rec.push(ids[i].to_string());
            rec.push(labels[i].to_string());
        }
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<feature csv>", e))?;
    Ok(())
}

/// Per-column mean and population standard deviation fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Columns whose spread was zero; their `std` is clamped to 1.
    pub degenerate: Vec<bool>,
}

impl StandardizationStats {
    pub fn fit(train: &Matrix) -> Result<Self> {
        let (n, d) = (train.rows(), train.cols());
        if n == 0 || d == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut mean = vec![0.0; d];
        for row in train.iter_rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; d];
        for row in train.iter_rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let mut std = Vec::with_capacity(d);
        let mut degenerate = Vec::with_capacity(d);
        for (j, (s, m)) in var.iter().zip(&mean).enumerate() {
            let sd = (s / n as f64).sqrt();
            if !(sd > 1e-12 * m.abs()) || !sd.is_finite() {
                warn!("feature column {j} has zero spread; leaving it unscaled");
                std.push(1.0);
                degenerate.push(true);
            } else {
                std.push(sd);
                degenerate.push(false);
            }
        }
        Ok(StandardizationStats {
            mean,
            std,
            degenerate,
        })
    }

    pub fn transform(&self, m: &Matrix) -> Result<Matrix> {
        self.check(m)?;
        let mut out = m.clone();
        for i in 0..out.rows() {
            for ((v, mu), sd) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.std) {
                *v = (*v - mu) / sd;
            }
        }
        Ok(out)
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, mu), sd)| (v - mu) / sd)
            .collect()
    }

    pub fn inverse_transform(&self, m: &Matrix) -> Result<Matrix> {
        self.check(m)?;
        let mut out = m.clone();
        for i in 0..out.rows() {
            for ((v, mu), sd) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.std) {
                *v = *v * sd + mu;
            }
        }
        Ok(out)
    }

    fn check(&self, m: &Matrix) -> Result<()> {
        if m.rows() == 0 {
            return Err(Error::EmptyMatrix);
        }
        if m.cols() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                got: m.cols(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng;
    use std::collections::BTreeMap;

    fn waveforms() -> WaveformSet {
        let series: BTreeMap<Site, FourierSeries> = Site::all()
            .enumerate()
            .map(|(i, s)| {
                let coeffs: Vec<f64> = (0..11).map(|k| (100 * i + k) as f64).collect();
                (s, FourierSeries::from_coefficients(1.0, &coeffs).unwrap())
            })
            .collect();
        WaveformSet::new(series).unwrap()
    }

    #[test]
    fn feature_lengths() {
        let w = waveforms();
        let q1 = MeasurementCombination::bilateral(&[Measurement::Q1]).unwrap();
        assert_eq!(assemble_features(&w, &q1).unwrap().len(), 22);
        let all = MeasurementCombination::bilateral(&Measurement::ALL).unwrap();
        assert_eq!(assemble_features(&w, &all).unwrap().len(), 132);
        let p3r =
            MeasurementCombination::new([Measurement::P3], Laterality::Unilateral(Side::Right))
                .unwrap();
        let f = assemble_features(&w, &p3r).unwrap();
        assert_eq!(f.len(), 11);
        // P3R is site index 10 in canonical order.
        assert_eq!(f[0], 1000.0);
    }

    #[test]
    fn canonical_order_ignores_input_order() {
        let w = waveforms();
        let a = MeasurementCombination::bilateral(&[Measurement::P1, Measurement::Q2]).unwrap();
        let b = MeasurementCombination::bilateral(&[Measurement::Q2, Measurement::P1]).unwrap();
        assert_eq!(
            assemble_features(&w, &a).unwrap(),
            assemble_features(&w, &b).unwrap()
        );
        let names = feature_names(&a, 5);
        assert_eq!(names[0], "Q2_R_b0");
        assert_eq!(names[1], "Q2_R_a1");
        assert_eq!(names[11], "Q2_L_b0");
        assert_eq!(names[22], "P1_R_b0");
        assert_eq!(names.len(), 44);
    }

    #[test]
    fn missing_site_is_reported() {
        let mut w = waveforms();
        w.series.remove(&Site::new(Measurement::Q3, Side::Left));
        let combo = MeasurementCombination::bilateral(&[Measurement::Q3]).unwrap();
        assert!(matches!(assemble_features(&w, &combo), Err(Error::MissingSite(s)) if s == "Q3L"));
    }

    #[test]
    fn sixty_three_combinations_in_table_order() {
        let all = MeasurementCombination::all_bilateral();
        assert_eq!(all.len(), 63);
        let labels: Vec<String> = all.iter().map(|c| c.label()).collect();
        assert_eq!(&labels[..7], ["Q3", "Q2", "Q1", "P3", "P2", "P1", "Q3, Q2"]);
        assert_eq!(labels[20], "P2, P1");
        assert_eq!(labels[21], "Q3, Q2, Q1");
        assert_eq!(labels[62], "Q3, Q2, Q1, P3, P2, P1");
        let masks: std::collections::BTreeSet<u8> = all.iter().map(|c| c.mask()).collect();
        assert_eq!(masks.len(), 63);
        let mut hist = [0; 6];
        for c in &all {
            hist[c.len() - 1] += 1;
        }
        assert_eq!(hist, [6, 15, 20, 15, 6, 1]);
    }

    #[test]
    fn parses_cli_combinations() {
        let c: MeasurementCombination = "q1+p1".parse().unwrap();
        assert_eq!(c.measurements(), vec![Measurement::Q1, Measurement::P1]);
        assert_eq!(c.label(), "Q1, P1");
        assert!("q7".parse::<MeasurementCombination>().is_err());
        assert!("".parse::<MeasurementCombination>().is_err());
    }

    #[test]
    fn standardizer_basics() {
        let m = Matrix::from_rows(&[vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]]).unwrap();
        let stats = StandardizationStats::fit(&m).unwrap();
        assert_eq!(stats.mean, vec![2.0, 5.0]);
        assert!((stats.std[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(stats.std[1], 1.0);
        assert_eq!(stats.degenerate, vec![false, true]);
        let z = stats.transform(&m).unwrap();
        let col0: f64 = (0..3).map(|i| z.get(i, 0)).sum();
        assert!(col0.abs() < 1e-15);
        assert!((0..3).all(|i| z.get(i, 1) == 0.0));
        assert!(matches!(
            StandardizationStats::fit(&Matrix::zeros(0, 3)),
            Err(Error::EmptyMatrix)
        ));
    }

    #[test]
    fn standardizer_moments_and_inverse() {
        let mut rng = seed::stream(5);
        let rows: Vec<Vec<f64>> = (0..100)
            .map(|_| {
                (0..5)
                    .map(|j| rng.gen::<f64>() * 10f64.powi(j) - 3.0)
                    .collect()
            })
            .collect();
        let m = Matrix::from_rows(&rows).unwrap();
        let stats = StandardizationStats::fit(&m).unwrap();
        let z = stats.transform(&m).unwrap();
        for j in 0..5 {
            let mean: f64 = (0..100).map(|i| z.get(i, j)).sum::<f64>() / 100.0;
            let var: f64 = (0..100).map(|i| (z.get(i, j) - mean).powi(2)).sum::<f64>() / 100.0;
            assert!(mean.abs() <= 1e-9);
            assert!((var - 1.0).abs() <= 1e-9);
        }
        let back = stats.inverse_transform(&z).unwrap();
        for (a, b) in back.as_slice().iter().zip(m.as_slice()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn csv_header_names_coefficients() {
        let combo = MeasurementCombination::bilateral(&[Measurement::Q1]).unwrap();
        let names = feature_names(&combo, 5);
        let m = Matrix::from_rows(&[vec![0.5; 22]]).unwrap();
        let mut buf = Vec::new();
        write_feature_csv(&mut buf, &names, &m, Some((&[7], &[1]))).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("id,label,Q1_R_b0,Q1_R_a1,"));
        assert!(text.lines().nth(1).unwrap().starts_with("7,1,0.5"));
    }
}
