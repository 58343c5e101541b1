//! Run configuration, cohort files and external table import.
//!
//! Cohorts are stored as JSON Lines, one [`PatientRecord`] per line, in files
//! named `VPD_<tag>.jsonl`. Every file is written to a temporary sibling and
//! renamed into place.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::disease::{DiseaseKind, DiseaseSide, DiseaseSpec};
use crate::error::{Error, Result};
use crate::fourier::FourierSeries;
use crate::learners::grid::GridSpec;
use crate::learners::{
    GbParams, Hyperparams, LrParams, Method, MlpParams, NbParams, RfParams, SvmParams,
};
use crate::population::{Cohort, PopulationConfig, VirtualPatient};
use crate::sites::Site;
use crate::surrogate::WaveformSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PopulationSizes {
    pub healthy: usize,
    /// Subjects per disease cohort; each is a twin of the healthy subject
    /// with the same id, so a count may not exceed `healthy`.
    pub diseases: BTreeMap<DiseaseKind, usize>,
}

impl Default for PopulationSizes {
    fn default() -> Self {
        PopulationSizes {
            healthy: 1000,
            diseases: DiseaseKind::ALL.into_iter().map(|k| (k, 1000)).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerConfig {
    pub nb: NbParams,
    pub lr: LrParams,
    pub svm: SvmParams,
    pub mlp: MlpParams,
    pub rf: RfParams,
    pub gb: GbParams,
}

impl LearnerConfig {
    pub fn hyperparams(&self, method: Method) -> Hyperparams {
        match method {
            Method::NB => Hyperparams::NB(self.nb.clone()),
            Method::LR => Hyperparams::LR(self.lr.clone()),
            Method::SVM => Hyperparams::SVM(self.svm.clone()),
            Method::MLP => Hyperparams::MLP(self.mlp.clone()),
            Method::RF => Hyperparams::RF(self.rf.clone()),
            Method::GB => Hyperparams::GB(self.gb.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub rf: GridSpec,
    pub gb: GridSpec,
    pub mlp: GridSpec,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            rf: GridSpec::default_for(Method::RF).expect("RF grid"),
            gb: GridSpec::default_for(Method::GB).expect("GB grid"),
            mlp: GridSpec::default_for(Method::MLP).expect("MLP grid"),
        }
    }
}

impl GridConfig {
    pub fn for_method(&self, method: Method) -> Result<&GridSpec> {
        match method {
            Method::RF => Ok(&self.rf),
            Method::GB => Ok(&self.gb),
            Method::MLP => Ok(&self.mlp),
            m => Err(Error::NoGridForMethod(m.name().into())),
        }
    }
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_folds() -> usize {
    crate::evaluation::DEFAULT_FOLDS
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_bins() -> usize {
    20
}

/// Everything a run needs. Only `seed` is mandatory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default)]
    pub population: PopulationSizes,
    #[serde(default)]
    pub surrogate: PopulationConfig,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub learners: LearnerConfig,
    #[serde(default)]
    pub grids: GridConfig,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn with_seed(seed: u64) -> Self {
        RunConfig {
            seed,
            population: PopulationSizes::default(),
            surrogate: PopulationConfig::default(),
            methods: default_methods(),
            learners: LearnerConfig::default(),
            grids: GridConfig::default(),
            folds: default_folds(),
            histogram_bins: default_bins(),
            output_dir: default_output(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.surrogate.validate()?;
        let p = &self.population;
        if p.healthy < 2 {
            return Err(Error::InvalidConfig(
                "healthy cohort needs at least 2 subjects".into(),
            ));
        }
        for (k, &n) in &p.diseases {
            if n < 2 || n > p.healthy {
                return Err(Error::InvalidConfig(format!(
                    "{k} cohort size {n} must lie in [2, {}]",
                    p.healthy
                )));
            }
        }
        if self.methods.is_empty() || self.folds == 0 || self.histogram_bins == 0 {
            return Err(Error::InvalidConfig(
                "methods, folds and histogram_bins must be non-empty".into(),
            ));
        }
        for m in Method::ALL {
            self.learners.hyperparams(m).validate()?;
        }
        Ok(())
    }

    pub fn hyperparams(&self, methods: &[Method]) -> Vec<Hyperparams> {
        methods
            .iter()
            .map(|&m| self.learners.hyperparams(m))
            .collect()
    }
}

/// One patient as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientRecord {
    pub id: u64,
    pub cohort: Cohort,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disease: Option<DiseaseSpec>,
    pub period: f64,
    /// Coefficients `[b0, a1..aN, b1..bN]` keyed by site (`Q1R`, ...).
    pub sites: BTreeMap<Site, Vec<f64>>,
}

impl PatientRecord {
    pub fn from_patient(p: &VirtualPatient) -> Self {
        PatientRecord {
            id: p.id,
            cohort: p.cohort,
            disease: p.disease,
            period: p.waveforms.period,
            sites: p
                .waveforms
                .series
                .iter()
                .map(|(s, f)| (*s, f.coefficients()))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.cohort, &self.disease) {
            (Cohort::Healthy, None) => {}
            (Cohort::Healthy, Some(_)) => {
                return Err(Error::InvalidRecord(format!(
                    "healthy record {} carries a disease",
                    self.id
                )))
            }
            (Cohort::Diseased(k), Some(spec)) if spec.kind == k => spec.validate()?,
            (Cohort::Diseased(k), _) => {
                return Err(Error::InvalidRecord(format!(
                    "record {} in cohort {k} lacks a matching disease",
                    self.id
                )))
            }
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::InvalidRecord(format!(
                "record {} has period {}",
                self.id, self.period
            )));
        }
        let mut len = None;
        for site in Site::all() {
            let c = self
                .sites
                .get(&site)
                .ok_or_else(|| Error::MissingSite(site.key()))?;
            if c.len() % 2 == 0 || *len.get_or_insert(c.len()) != c.len() {
                return Err(Error::InvalidRecord(format!(
                    "record {} site {site} has {} coefficients",
                    self.id,
                    c.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidRecord(format!(
                    "record {} site {site} is not finite",
                    self.id
                )));
            }
        }
        Ok(())
    }

    pub fn waveforms(&self) -> Result<WaveformSet> {
        let series = self
            .sites
            .iter()
            .map(|(s, c)| Ok((*s, FourierSeries::from_coefficients(self.period, c)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        WaveformSet::new(series)
    }
}

/// File name of a cohort, e.g. `VPD_AAA_L.jsonl`.
pub fn cohort_file_name(cohort: Cohort) -> String {
    format!("VPD_{}.jsonl", cohort.tag())
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Renders with a writer-based serialiser and stores the result atomically.
pub fn write_with<F>(path: &Path, render: F) -> Result<()>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    let mut buf = Vec::new();
    render(&mut buf)?;
    write_atomic(path, &buf)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_cohort(path: &Path, records: &[PatientRecord]) -> Result<()> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r)?;
        buf.push(b'\n');
    }
    write_atomic(path, &buf)
}

/// Reads and validates a JSONL cohort; errors name the offending line.
pub fn read_cohort(path: &Path) -> Result<Vec<PatientRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PatientRecord = serde_json::from_str(&line)
            .map_err(|e| Error::InvalidRecord(format!("{}:{}: {e}", path.display(), i + 1)))?;
        rec.validate()
            .map_err(|e| Error::InvalidRecord(format!("{}:{}: {e}", path.display(), i + 1)))?;
        if !ids.insert(rec.id) {
            return Err(Error::InvalidRecord(format!(
                "{}:{}: duplicate id {}",
                path.display(),
                i + 1,
                rec.id
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Waveforms keyed by id, checking that every record belongs to `cohort`.
pub fn cohort_waveforms(
    records: &[PatientRecord],
    cohort: Cohort,
) -> Result<BTreeMap<u64, WaveformSet>> {
    records
        .iter()
        .map(|r| {
            if r.cohort != cohort {
                return Err(Error::InvalidRecord(format!(
                    "record {} is {} but the file holds {cohort}",
                    r.id, r.cohort
                )));
            }
            Ok((r.id, r.waveforms()?))
        })
        .collect()
}

/// Column indices of the disease parameters in an imported table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiseaseColumns {
    pub severity: usize,
    pub b: usize,
    pub e: usize,
    pub r: usize,
    /// Holds `Left`, `Right` or `NotApplicable`.
    pub side: usize,
}

/// Mapping from a delimited table to patient records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportDescriptor {
    pub cohort: Cohort,
    #[serde(default = "yes")]
    pub has_header: bool,
    #[serde(default = "comma")]
    pub delimiter: char,
    /// Column of the subject id; row order is used when absent.
    #[serde(default)]
    pub id_column: Option<usize>,
    pub period_column: usize,
    /// Per site, the columns of `[b0, a1..aN, b1..bN]`.
    pub sites: BTreeMap<String, Vec<usize>>,
    #[serde(default)]
    pub disease: Option<DiseaseColumns>,
}

fn yes() -> bool {
    true
}

fn comma() -> char {
    ','
}

impl ImportDescriptor {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    /// Site-to-column map, requiring all twelve sites.
    fn site_columns(&self) -> Result<BTreeMap<Site, Vec<usize>>> {
        let mut map = BTreeMap::new();
        for (name, cols) in &self.sites {
            map.insert(name.parse::<Site>()?, cols.clone());
        }
        for site in Site::all() {
            if !map.contains_key(&site) {
                return Err(Error::MissingSite(site.key()));
            }
        }
        let len = map.values().next().map_or(0, Vec::len);
        if len % 2 == 0 || map.values().any(|c| c.len() != len) {
            return Err(Error::InvalidConfig(
                "every site must map the same odd number of coefficient columns".into(),
            ));
        }
        if matches!(self.cohort, Cohort::Diseased(_)) != self.disease.is_some() {
            return Err(Error::InvalidConfig(
                "disease columns are required for, and only for, diseased cohorts".into(),
            ));
        }
        Ok(map)
    }
}

fn parse_side(s: &str) -> Option<DiseaseSide> {
    match s.trim().to_ascii_lowercase().as_str() {
        "left" | "l" => Some(DiseaseSide::Left),
        "right" | "r" => Some(DiseaseSide::Right),
        "notapplicable" | "na" | "" => Some(DiseaseSide::NotApplicable),
        _ => None,
    }
}

/// Converts a delimited table into validated records. Every bad row is
/// reported with its 0-based data-row index.
pub fn import_table<R: Read>(
    input: R,
    descriptor: &ImportDescriptor,
) -> Result<Vec<PatientRecord>> {
    let sites = descriptor.site_columns()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(descriptor.has_header)
        .delimiter(descriptor.delimiter as u8)
        .flexible(true)
        .from_reader(input);
    let mut records = Vec::new();
    let mut errors = Vec::new();
    let mut ids = BTreeSet::new();
    for (row, rec) in reader.records().enumerate() {
        let result = rec.map_err(Error::from).and_then(|rec| {
            let field = |c: usize| {
                rec.get(c)
                    .ok_or_else(|| Error::InvalidRecord(format!("missing column {c}")))
            };
            let num = |c: usize| -> Result<f64> {
                let f = field(c)?;
                let v: f64 = f.trim().parse().map_err(|_| {
                    Error::InvalidRecord(format!("column {c}: '{f}' is not a number"))
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::InvalidRecord(format!("column {c} is not finite")))
                }
            };
            let id = match descriptor.id_column {
                Some(c) => field(c)?
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidRecord(format!("column {c}: bad id")))?,
                None => row as u64,
            };
            let disease = match (&descriptor.disease, descriptor.cohort) {
                (Some(d), Cohort::Diseased(kind)) => {
                    let side = parse_side(field(d.side)?).ok_or_else(|| {
                        Error::InvalidRecord(format!("column {}: bad side", d.side))
                    })?;
                    Some(DiseaseSpec::new(
                        kind,
                        num(d.severity)?,
                        num(d.b)?,
                        num(d.e)?,
                        num(d.r)?,
                        side,
                    )?)
                }
                _ => None,
            };
            let coeffs = sites
                .iter()
                .map(|(s, cols)| {
                    Ok((
                        *s,
                        cols.iter().map(|&c| num(c)).collect::<Result<Vec<_>>>()?,
                    ))
                })
                .collect::<Result<BTreeMap<_, _>>>()?;
            let rec = PatientRecord {
                id,
                cohort: descriptor.cohort,
                disease,
                period: num(descriptor.period_column)?,
                sites: coeffs,
            };
            rec.validate()?;
            if !ids.insert(id) {
                return Err(Error::InvalidRecord(format!("duplicate id {id}")));
            }
            Ok(rec)
        });
        match result {
            Ok(r) => records.push(r),
            Err(e) => errors.push(format!("row {row}: {e}")),
        }
    }
    if !errors.is_empty() {
        return Err(Error::ImportRows(errors));
    }
    Ok(records)
}

/// Writes records as a flat table and returns the descriptor that reads it back.
pub fn export_table<W: Write>(out: W, records: &[PatientRecord]) -> Result<ImportDescriptor> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidRecord("nothing to export".into()))?;
    let cohort = first.cohort;
    let n_coeffs = first.sites.values().next().map_or(0, Vec::len);
    let order = (n_coeffs - 1) / 2;
    let names = FourierSeries::coefficient_names(order);
    let diseased = matches!(cohort, Cohort::Diseased(_));

    let mut header = vec!["id".to_string(), "period".to_string()];
    if diseased {
        header.extend(["severity", "b", "e", "r", "side"].map(String::from));
    }
    let mut sites = BTreeMap::new();
    for site in Site::all() {
        let start = header.len();
        header.extend(names.iter().map(|n| format!("{}_{}", site.key(), n)));
        sites.insert(site.key(), (start..start + n_coeffs).collect());
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header)?;
    for r in records {
        if r.cohort != cohort {
            return Err(Error::InvalidRecord("records span several cohorts".into()));
        }
        let mut row = vec![r.id.to_string(), format!("{:?}", r.period)];
        if let Some(d) = &r.disease {
            row.extend([d.severity, d.b, d.e, d.r].map(|v| format!("{v:?}")));
            row.push(format!("{:?}", d.side));
        }
        for site in Site::all() {
            let c = r
                .sites
                .get(&site)
                .ok_or_else(|| Error::MissingSite(site.key()))?;
            row.extend(c.iter().map(|v| format!("{v:?}")));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<export>", e))?;
    Ok(ImportDescriptor {
        cohort,
        has_header: true,
        delimiter: ',',
        id_column: Some(0),
        period_column: 1,
        sites,
        disease: diseased.then_some(DiseaseColumns {
            severity: 2,
            b: 3,
            e: 4,
            r: 5,
            side: 6,
        }),
    })
}
