//! Library side of the command-line tool. Each command reads and writes files
//! under one directory and returns what it produced.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::disease::DiseaseKind;
use crate::error::{Error, Result};
use crate::evaluation::report::write_count_summary_csv;
use crate::evaluation::studies::{write_ratio_csv, write_unilateral_csv};
use crate::evaluation::{
    low_severity_ratio_study, measurement_count_summary, q1_inclusion_histograms,
    run_combination_search, unilateral_study, EvaluationReport, MetricKind, PairedCohorts,
};
use crate::features::MeasurementCombination;
use crate::learners::grid::{grid_search_folds, GridRow};
use crate::learners::Method;
use crate::persistence::{
    cohort_file_name, cohort_waveforms, export_table, import_table, read_cohort, read_json,
    write_cohort, write_json, write_with, ImportDescriptor, PatientRecord, RunConfig,
};
use crate::population::{generate_population, Cohort};
use crate::sites::Measurement;

/// Files written by a command and whether any cell was flagged.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub flagged: bool,
    /// The command found up-to-date outputs and did nothing.
    pub skipped: bool,
}

impl Outcome {
    fn merge(&mut self, other: Outcome) {
        self.files.extend(other.files);
        self.flagged |= other.flagged;
        self.skipped &= other.skipped;
    }
}

fn diseases_or_configured(config: &RunConfig, diseases: &[DiseaseKind]) -> Vec<DiseaseKind> {
    if diseases.is_empty() {
        config.population.diseases.keys().copied().collect()
    } else {
        diseases.to_vec()
    }
}

/// Writes `VPD_H.jsonl` and one twin cohort per disease.
pub fn generate(config: &RunConfig, dir: &Path, diseases: &[DiseaseKind]) -> Result<Outcome> {
    config.validate()?;
    let mut outcome = Outcome::default();
    let mut cohorts = vec![(Cohort::Healthy, config.population.healthy)];
    for kind in diseases_or_configured(config, diseases) {
        let n = config
            .population
            .diseases
            .get(&kind)
            .copied()
            .ok_or_else(|| {
                Error::InvalidConfig(format!("no population size configured for {kind}"))
            })?;
        cohorts.push((Cohort::Diseased(kind), n));
    }
    for (cohort, n) in cohorts {
        let kind = match cohort {
            Cohort::Healthy => None,
            Cohort::Diseased(k) => Some(k),
        };
        log::info!("generating {n} subjects for {cohort}");
        let patients = generate_population(n, kind, &config.surrogate, config.seed)?;
        let records: Vec<PatientRecord> =
            patients.iter().map(PatientRecord::from_patient).collect();
        let path = dir.join(cohort_file_name(cohort));
        write_cohort(&path, &records)?;
        outcome.files.push(path);
    }
    Ok(outcome)
}

/// Loads the healthy cohort and the twin cohort of `disease` from `dir`.
pub fn load_cohorts(dir: &Path, disease: DiseaseKind) -> Result<PairedCohorts> {
    let healthy = read_cohort(&dir.join(cohort_file_name(Cohort::Healthy)))?;
    let diseased = read_cohort(&dir.join(cohort_file_name(Cohort::Diseased(disease))))?;
    Ok(PairedCohorts::new(
        disease,
        cohort_waveforms(&healthy, Cohort::Healthy)?,
        cohort_waveforms(&diseased, Cohort::Diseased(disease))?,
    ))
}

pub fn report_path(dir: &Path, disease: DiseaseKind) -> PathBuf {
    dir.join(format!("{}_report.json", disease.tag()))
}

fn manifest_path(dir: &Path, disease: DiseaseKind) -> PathBuf {
    dir.join(format!("{}_sweep_manifest.json", disease.tag()))
}

/// Records the inputs of a finished sweep so a rerun can be skipped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct SweepManifest {
    checksum: String,
    outputs: Vec<PathBuf>,
}

fn sweep_checksum(
    config: &RunConfig,
    dir: &Path,
    disease: DiseaseKind,
    methods: &[Method],
    combos: &[MeasurementCombination],
) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(&(
        config.seed,
        config.folds,
        config.hyperparams(methods),
        combos.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
    ))?);
    for cohort in [Cohort::Healthy, Cohort::Diseased(disease)] {
        let path = dir.join(cohort_file_name(cohort));
        h.update(std::fs::read(&path).map_err(|e| Error::io(&path, e))?);
    }
    Ok(format!("{:x}", h.finalize()))
}

/// Runs the combination search for each disease and writes the F1,
/// sensitivity and specificity tables, the per-fold table and the report.
/// A disease whose inputs match its manifest is skipped.
pub fn sweep(
    config: &RunConfig,
    dir: &Path,
    diseases: &[DiseaseKind],
    methods: &[Method],
    combos: &[MeasurementCombination],
) -> Result<Outcome> {
    config.validate()?;
    let mut outcome = Outcome {
        skipped: true,
        ..Outcome::default()
    };
    for disease in diseases_or_configured(config, diseases) {
        outcome.merge(sweep_one(config, dir, disease, methods, combos)?);
    }
    Ok(outcome)
}

fn sweep_one(
    config: &RunConfig,
    dir: &Path,
    disease: DiseaseKind,
    methods: &[Method],
    combos: &[MeasurementCombination],
) -> Result<Outcome> {
    let checksum = sweep_checksum(config, dir, disease, methods, combos)?;
    let manifest = manifest_path(dir, disease);
    if let Ok(previous) = read_json::<SweepManifest>(&manifest) {
        if previous.checksum == checksum && previous.outputs.iter().all(|p| p.exists()) {
            log::info!("{disease} sweep is up to date");
            let report: EvaluationReport = read_json(&report_path(dir, disease))?;
            return Ok(Outcome {
                files: previous.outputs,
                flagged: report.has_failures(),
                skipped: true,
            });
        }
    }
    let cohorts = load_cohorts(dir, disease)?;
    let plan = cohorts.split_plan(config.folds, config.seed)?;
    log::info!(
        "{disease}: {} methods x {} combinations x {} folds",
        methods.len(),
        combos.len(),
        plan.folds.len()
    );
    let report = run_combination_search(
        &cohorts,
        &plan,
        &config.hyperparams(methods),
        combos,
        config.seed,
    )?;
    let mut files = Vec::new();
    for kind in MetricKind::ALL {
        let path = dir.join(format!("{}_{}.csv", disease.tag(), kind.name()));
        write_with(&path, |buf| report.write_wide_csv(buf, kind))?;
        files.push(path);
    }
    let folds = dir.join(format!("{}_folds.csv", disease.tag()));
    write_with(&folds, |buf| report.write_folds_csv(buf))?;
    files.push(folds);
    let report_file = report_path(dir, disease);
    write_json(&report_file, &report)?;
    files.push(report_file);
    write_json(
        &manifest,
        &SweepManifest {
            checksum,
            outputs: files.clone(),
        },
    )?;
    Ok(Outcome {
        files,
        flagged: report.has_failures(),
        skipped: false,
    })
}

/// Grid search of one method on one disease, written as the full table plus
/// the best row.
pub fn gridsearch(
    config: &RunConfig,
    dir: &Path,
    disease: DiseaseKind,
    method: Method,
    combo: &MeasurementCombination,
) -> Result<(Outcome, GridRow)> {
    config.validate()?;
    let spec = config.grids.for_method(method)?;
    let cells = spec.cells(&config.learners.hyperparams(method))?;
    let cohorts = load_cohorts(dir, disease)?;
    let plan = cohorts.split_plan(config.folds, config.seed)?;
    log::info!("{disease}: {} grid of {} cells", method, cells.len());
    let result = grid_search_folds(&cells, &cohorts, &plan, combo, config.seed)?;
    let stem = format!("{}_grid_{}", disease.tag(), method.name());
    let table = dir.join(format!("{stem}.csv"));
    write_with(&table, |buf| result.write_csv(buf))?;
    let best_file = dir.join(format!("{stem}_best.json"));
    let best = result.best().clone();
    write_json(&best_file, &best)?;
    let flagged = result.rows.iter().any(|r| !r.mean_f1.is_finite());
    Ok((
        Outcome {
            files: vec![table, best_file],
            flagged,
            skipped: false,
        },
        best,
    ))
}

/// Measurement-count summary and Q1 histograms from a saved sweep report.
pub fn summarize(
    config: &RunConfig,
    dir: &Path,
    disease: DiseaseKind,
    methods: &[Method],
) -> Result<Outcome> {
    let report: EvaluationReport = read_json(&report_path(dir, disease))?;
    let rows = measurement_count_summary(&report)?;
    let counts = dir.join(format!("{}_count_summary.csv", disease.tag()));
    write_with(&counts, |buf| write_count_summary_csv(buf, &rows))?;
    let hist = q1_inclusion_histograms(&report, methods, config.histogram_bins)?;
    let hist_file = dir.join(format!("{}_q1_histograms.csv", disease.tag()));
    write_with(&hist_file, |buf| hist.write_csv(buf))?;
    Ok(Outcome {
        files: vec![counts, hist_file],
        flagged: false,
        skipped: false,
    })
}

/// Per-combination F1 ratio of the low-severity aneurysm sweep to the AAA sweep.
pub fn ratio_study(dir: &Path) -> Result<Outcome> {
    let reference: EvaluationReport = read_json(&report_path(dir, DiseaseKind::AAA))?;
    let low: EvaluationReport = read_json(&report_path(dir, DiseaseKind::AaaL))?;
    let rows = low_severity_ratio_study(&reference, &low)?;
    let path = dir.join(format!("ratio_{}.csv", DiseaseKind::AaaL.tag()));
    write_with(&path, |buf| write_ratio_csv(buf, &rows))?;
    Ok(Outcome {
        files: vec![path],
        flagged: rows.iter().any(|r| !r.ratio.is_finite()),
        skipped: false,
    })
}

/// Right-only, left-only and bilateral inputs for each measurement.
pub fn unilateral(
    config: &RunConfig,
    dir: &Path,
    disease: DiseaseKind,
    method: Method,
    measurements: &[Measurement],
) -> Result<Outcome> {
    config.validate()?;
    let cohorts = load_cohorts(dir, disease)?;
    let plan = cohorts.split_plan(config.folds, config.seed)?;
    let rows = unilateral_study(
        &cohorts,
        &plan,
        measurements,
        &config.learners.hyperparams(method),
        config.seed,
    )?;
    let path = dir.join(format!(
        "{}_unilateral_{}.csv",
        disease.tag(),
        method.name()
    ));
    write_with(&path, |buf| write_unilateral_csv(buf, &rows))?;
    Ok(Outcome {
        files: vec![path],
        flagged: false,
        skipped: false,
    })
}

/// Converts an external table into a JSONL cohort named after the
/// descriptor's cohort tag.
pub fn import_vpd(input: &Path, descriptor: &ImportDescriptor, dir: &Path) -> Result<Outcome> {
    let file = std::fs::File::open(input).map_err(|e| Error::io(input, e))?;
    let records = import_table(std::io::BufReader::new(file), descriptor)?;
    let path = dir.join(cohort_file_name(descriptor.cohort));
    write_cohort(&path, &records)?;
    Ok(Outcome {
        files: vec![path],
        flagged: false,
        skipped: false,
    })
}

/// Writes a cohort as a flat table with a matching import descriptor.
pub fn export_vpd(cohort_file: &Path, table: &Path, descriptor: &Path) -> Result<Outcome> {
    let records = read_cohort(cohort_file)?;
    let mut buf = Vec::new();
    let desc = export_table(&mut buf, &records)?;
    crate::persistence::write_atomic(table, &buf)?;
    write_json(descriptor, &desc)?;
    Ok(Outcome {
        files: vec![table.to_path_buf(), descriptor.to_path_buf()],
        flagged: false,
        skipped: false,
    })
}

/// Parses `--combos` values: `all` gives the 63 bilateral combinations,
/// anything else is one combination per value such as `q1+p1`.
pub fn parse_combos(values: &[String]) -> Result<Vec<MeasurementCombination>> {
    if values.is_empty() || values.iter().any(|v| v.trim().eq_ignore_ascii_case("all")) {
        return Ok(MeasurementCombination::all_bilateral());
    }
    let mut out: Vec<MeasurementCombination> = Vec::new();
    for v in values.iter().flat_map(|v| v.split(';')) {
        let c: MeasurementCombination = v.parse()?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}
