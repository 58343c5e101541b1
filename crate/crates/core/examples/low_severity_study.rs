//! Compare F1 on regular aneurysms with F1 on low-severity aneurysms for
//! every combination.
//!
//! Run: `cargo run --release --example low_severity_study`

use haemoscreen::disease::DiseaseKind;
use haemoscreen::evaluation::studies::write_ratio_csv;
use haemoscreen::evaluation::{
    low_severity_ratio_study, run_combination_search, EvaluationReport, PairedCohorts,
};
use haemoscreen::features::MeasurementCombination;
use haemoscreen::learners::Method;
use haemoscreen::population::{generate_population, PopulationConfig, VirtualPatient};

fn search(
    healthy: &[VirtualPatient],
    kind: DiseaseKind,
    config: &PopulationConfig,
) -> haemoscreen::Result<EvaluationReport> {
    let sick = generate_population(healthy.len(), Some(kind), config, 51)?;
    let cohorts = PairedCohorts::from_patients(healthy, &sick)?;
    let plan = cohorts.split_plan(5, 51)?;
    let combos: Vec<MeasurementCombination> = ["q1", "p3", "q1+p3", "q1+q2+q3+p1+p2+p3"]
        .iter()
        .map(|s| s.parse())
        .collect::<haemoscreen::Result<_>>()?;
    run_combination_search(
        &cohorts,
        &plan,
        &[Method::GB.default_hyperparams()],
        &combos,
        51,
    )
}

fn main() -> haemoscreen::Result<()> {
    let config = PopulationConfig::default();
    let healthy = generate_population(200, None, &config, 51)?;
    let reference = search(&healthy, DiseaseKind::AAA, &config)?;
    let low = search(&healthy, DiseaseKind::AaaL, &config)?;
    write_ratio_csv(
        std::io::stdout(),
        &low_severity_ratio_study(&reference, &low)?,
    )
}
