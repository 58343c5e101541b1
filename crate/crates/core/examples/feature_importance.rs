//! Split-improvement importance of a gradient-boosting model, summed per
//! measurement.
//!
//! Run: `cargo run --release --example feature_importance`

use haemoscreen::disease::DiseaseKind;
use haemoscreen::evaluation::PairedCohorts;
use haemoscreen::features::{feature_names, MeasurementCombination};
use haemoscreen::learners::{self, aggregate_by_measurement, split_improvement_importance, Method};
use haemoscreen::population::{generate_population, PopulationConfig};
use haemoscreen::sites::Measurement;

fn main() -> haemoscreen::Result<()> {
    let config = PopulationConfig::default();
    let healthy = generate_population(300, None, &config, 31)?;
    let sick = generate_population(300, Some(DiseaseKind::SAS), &config, 31)?;
    let cohorts = PairedCohorts::from_patients(&healthy, &sick)?;
    let plan = cohorts.split_plan(5, 31)?;
    let all = MeasurementCombination::bilateral(&Measurement::ALL)?;
    let (train, _) = cohorts.fold_datasets(&plan.folds[0], &all)?;
    let model = learners::fit(&Method::GB.default_hyperparams(), &train, 31)?;
    let imp = split_improvement_importance(&model)?;

    let names = feature_names(&all, 5);
    println!("top features for SAS:");
    for &j in imp.ranking().iter().take(5) {
        println!("  {:<10} {:.4}", names[j], imp.weights[j]);
    }
    println!("per measurement:");
    for (m, w) in aggregate_by_measurement(&imp, &all, 5)? {
        println!("  {m}  {w:.4}");
    }
    Ok(())
}
