//! Train all six classifiers on one fold of a small surrogate cohort and
//! report test sensitivity, specificity and F1.
//!
//! Run: `cargo run --release --example classifiers`

use haemoscreen::disease::DiseaseKind;
use haemoscreen::evaluation::{compute_metrics, ConfusionCounts, PairedCohorts};
use haemoscreen::features::MeasurementCombination;
use haemoscreen::learners::{self, Method};
use haemoscreen::population::{generate_population, PopulationConfig};

fn main() -> haemoscreen::Result<()> {
    let config = PopulationConfig::default();
    let healthy = generate_population(200, None, &config, 11)?;
    let sick = generate_population(200, Some(DiseaseKind::PAD), &config, 11)?;
    let cohorts = PairedCohorts::from_patients(&healthy, &sick)?;
    let plan = cohorts.split_plan(5, 11)?;
    let combo: MeasurementCombination = "q1+q2+p3".parse()?;
    let (train, test) = cohorts.fold_datasets(&plan.folds[0], &combo)?;
    println!(
        "PAD, {}: {} train / {} test rows",
        combo.label(),
        train.n_rows(),
        test.n_rows()
    );
    for method in Method::ALL {
        let model = learners::fit(&method.default_hyperparams(), &train, 11)?;
        let counts = ConfusionCounts::tally(test.y(), &model.predict_all(test.x())?)?;
        let m = compute_metrics(counts)?;
        println!(
            "{:<4} sens {:.4}  spec {:.4}  F1 {:.4}",
            method.name(),
            m.sensitivity,
            m.specificity,
            m.f1
        );
    }
    Ok(())
}
