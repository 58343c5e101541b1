//! Evaluate all 63 bilateral measurement combinations with naive Bayes and
//! gradient boosting, then summarise by measurement count and by Q1 use.
//!
//! Run: `cargo run --release --example combination_search`

use haemoscreen::disease::DiseaseKind;
use haemoscreen::evaluation::report::write_count_summary_csv;
use haemoscreen::evaluation::{
    measurement_count_summary, q1_inclusion_histograms, run_combination_search, MetricKind,
    PairedCohorts,
};
use haemoscreen::features::MeasurementCombination;
use haemoscreen::learners::Method;
use haemoscreen::population::{generate_population, PopulationConfig};

fn main() -> haemoscreen::Result<()> {
    let config = PopulationConfig::default();
    let healthy = generate_population(100, None, &config, 41)?;
    let sick = generate_population(100, Some(DiseaseKind::CAS), &config, 41)?;
    let cohorts = PairedCohorts::from_patients(&healthy, &sick)?;
    let plan = cohorts.split_plan(5, 41)?;
    let methods = [
        Method::NB.default_hyperparams(),
        Method::GB.default_hyperparams(),
    ];
    let report = run_combination_search(
        &cohorts,
        &plan,
        &methods,
        &MeasurementCombination::all_bilateral(),
        41,
    )?;

    println!("F1 table (first rows):");
    let mut buf = Vec::new();
    report.write_wide_csv(&mut buf, MetricKind::F1)?;
    for line in String::from_utf8_lossy(&buf).lines().take(8) {
        println!("  {line}");
    }
    println!("by number of measurements:");
    write_count_summary_csv(std::io::stdout(), &measurement_count_summary(&report)?)?;
    let hist = q1_inclusion_histograms(&report, &[Method::NB, Method::GB], 10)?;
    println!(
        "mean F1 with Q1 {:.4} ({} cells), without {:.4} ({} cells)",
        hist.include.mean(),
        hist.include.total(),
        hist.exclude.mean(),
        hist.exclude.total()
    );
    Ok(())
}
