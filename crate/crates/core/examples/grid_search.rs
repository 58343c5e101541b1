//! Grid search of gradient-boosting trees and depth on a small cohort,
//! using the same five-fold protocol as the combination search.
//!
//! Run: `cargo run --release --example grid_search`

use haemoscreen::disease::DiseaseKind;
use haemoscreen::evaluation::PairedCohorts;
use haemoscreen::learners::grid::{grid_search_folds, GridSpec, Steps};
use haemoscreen::learners::Method;
use haemoscreen::population::{generate_population, PopulationConfig};

fn main() -> haemoscreen::Result<()> {
    let config = PopulationConfig::default();
    let healthy = generate_population(120, None, &config, 21)?;
    let sick = generate_population(120, Some(DiseaseKind::AAA), &config, 21)?;
    let cohorts = PairedCohorts::from_patients(&healthy, &sick)?;
    let plan = cohorts.split_plan(5, 21)?;
    // A coarse slice of the default 10..100 x 2..20 grid.
    let spec = GridSpec {
        first: Steps::new(10, 50, 20),
        second: Steps::new(2, 6, 2),
        ..GridSpec::default_for(Method::GB)?
    };
    let cells = spec.cells(&Method::GB.default_hyperparams())?;
    let result = grid_search_folds(&cells, &cohorts, &plan, &"q1".parse()?, 21)?;
    result.write_csv(std::io::stdout())?;
    let best = result.best();
    println!(
        "best: {} (F1 {:.4})",
        best.hyperparams.summary(),
        best.mean_f1
    );
    Ok(())
}
