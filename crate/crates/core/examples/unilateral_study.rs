//! Right-only, left-only and bilateral Q1 and P3 inputs for aneurysm
//! detection.
//!
//! Run: `cargo run --release --example unilateral_study`

use haemoscreen::disease::DiseaseKind;
use haemoscreen::evaluation::studies::write_unilateral_csv;
use haemoscreen::evaluation::{unilateral_study, PairedCohorts};
use haemoscreen::learners::Method;
use haemoscreen::population::{generate_population, PopulationConfig};
use haemoscreen::sites::Measurement;

fn main() -> haemoscreen::Result<()> {
    let config = PopulationConfig::default();
    let healthy = generate_population(200, None, &config, 61)?;
    let sick = generate_population(200, Some(DiseaseKind::AAA), &config, 61)?;
    let cohorts = PairedCohorts::from_patients(&healthy, &sick)?;
    let plan = cohorts.split_plan(5, 61)?;
    let rows = unilateral_study(
        &cohorts,
        &plan,
        &[Measurement::Q1, Measurement::P3],
        &Method::GB.default_hyperparams(),
        61,
    )?;
    write_unilateral_csv(std::io::stdout(), &rows)
}
