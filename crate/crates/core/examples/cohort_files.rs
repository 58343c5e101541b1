//! Generate cohorts into JSON Lines files, read them back, and round-trip a
//! cohort through the flat-table import used for external databases.
//!
//! Run: `cargo run --release --example cohort_files`

use haemoscreen::commands;
use haemoscreen::disease::DiseaseKind;
use haemoscreen::persistence::{
    cohort_file_name, export_table, import_table, read_cohort, RunConfig,
};
use haemoscreen::population::Cohort;

fn main() -> haemoscreen::Result<()> {
    let dir = std::env::temp_dir().join("haemoscreen-cohort-files");
    let mut config = RunConfig::with_seed(2024);
    config.population.healthy = 20;
    config.population.diseases = [(DiseaseKind::AaaL, 20)].into_iter().collect();
    let outcome = commands::generate(&config, &dir, &[])?;
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }

    let records = read_cohort(&dir.join(cohort_file_name(Cohort::Diseased(DiseaseKind::AaaL))))?;
    let first = &records[0];
    println!(
        "record {}: cohort {}, severity {:.3}, {} sites",
        first.id,
        first.cohort,
        first.disease.map_or(0.0, |d| d.severity),
        first.sites.len()
    );

    let mut table = Vec::new();
    let descriptor = export_table(&mut table, &records)?;
    let back = import_table(&table[..], &descriptor)?;
    println!(
        "flat table: {} bytes, round trip lossless: {}",
        table.len(),
        back == records
    );
    println!("descriptor: {}", serde_json::to_string(&descriptor)?);
    Ok(())
}
