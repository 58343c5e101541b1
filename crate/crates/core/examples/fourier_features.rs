//! Fit a truncated Fourier series to a sampled waveform, then build the
//! standardised feature matrix of a small cohort for one combination.
//!
//! Run: `cargo run --release --example fourier_features`

use std::f64::consts::PI;

use haemoscreen::features::{
    assemble_features, feature_names, MeasurementCombination, StandardizationStats,
};
use haemoscreen::fourier::fit_fourier;
use haemoscreen::linalg::Matrix;
use haemoscreen::population::{generate_population, PopulationConfig};

fn main() -> haemoscreen::Result<()> {
    let period = 0.8;
    let samples: Vec<f64> = (0..100)
        .map(|k| {
            let t = k as f64 * period / 100.0;
            90.0 + 20.0 * (2.0 * PI * t / period).sin() + 5.0 * (4.0 * PI * t / period).cos()
        })
        .collect();
    let series = fit_fourier(&samples, period, 5)?;
    println!("coefficients [b0, a1..a5, b1..b5]:");
    println!(
        "  {:?}",
        series
            .coefficients()
            .iter()
            .map(|c| format!("{c:.3}"))
            .collect::<Vec<_>>()
    );

    let combo: MeasurementCombination = "q1+p3".parse()?;
    let cohort = generate_population(20, None, &PopulationConfig::default(), 3)?;
    let mut data = Vec::new();
    for p in &cohort {
        data.extend(assemble_features(&p.waveforms, &combo)?);
    }
    let names = feature_names(&combo, 5);
    let x = Matrix::from_vec(cohort.len(), names.len(), data)?;
    let stats = StandardizationStats::fit(&x)?;
    let z = stats.transform(&x)?;
    println!(
        "{} -> {} features, first: {:?}",
        combo.label(),
        names.len(),
        &names[..3]
    );
    println!(
        "subject 0 standardised: {:?}",
        z.row(0)[..3]
            .iter()
            .map(|v| format!("{v:.3}"))
            .collect::<Vec<_>>()
    );
    Ok(())
}
