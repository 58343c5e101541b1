//! Simulate one healthy subject and its stenosed twin, then compare the
//! pressure and flow waveforms at every measurement site.
//!
//! Run: `cargo run --release --example waveforms`

use haemoscreen::disease::DiseaseKind;
use haemoscreen::population::{generate_population, PopulationConfig};
use haemoscreen::sites::Site;
use haemoscreen::surrogate::unit_of;

fn main() -> haemoscreen::Result<()> {
    let config = PopulationConfig::default();
    let healthy = generate_population(1, None, &config, 7)?.remove(0);
    let sick = generate_population(1, Some(DiseaseKind::CAS), &config, 7)?.remove(0);
    let spec = sick.disease.expect("diseased twin");
    println!(
        "period {:.3} s, CAS severity {:.2} on the {:?} side",
        healthy.waveforms.period, spec.severity, spec.side
    );
    println!(
        "{:<5} {:>10} {:>10} {:>10} {:>10}",
        "site", "mean H", "mean CAS", "peak H", "peak CAS"
    );
    for site in Site::all() {
        let h = healthy.waveforms.get(site)?;
        let d = sick.waveforms.get(site)?;
        let peak = |f: &haemoscreen::fourier::FourierSeries| {
            (0..200)
                .map(|k| f.evaluate(k as f64 * f.period / 200.0))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        println!(
            "{:<5} {:>10.2} {:>10.2} {:>10.2} {:>10.2}  {}",
            site.key(),
            h.cosine[0],
            d.cosine[0],
            peak(h),
            peak(d),
            unit_of(site.measurement)
        );
    }
    Ok(())
}
