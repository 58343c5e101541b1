//! Sample a disease of each kind and print its area profile along the chain.
//!
//! Run: `cargo run --example disease_profiles`

use haemoscreen::disease::{sample_disease, DiseaseKind};
use haemoscreen::seed;

fn main() -> haemoscreen::Result<()> {
    let mut rng = seed::stream(42);
    for kind in DiseaseKind::ALL {
        let spec = sample_disease(kind, &mut rng);
        println!(
            "{kind}: severity {:.3}, b {:.3}, r {:.3}, e {:.3}, side {:?}",
            spec.severity, spec.b, spec.r, spec.e, spec.side
        );
        let profile: Vec<String> = (0..=10)
            .map(|k| {
                spec.area_multiplier(k as f64 / 10.0)
                    .map(|a| format!("{a:.2}"))
            })
            .collect::<haemoscreen::Result<_>>()?;
        println!("  A(x) at x = 0, 0.1, .., 1: {}", profile.join(" "));
        println!(
            "  A at midpoint: {:.4}",
            spec.area_multiplier(spec.midpoint())?
        );
    }
    Ok(())
}
