//! Fit a gradient-boosting model, save it as JSON and reload it.
//!
//! Run: `cargo run --release --example model_persistence`

use haemoscreen::learners::{self, Dataset, GbParams, Hyperparams, Label, TrainedModel};

fn main() -> haemoscreen::Result<()> {
    let rows: Vec<Vec<f64>> = (0..40)
        .map(|i| vec![(i % 8) as f64 - 3.5, (i / 8) as f64 - 2.0])
        .collect();
    let y = rows
        .iter()
        .map(|r| Label::from_diseased(r[0] * r[1] > 0.0))
        .collect();
    let data = Dataset::from_rows(&rows, y)?;
    let h = Hyperparams::GB(GbParams {
        n_trees: 30,
        ..GbParams::default()
    });
    let model = learners::fit(&h, &data, 5)?;
    let json = model.to_json()?;
    let back = TrainedModel::from_json(&json)?;
    println!("{} bytes of JSON, {} features", json.len(), back.n_features);
    for x in [[-2.0, -1.0], [2.0, -1.0], [2.0, 1.5]] {
        println!(
            "x = {x:?}: score {:.4} (reloaded {:.4})",
            model.predict_score(&x)?,
            back.predict_score(&x)?
        );
    }
    Ok(())
}
