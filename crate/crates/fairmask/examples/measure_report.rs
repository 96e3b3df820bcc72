//! Measure the discrimination of a dataset: per-group positive rates and
//! the three statistical-parity disparity scores.
//!
//! ```bash
//! cargo run --example measure_report
//! ```

use fairmask::harness::{biased_dataset, BiasedDatasetSpec};
use fairmask::measures::{evaluate, positive_rates};
use fairmask::MeasureKind;

fn main() {
    // a 1000-row dataset with four groups of known positive rates
    let data = biased_dataset(&BiasedDatasetSpec {
        n: 1000,
        positive_rates: vec![0.7, 0.5, 0.4, 0.2],
        group_weights: vec![],
        feature_dim: 3,
        seed: 1,
    });
    let view = data.full_view();

    println!("n = {}, d = {}, k = {}", data.n(), data.d(), data.k());
    let rates = positive_rates(&view);
    for (g, name) in data.group_names().iter().enumerate() {
        println!(
            "  {name}: {} rows, positive rate {:.3}",
            rates.counts[g],
            rates.rates[g].unwrap()
        );
    }
    for kind in MeasureKind::ALL {
        println!("{} = {:.4}", kind, evaluate(kind, &view).unwrap());
    }
}
