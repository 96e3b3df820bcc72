//! Plug in a custom discrimination measure: the objective treats measures
//! as black boxes over a dataset view, so any scoring function works
//! without touching the solvers.
//!
//! ```bash
//! cargo run --release --example custom_measure
//! ```

use fairmask::harness::{biased_dataset, BiasedDatasetSpec};
use fairmask::heuristics::{solve_genetic, solve_original};
use fairmask::measures::{positive_rates, MeasureRegistry};
use fairmask::objective::build_pool;
use fairmask::{PoolMode, SolverConfig};

fn main() {
    let mut registry = MeasureRegistry::new();
    // squared disparity to the global positive rate, averaged over groups
    registry.register("rate_variance", 1.0, |view| {
        let rates = positive_rates(view);
        let defined: Vec<f64> = rates.rates.iter().filter_map(|r| *r).collect();
        let mean = defined.iter().sum::<f64>() / defined.len() as f64;
        Ok(defined.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / defined.len() as f64)
    });
    let measure = registry.resolve("rate_variance").unwrap();

    let data = biased_dataset(&BiasedDatasetSpec {
        n: 400,
        positive_rates: vec![0.8, 0.5, 0.2],
        group_weights: vec![],
        feature_dim: 2,
        seed: 14,
    });
    let spec = build_pool(PoolMode::Remove, measure, data, None).unwrap();

    let baseline = solve_original(&spec);
    let config = SolverConfig {
        pop_size: 60,
        generations: 200,
        seed: 15,
        ..Default::default()
    };
    let report = solve_genetic(&spec, &config).unwrap();
    println!(
        "rate_variance: original {:.5} -> optimized {:.5} (kept {} of {} rows)",
        baseline.best_score,
        report.best_score,
        report.best_mask.popcount(),
        spec.pool_size()
    );
}
