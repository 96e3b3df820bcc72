//! Debias a dataset by removing rows: a genetic algorithm searches for the
//! subset mask that minimizes the sum of pairwise disparities.
//!
//! ```bash
//! cargo run --release --example remove_with_ga
//! ```

use fairmask::harness::{biased_dataset, BiasedDatasetSpec};
use fairmask::heuristics::{solve_genetic, solve_original};
use fairmask::objective::build_pool;
use fairmask::{MeasureKind, PoolMode, SolverConfig};

fn main() {
    let data = biased_dataset(&BiasedDatasetSpec {
        n: 2000,
        positive_rates: vec![0.7, 0.5, 0.4, 0.2],
        group_weights: vec![],
        feature_dim: 3,
        seed: 2024,
    });
    let spec = build_pool(PoolMode::Remove, MeasureKind::SdpSum, data, None).unwrap();

    let baseline = solve_original(&spec);
    println!("original dataset sdp_sum = {:.4}", baseline.best_score);

    let config = SolverConfig {
        pop_size: 100,
        generations: 500,
        mutation_rate: 0.05,
        seed: 7,
        ..Default::default()
    };
    let report = solve_genetic(&spec, &config).unwrap();
    println!(
        "GA kept {} of {} rows, sdp_sum = {:.4} ({:.1}% lower), {} evaluations in {:.2}s",
        report.best_mask.popcount(),
        spec.pool_size(),
        report.best_score,
        (1.0 - report.best_score / baseline.best_score) * 100.0,
        report.evaluations,
        report.wall_time
    );
    println!(
        "early stop: {} after {} generations",
        report.terminated_early,
        report.trace.len() - 1
    );

    // group sizes survive: the penalty policy forbids emptying any group
    let stats = spec.stats_of(&report.best_mask).unwrap();
    println!("group sizes after removal: {:?}", stats.counts);
}
