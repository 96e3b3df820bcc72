//! Keep every original row and only add synthetic ones: the selection mask
//! ranges over the synthetic pool while the real data stays fixed, useful
//! when nothing may be deleted (e.g. fine-tuning data).
//!
//! ```bash
//! cargo run --release --example add_synthetic_only
//! ```

use std::sync::Arc;

use fairmask::harness::{biased_dataset, BiasedDatasetSpec};
use fairmask::heuristics::{solve_genetic, solve_original};
use fairmask::objective::build_pool;
use fairmask::synth;
use fairmask::{MeasureKind, PoolMode, SolverConfig};

fn main() {
    let real = biased_dataset(&BiasedDatasetSpec {
        n: 500,
        positive_rates: vec![0.7, 0.5, 0.2],
        group_weights: vec![],
        feature_dim: 2,
        seed: 21,
    });
    let model = synth::fit(&real).unwrap();
    let synthetic = Arc::new(synth::sample(&model, real.n(), 22));

    let spec = build_pool(
        PoolMode::Add,
        MeasureKind::SdpSum,
        Arc::clone(&real),
        Some(synthetic),
    )
    .unwrap();

    // all-ones baseline: original data plus every synthetic row
    let everything = solve_original(&spec);
    println!(
        "adding all synthetic rows: sdp_sum = {:.4}",
        everything.best_score
    );

    let config = SolverConfig {
        pop_size: 100,
        generations: 300,
        seed: 23,
        ..Default::default()
    };
    let report = solve_genetic(&spec, &config).unwrap();
    let view = spec.materialize(&report.best_mask).unwrap();
    println!(
        "selective addition: {} of {} synthetic rows, output {} rows (>= {} original), sdp_sum = {:.4}",
        report.best_mask.popcount(),
        spec.pool_size(),
        view.len(),
        real.n(),
        report.best_score
    );
}
