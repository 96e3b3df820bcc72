//! Compare the GA's parent-selection operators against random search and
//! the untouched original data, averaged over seeded repeats.
//!
//! ```bash
//! cargo run --release --example selection_operators
//! ```

use fairmask::harness::{biased_dataset, mean, BiasedDatasetSpec};
use fairmask::heuristics::{solve_genetic, solve_original, solve_random, SelectionKind};
use fairmask::objective::build_pool;
use fairmask::{MeasureKind, PoolMode, SolverConfig, SolverKind};

fn main() {
    let data = biased_dataset(&BiasedDatasetSpec {
        n: 1500,
        positive_rates: vec![0.7, 0.5, 0.4, 0.2],
        group_weights: vec![],
        feature_dim: 3,
        seed: 99,
    });
    let spec = build_pool(PoolMode::Remove, MeasureKind::SdpSum, data, None).unwrap();
    let repeats = 5u64;

    println!("original: {:.4}", solve_original(&spec).best_score);

    for selection in [
        SelectionKind::Elitist,
        SelectionKind::Tournament,
        SelectionKind::RouletteWheel,
    ] {
        let scores: Vec<f64> = (0..repeats)
            .map(|seed| {
                let config = SolverConfig {
                    pop_size: 100,
                    generations: 300,
                    selection,
                    seed,
                    ..Default::default()
                };
                solve_genetic(&spec, &config).unwrap().best_score
            })
            .collect();
        println!("ga/{}: mean {:.4} over {repeats} seeds", selection.name(), mean(&scores));
    }

    let scores: Vec<f64> = (0..repeats)
        .map(|seed| {
            let config = SolverConfig {
                kind: SolverKind::Random,
                pop_size: 100,
                generations: 300,
                seed,
                ..Default::default()
            };
            solve_random(&spec, &config).unwrap().best_score
        })
        .collect();
    println!("random: mean {:.4} over {repeats} seeds", mean(&scores));
}
