//! Verify the GA against the exhaustive brute-force oracle on a pool small
//! enough to enumerate all 2^n masks.
//!
//! ```bash
//! cargo run --release --example exhaustive_oracle
//! ```

use fairmask::harness::{biased_dataset, brute_force, BiasedDatasetSpec};
use fairmask::heuristics::solve_genetic;
use fairmask::objective::build_pool;
use fairmask::{MeasureKind, PoolMode, SolverConfig};

fn main() {
    let mut hits = 0;
    let trials = 10u64;
    for seed in 0..trials {
        let data = biased_dataset(&BiasedDatasetSpec {
            n: 14,
            positive_rates: vec![0.9, 0.5, 0.2],
            group_weights: vec![],
            feature_dim: 2,
            seed,
        });
        let spec = build_pool(PoolMode::Remove, MeasureKind::SdpSum, data, None).unwrap();

        let oracle = brute_force(&spec).unwrap();
        let config = SolverConfig {
            pop_size: 100,
            generations: 500,
            seed,
            ..Default::default()
        };
        let ga = solve_genetic(&spec, &config).unwrap();

        let hit = (ga.best_score - oracle.score).abs() <= 1e-9;
        hits += hit as u32;
        println!(
            "seed {seed}: oracle {:.6} ({} masks scanned), GA {:.6} -> {}",
            oracle.score,
            oracle.evaluations,
            ga.best_score,
            if hit { "optimal" } else { "suboptimal" }
        );
    }
    println!("GA matched the exhaustive optimum in {hits}/{trials} runs");
}
