//! Run a benchmark plan end to end: repeated trials over solvers, modes,
//! and measures, plus a small hyperparameter grid, with result tables
//! written to disk.
//!
//! ```bash
//! cargo run --release --example experiment_plan
//! ```

use fairmask::harness::{grid_search, run_plan, ExperimentPlan};

fn main() {
    let out_dir = std::env::temp_dir().join("fairmask_results");
    let plan_toml = format!(
        r#"
repeats = 5
seed_base = 42
output = {out_dir:?}
modes = ["remove", "merge"]
measures = ["sdp_sum", "sdp_max"]

[[datasets]]
name = "biased4"
[datasets.biased]
n = 800
positive_rates = [0.7, 0.5, 0.4, 0.2]
feature_dim = 3
seed = 7

[[solvers]]
kind = "original"

[[solvers]]
kind = "random"
budget = 3000

[[solvers]]
kind = "ga"
selection = "elitist"
pop = 50
gens = 120

[grid]
pop_sizes = [20, 50]
generations = [50, 100]
selection = "tournament"
"#,
        out_dir = out_dir.display().to_string()
    );
    let plan = ExperimentPlan::from_toml_str(&plan_toml).unwrap();

    let table = run_plan(&plan).unwrap();
    println!("{}", table.to_csv());

    if let Some(grid) = plan.grid.clone() {
        let grid_table = grid_search(&plan, &grid).unwrap();
        println!("{}", grid_table.to_csv());
    }
    println!(
        "raw records and tables written under {}",
        out_dir.display()
    );
}
