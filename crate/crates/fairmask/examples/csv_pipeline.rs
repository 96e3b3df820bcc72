//! The full CSV-to-CSV pipeline as a library consumer would drive it: load
//! a raw file with column roles, one-hot encoding and missing-row removal,
//! optimize, and write the debiased CSV back out.
//!
//! ```bash
//! cargo run --release --example csv_pipeline
//! ```

use std::sync::Arc;

use fairmask::dataset::{load_csv, write_csv, EncodeOptions};
use fairmask::heuristics::solve_genetic;
use fairmask::measures::evaluate;
use fairmask::objective::build_pool;
use fairmask::{ColumnRoles, MeasureKind, PoolMode, SolverConfig};

fn main() {
    // a small raw file with a categorical feature, a missing cell, and a
    // non-numeric label
    let raw = "\
age,contract,city,approved
34,permanent,north,yes
28,temp,south,no
45,permanent,north,yes
39,temp,,no
51,freelance,south,yes
23,temp,north,no
36,permanent,south,yes
41,freelance,north,no
29,temp,south,yes
48,permanent,north,no
33,freelance,south,yes
27,temp,north,no
";
    let input = std::env::temp_dir().join("fairmask_pipeline_in.csv");
    std::fs::write(&input, raw).unwrap();

    let roles = ColumnRoles::new(
        "approved",
        "city",
        vec!["age".into(), "contract".into()],
        Some("yes".into()),
    )
    .unwrap();
    let data = Arc::new(load_csv(&input, &roles, &EncodeOptions::default()).unwrap());
    println!(
        "loaded {} rows ({} dropped for missing cells), d = {} after one-hot, groups: {:?}",
        data.n(),
        12 - data.n(),
        data.d(),
        data.group_names()
    );

    let spec = build_pool(
        PoolMode::Remove,
        MeasureKind::SdpMax,
        Arc::clone(&data),
        None,
    )
    .unwrap();
    let before = evaluate(MeasureKind::SdpMax, &data.full_view()).unwrap();
    let report = solve_genetic(
        &spec,
        &SolverConfig {
            pop_size: 40,
            generations: 150,
            seed: 2,
            ..Default::default()
        },
    )
    .unwrap();
    println!("sdp_max: {before:.4} -> {:.4}", report.best_score);

    let output = std::env::temp_dir().join("fairmask_pipeline_fair.csv");
    let view = spec.materialize(&report.best_mask).unwrap();
    write_csv(&view, &output).unwrap();
    println!("wrote {} ({} rows)", output.display(), view.len());
}
