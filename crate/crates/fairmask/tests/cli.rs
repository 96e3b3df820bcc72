//! End-to-end tests of the `fairmask` binary and the file contracts it
//! shares with the library.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use fairmask::dataset::{self, load_csv, ColumnRoles, EncodeOptions, WriteOptions};
use fairmask::harness::{biased_dataset, BiasedDatasetSpec, ExperimentPlan, SolverSpec};
use fairmask::measures::evaluate;
use fairmask::objective::{build_pool, Mask};
use fairmask::{MeasureKind, PoolMode};

fn fairmask_bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairmask"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

fn write_file(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn biased_csv(dir: &Path, name: &str, n: usize, rates: &[f64], seed: u64) -> PathBuf {
    let ds = biased_dataset(&BiasedDatasetSpec {
        n,
        positive_rates: rates.to_vec(),
        group_weights: vec![],
        feature_dim: 2,
        seed,
    });
    let path = dir.join(name);
    dataset::write_csv(&ds.full_view(), &path).unwrap();
    path
}

#[test]
fn measure_matches_library_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let input = biased_csv(dir.path(), "in.csv", 120, &[0.8, 0.4, 0.3], 5);
    let output = fairmask_bin(&[
        "measure",
        "--input",
        input.to_str().unwrap(),
        "--label",
        "y",
        "--protected",
        "z",
    ]);
    let json = stdout_json(&output);
    assert_eq!(json["n"], 120);
    assert_eq!(json["k"], 3);

    let roles = ColumnRoles::new("y", "z", vec!["f1".into(), "f2".into()], None).unwrap();
    let ds = Arc::new(load_csv(&input, &roles, &EncodeOptions::default()).unwrap());
    let view = ds.full_view();
    for kind in MeasureKind::ALL {
        let direct = evaluate(kind, &view).unwrap();
        let reported = json["scores"][kind.name()].as_f64().unwrap();
        assert!((direct - reported).abs() < 1e-12);
    }
}

#[test]
fn measure_reports_trivial_score_shapes() {
    let dir = tempfile::tempdir().unwrap();
    // parity: both groups all-positive
    let parity = write_file(
        dir.path(),
        "parity.csv",
        "x,z,y\n1,a,1\n2,a,1\n3,b,1\n4,b,1\n",
    );
    let json = stdout_json(&fairmask_bin(&[
        "measure",
        "--input",
        parity.to_str().unwrap(),
        "--label",
        "y",
        "--protected",
        "z",
    ]));
    for kind in MeasureKind::ALL {
        assert_eq!(json["scores"][kind.name()], 0.0);
    }

    // extreme: rates (1.0, 0.0)
    let extreme = write_file(
        dir.path(),
        "extreme.csv",
        "x,z,y\n1,a,1\n2,a,1\n3,b,0\n4,b,0\n",
    );
    let json = stdout_json(&fairmask_bin(&[
        "measure",
        "--input",
        extreme.to_str().unwrap(),
        "--label",
        "y",
        "--protected",
        "z",
    ]));
    assert_eq!(json["scores"]["sdp_sum"], 1.0);
    assert_eq!(json["scores"]["sdp_max"], 1.0);
}

#[test]
fn measure_load_failure_exits_2() {
    let output = fairmask_bin(&[
        "measure",
        "--input",
        "/nonexistent/nope.csv",
        "--label",
        "y",
        "--protected",
        "z",
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&output.stderr).is_empty());
}

#[test]
fn generate_defaults_rows_determinism_and_schema() {
    let dir = tempfile::tempdir().unwrap();
    let input = biased_csv(dir.path(), "in.csv", 80, &[0.7, 0.3], 9);
    let out_a = dir.path().join("synth_a.csv");
    let out_b = dir.path().join("synth_b.csv");
    for out in [&out_a, &out_b] {
        let json = stdout_json(&fairmask_bin(&[
            "generate",
            "--input",
            input.to_str().unwrap(),
            "--label",
            "y",
            "--protected",
            "z",
            "--seed",
            "11",
            "--output",
            out.to_str().unwrap(),
        ]));
        // default row count equals the input size
        assert_eq!(json["rows"], 80);
        assert!(json["fidelity_ks"].is_object());
    }
    // same seed, same bytes
    assert_eq!(
        std::fs::read(&out_a).unwrap(),
        std::fs::read(&out_b).unwrap()
    );

    // output loads back schema-compatible with the input
    let roles = ColumnRoles::new("y", "z", vec!["f1".into(), "f2".into()], None).unwrap();
    let real = Arc::new(load_csv(&input, &roles, &EncodeOptions::default()).unwrap());
    let synth = Arc::new(load_csv(&out_a, &roles, &EncodeOptions::default()).unwrap());
    let spec = build_pool(PoolMode::Merge, MeasureKind::SdpSum, real, Some(synth)).unwrap();
    assert_eq!(spec.pool_size(), 160);
}

#[test]
fn generate_external_passthrough_is_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let input = biased_csv(dir.path(), "in.csv", 40, &[0.7, 0.3], 3);
    let external = biased_csv(dir.path(), "ext.csv", 30, &[0.6, 0.4], 4);
    let out = dir.path().join("validated.csv");
    let json = stdout_json(&fairmask_bin(&[
        "generate",
        "--input",
        input.to_str().unwrap(),
        "--label",
        "y",
        "--protected",
        "z",
        "--external",
        external.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]));
    assert_eq!(json["source"], "external");
    assert_eq!(
        std::fs::read(&external).unwrap(),
        std::fs::read(&out).unwrap(),
        "pass-through must not rewrite the file"
    );
}

#[test]
fn optimize_original_remove_reproduces_the_cleaned_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = biased_csv(dir.path(), "in.csv", 60, &[0.8, 0.2], 7);
    let out = dir.path().join("fair.csv");
    let json = stdout_json(&fairmask_bin(&[
        "optimize",
        "--input",
        input.to_str().unwrap(),
        "--label",
        "y",
        "--protected",
        "z",
        "--mode",
        "remove",
        "--solver",
        "original",
        "--output",
        out.to_str().unwrap(),
    ]));
    assert_eq!(json["popcount"], 60);
    let roles = ColumnRoles::new("y", "z", vec!["f1".into(), "f2".into()], None).unwrap();
    let original = load_csv(&input, &roles, &EncodeOptions::default()).unwrap();
    let emitted = load_csv(&out, &roles, &EncodeOptions::default()).unwrap();
    assert_eq!(original, emitted);
}

#[test]
fn optimize_privacy_output_shares_no_row_with_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_file(
        dir.path(),
        "in.csv",
        "x,z,y\n1,a,1\n2,a,0\n3,b,1\n4,b,0\n",
    );
    // two exact duplicates of input rows plus two fresh rows
    let synthetic = write_file(
        dir.path(),
        "synth.csv",
        "x,z,y\n1,a,1\n3,b,1\n9,a,0\n8,b,1\n",
    );
    let out = dir.path().join("fair.csv");
    let json = stdout_json(&fairmask_bin(&[
        "optimize",
        "--input",
        input.to_str().unwrap(),
        "--label",
        "y",
        "--protected",
        "z",
        "--mode",
        "privacy",
        "--solver",
        "original",
        "--synthetic",
        synthetic.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]));
    assert_eq!(json["pool_size"], 2, "duplicates must leave the pool");
    let roles = ColumnRoles::new("y", "z", vec!["x".into()], None).unwrap();
    let original = load_csv(&input, &roles, &EncodeOptions::default()).unwrap();
    let emitted = load_csv(&out, &roles, &EncodeOptions::default()).unwrap();
    for i in 0..emitted.n() {
        for j in 0..original.n() {
            let same = emitted.row(i) == original.row(j)
                && emitted.label(i) == original.label(j)
                && emitted.group_name(emitted.group(i)) == original.group_name(original.group(j));
            assert!(!same, "output row {i} leaks input row {j}");
        }
    }
}

#[test]
fn optimize_report_is_reproducible_and_audit_complete() {
    let dir = tempfile::tempdir().unwrap();
    let input = biased_csv(dir.path(), "in.csv", 90, &[0.8, 0.5, 0.2], 13);
    let out = dir.path().join("fair.csv");
    let report_path = dir.path().join("report.json");
    let run = |seed: &str, out: &Path, report: &Path| {
        stdout_json(&fairmask_bin(&[
            "optimize",
            "--input",
            input.to_str().unwrap(),
            "--label",
            "y",
            "--protected",
            "z",
            "--mode",
            "remove",
            "--solver",
            "ga",
            "--selection",
            "elitist",
            "--pop",
            "20",
            "--gens",
            "30",
            "--mutation",
            "0.05",
            "--seed",
            seed,
            "--output",
            out.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ]))
    };
    let json = run("42", &out, &report_path);

    // before/after for all three measures, regardless of the optimized one
    for kind in MeasureKind::ALL {
        assert!(json["before"][kind.name()].is_number());
        assert!(json["after"][kind.name()].is_number());
    }
    assert_eq!(json["seed"], 42);
    assert_eq!(json["config"]["pop"], 20);
    assert!(json["popcount"].as_u64().unwrap() <= 90);
    assert!(json["evaluations"].as_u64().unwrap() > 0);
    // the report file carries the same JSON that was printed
    let on_disk: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(on_disk, json);
    // GA with all-ones seeding never worsens the optimized measure
    let before = json["before"]["sdp_sum"].as_f64().unwrap();
    let after = json["after"]["sdp_sum"].as_f64().unwrap();
    assert!(after <= before);

    // identical seed reproduces the same outcome
    let out2 = dir.path().join("fair2.csv");
    let report2 = dir.path().join("report2.json");
    let json2 = run("42", &out2, &report2);
    assert_eq!(json["best_score"], json2["best_score"]);
    assert_eq!(json["popcount"], json2["popcount"]);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&out2).unwrap());
}

#[test]
fn optimize_config_file_keys_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let input = biased_csv(dir.path(), "in.csv", 50, &[0.9, 0.3], 21);
    let out = dir.path().join("fair.csv");
    let config = write_file(
        dir.path(),
        "run.toml",
        &format!(
            "input = {:?}\nlabel = \"y\"\nprotected = \"z\"\nmode = \"remove\"\nsolver = \"original\"\noutput = {:?}\nseed = 7\n",
            input.to_str().unwrap(),
            dir.path().join("ignored.csv").to_str().unwrap()
        ),
    );
    let json = stdout_json(&fairmask_bin(&[
        "optimize",
        "--config",
        config.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]));
    assert_eq!(json["seed"], 7, "file key survives");
    assert_eq!(
        json["output"],
        out.to_str().unwrap(),
        "flag overrides the file's output"
    );
    assert!(out.exists());
}

#[test]
fn optimize_missing_synthetic_exits_2_and_unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = biased_csv(dir.path(), "in.csv", 30, &[0.8, 0.2], 2);
    let base = [
        "optimize",
        "--input",
        input.to_str().unwrap(),
        "--label",
        "y",
        "--protected",
        "z",
    ];

    let mut merge_args = base.to_vec();
    merge_args.extend(["--mode", "merge", "--output", "/tmp/x.csv"]);
    let output = fairmask_bin(&merge_args);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("synthetic"));

    let mut io_args = base.to_vec();
    io_args.extend([
        "--mode",
        "remove",
        "--solver",
        "original",
        "--output",
        "/nonexistent-dir/fair.csv",
    ]);
    let output = fairmask_bin(&io_args);
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn benchmark_prints_the_same_table_it_writes() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_file(
        dir.path(),
        "plan.toml",
        r#"
seed_base = 3
modes = ["remove"]
measures = ["sdp_sum"]

[[datasets]]
name = "tiny"
[datasets.biased]
n = 40
positive_rates = [0.8, 0.3]
seed = 6

[[solvers]]
kind = "original"
"#,
    );
    let out_dir = dir.path().join("results");
    let output = fairmask_bin(&[
        "benchmark",
        "--plan",
        plan.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    let table = std::fs::read_to_string(out_dir.join("results_table.csv")).unwrap();
    assert_eq!(stdout.trim_end(), table.trim_end());

    // default repeats is 15: one raw record per trial
    let raw = std::fs::read_to_string(out_dir.join("results_raw.jsonl")).unwrap();
    assert_eq!(raw.lines().count(), 15);

    // and they match an in-process run of the same plan, modulo the
    // wall-clock runtime columns
    let mut plan = ExperimentPlan::from_path(&plan).unwrap();
    plan.output = None;
    let table_lib = fairmask::harness::run_plan(&plan).unwrap();
    let strip_runtimes = |csv: &str| -> Vec<String> {
        csv.trim_end()
            .lines()
            .map(|line| {
                let cols: Vec<&str> = line.split(',').collect();
                [&cols[..7], &cols[9..]].concat().join(",")
            })
            .collect()
    };
    assert_eq!(strip_runtimes(&stdout), strip_runtimes(&table_lib.to_csv()));
}

#[test]
fn benchmark_invalid_plan_exits_2_naming_missing_keys() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_file(
        dir.path(),
        "plan.toml",
        "datasets = []\nmodes = []\nmeasures = []\n",
    );
    let output = fairmask_bin(&["benchmark", "--plan", plan.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("datasets"), "stderr: {stderr}");
    assert!(stderr.contains("measures"), "stderr: {stderr}");
}

#[test]
fn ga_with_seeding_beats_original_on_every_harness_trial() {
    // library-level check of the optimize contract over 15 seeded trials
    let mut ga = SolverSpec::named("ga");
    ga.selection = Some("elitist".into());
    ga.pop = Some(30);
    ga.gens = Some(40);
    let plan = ExperimentPlan {
        repeats: 15,
        seed_base: 100,
        synthetic_seed: None,
        output: None,
        datasets: vec![fairmask::harness::DatasetSpec {
            name: "biased".into(),
            path: None,
            label: None,
            protected: None,
            positive: None,
            features: None,
            biased: Some(BiasedDatasetSpec {
                n: 300,
                positive_rates: vec![0.75, 0.45, 0.25],
                group_weights: vec![],
                feature_dim: 2,
                seed: 17,
            }),
        }],
        modes: vec!["remove".into()],
        measures: vec!["sdp_sum".into()],
        solvers: vec![SolverSpec::named("original"), ga],
        grid: None,
    };
    let table = fairmask::harness::run_plan(&plan).unwrap();
    let original = table
        .raw
        .iter()
        .find(|r| r.solver == "original")
        .unwrap()
        .score;
    let ga_scores: Vec<f64> = table
        .raw
        .iter()
        .filter(|r| r.solver == "ga/elitist")
        .map(|r| r.score)
        .collect();
    assert_eq!(ga_scores.len(), 15);
    assert!(ga_scores.iter().all(|&s| s <= original));
}

#[test]
fn merge_view_provenance_column_matches_the_mask() {
    let dir = tempfile::tempdir().unwrap();
    let real = biased_dataset(&BiasedDatasetSpec {
        n: 20,
        positive_rates: vec![0.8, 0.3],
        group_weights: vec![],
        feature_dim: 1,
        seed: 30,
    });
    let synth = biased_dataset(&BiasedDatasetSpec {
        n: 10,
        positive_rates: vec![0.5, 0.5],
        group_weights: vec![],
        feature_dim: 1,
        seed: 31,
    });
    let spec = build_pool(PoolMode::Merge, MeasureKind::SdpSum, real, Some(synth)).unwrap();
    // select the first 12 real rows and the last 4 synthetic rows
    let mut bits = vec![false; 30];
    for b in bits.iter_mut().take(12) {
        *b = true;
    }
    for b in bits.iter_mut().skip(26) {
        *b = true;
    }
    let mask = Mask::new(bits);
    let view = spec.materialize(&mask).unwrap();
    let path = dir.path().join("prov.csv");
    dataset::write_csv_with(&view, &path, &WriteOptions { provenance: true }).unwrap();

    let content = std::fs::read_to_string(&path).unwrap();
    let mut lines = content.lines();
    let header = lines.next().unwrap();
    assert!(header.ends_with(",provenance"));
    let mut real_rows = 0;
    let mut synth_rows = 0;
    for line in lines {
        if line.ends_with(",real") {
            real_rows += 1;
        } else if line.ends_with(",synthetic") {
            synth_rows += 1;
        }
    }
    assert_eq!(real_rows, 12);
    assert_eq!(synth_rows, 4);
}
