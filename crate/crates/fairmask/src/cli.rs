//! The `fairmask` command line: measure a dataset's discrimination, generate
//! synthetic data, optimize a fairness objective into a debiased CSV, and
//! run benchmark plans.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 solver or
//! output failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::dataset::{
    self, ColumnRoles, DatasetView, EncodeOptions, EncodedDataset, WriteOptions,
};
use crate::harness::{self, ExperimentPlan};
use crate::heuristics::{self, SelectionKind, SolverConfig, SolverKind};
use crate::measures::{self, MeasureKind};
use crate::objective::{self, PoolMode};
use crate::synth;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// User, configuration, or input-data problem (exit 2).
    #[error("{0}")]
    Config(String),
    /// Solver or output failure (exit 3).
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn config(err: impl std::fmt::Display) -> Self {
        CliError::Config(err.to_string())
    }

    fn internal(err: impl std::fmt::Display) -> Self {
        CliError::Internal(err.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fairmask",
    version,
    about = "Debias tabular datasets by subset selection over real and synthetic sample pools"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report group sizes, positive rates, and all discrimination scores.
    Measure(MeasureArgs),
    /// Fit a Gaussian copula and emit synthetic rows as CSV.
    Generate(GenerateArgs),
    /// Solve for a debiased subset and write it as CSV plus a JSON report.
    Optimize(Box<OptimizeArgs>),
    /// Run an experiment plan and write result tables.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Args, Clone)]
struct RoleArgs {
    /// Input CSV path.
    #[arg(long)]
    input: PathBuf,
    /// Label column name.
    #[arg(long)]
    label: String,
    /// Protected attribute column name.
    #[arg(long)]
    protected: String,
    /// Raw label value mapped to y = 1 (defaults to 1 for numeric labels).
    #[arg(long)]
    positive: Option<String>,
    /// Feature columns (comma separated); all remaining columns when
    /// omitted.
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<String>>,
}

impl RoleArgs {
    fn load(&self) -> Result<Arc<EncodedDataset>, CliError> {
        load_dataset(
            &self.input,
            &self.label,
            &self.protected,
            self.positive.as_deref(),
            self.features.clone(),
        )
    }
}

fn load_dataset(
    input: &Path,
    label: &str,
    protected: &str,
    positive: Option<&str>,
    features: Option<Vec<String>>,
) -> Result<Arc<EncodedDataset>, CliError> {
    let features = match features {
        Some(cols) if !cols.is_empty() => cols,
        _ => harness::feature_columns_from_header(input, label, protected)
            .map_err(CliError::config)?,
    };
    let roles = ColumnRoles::new(
        label.to_string(),
        protected.to_string(),
        features,
        positive.map(str::to_string),
    )
    .map_err(CliError::config)?;
    dataset::load_csv(input, &roles, &EncodeOptions::default())
        .map(Arc::new)
        .map_err(CliError::config)
}

#[derive(Debug, Args)]
struct MeasureArgs {
    #[command(flatten)]
    roles: RoleArgs,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[command(flatten)]
    roles: RoleArgs,
    /// Synthetic rows to draw; defaults to the input row count.
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    output: PathBuf,
    /// Validate an externally generated synthetic CSV and pass it through
    /// unchanged instead of sampling.
    #[arg(long)]
    external: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    /// TOML config file; command-line flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    protected: Option<String>,
    #[arg(long)]
    positive: Option<String>,
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<String>>,
    /// Pool mode: remove | synthetic | merge | privacy | add.
    #[arg(long)]
    mode: Option<String>,
    /// Measure: sdp_sum | sdp_avg | sdp_max.
    #[arg(long)]
    measure: Option<String>,
    /// Solver: original | random | ga.
    #[arg(long)]
    solver: Option<String>,
    /// GA selection: elitist | tournament | roulette.
    #[arg(long)]
    selection: Option<String>,
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long)]
    gens: Option<usize>,
    #[arg(long)]
    mutation: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    tournament_size: Option<usize>,
    /// Evaluation budget for the random solver.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Synthetic CSV to use when the mode needs one.
    #[arg(long)]
    synthetic: Option<PathBuf>,
    /// Fit a copula on the input and generate the synthetic pool in-process.
    #[arg(long)]
    generate_synthetic: bool,
    #[arg(long)]
    synthetic_seed: Option<u64>,
    /// Do not inject the all-ones mask into the initial population.
    #[arg(long)]
    no_seed_ones: bool,
    /// Penalize masks selecting fewer than this fraction of the pool.
    #[arg(long)]
    min_fraction: Option<f64>,
    /// Mark each output row with a real/synthetic provenance column.
    #[arg(long)]
    provenance: bool,
    /// Debiased output CSV path.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Report JSON path; the report is printed to stdout regardless.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    /// Experiment plan (TOML).
    #[arg(long)]
    plan: PathBuf,
    /// Output directory; overrides the plan's `output` key.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Keys accepted in an `optimize` config file; flags win over file values.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub label: Option<String>,
    pub protected: Option<String>,
    pub positive: Option<String>,
    pub features: Option<Vec<String>>,
    pub mode: Option<String>,
    pub measure: Option<String>,
    pub solver: Option<String>,
    pub selection: Option<String>,
    pub pop: Option<usize>,
    pub gens: Option<usize>,
    pub mutation: Option<f64>,
    pub patience: Option<usize>,
    pub tournament_size: Option<usize>,
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    pub synthetic: Option<PathBuf>,
    pub generate_synthetic: Option<bool>,
    pub synthetic_seed: Option<u64>,
    pub no_seed_ones: Option<bool>,
    pub min_fraction: Option<f64>,
    pub provenance: Option<bool>,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl RunConfig {
    fn from_file(path: &Path) -> Result<Self, CliError> {
        let content = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config `{}`: {e}", path.display())))?;
        toml::from_str(&content)
            .map_err(|e| CliError::Config(format!("config `{}`: {e}", path.display())))
    }

    fn merge_flags(mut self, args: &OptimizeArgs) -> Self {
        macro_rules! take {
            ($field:ident) => {
                if args.$field.is_some() {
                    self.$field = args.$field.clone();
                }
            };
        }
        take!(input);
        take!(label);
        take!(protected);
        take!(positive);
        take!(features);
        take!(mode);
        take!(measure);
        take!(solver);
        take!(selection);
        take!(pop);
        take!(gens);
        take!(mutation);
        take!(patience);
        take!(tournament_size);
        take!(budget);
        take!(seed);
        take!(synthetic);
        take!(synthetic_seed);
        take!(min_fraction);
        take!(output);
        take!(report);
        if args.generate_synthetic {
            self.generate_synthetic = Some(true);
        }
        if args.no_seed_ones {
            self.no_seed_ones = Some(true);
        }
        if args.provenance {
            self.provenance = Some(true);
        }
        self
    }

    fn require<T: Clone>(value: &Option<T>, key: &str) -> Result<T, CliError> {
        value
            .clone()
            .ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    fn solver_config(&self) -> Result<SolverConfig, CliError> {
        let mut config = SolverConfig {
            seed: self.seed.unwrap_or(0),
            ..Default::default()
        };
        if let Some(kind) = &self.solver {
            config.kind = SolverKind::from_name(kind).map_err(CliError::config)?;
        }
        if let Some(selection) = &self.selection {
            config.selection = SelectionKind::from_name(selection).map_err(CliError::config)?;
        }
        if let Some(v) = self.pop {
            config.pop_size = v;
        }
        if let Some(v) = self.gens {
            config.generations = v;
        }
        if let Some(v) = self.mutation {
            config.mutation_rate = v;
        }
        if let Some(v) = self.patience {
            config.patience = v;
        }
        if let Some(v) = self.tournament_size {
            config.tournament_size = v;
        }
        if self.budget.is_some() {
            config.evaluation_budget = self.budget;
        }
        if self.no_seed_ones == Some(true) {
            config.seed_all_ones = false;
        }
        config.validate().map_err(CliError::config)?;
        Ok(config)
    }
}

/// Parse the process arguments and run; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(output) => {
            println!("{output}");
            EXIT_OK
        }
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Measure(args) => cmd_measure(&args),
        Command::Generate(args) => cmd_generate(&args),
        Command::Optimize(args) => cmd_optimize(&args),
        Command::Benchmark(args) => cmd_benchmark(&args),
    }
}

fn score_json(view: &DatasetView) -> serde_json::Value {
    let mut scores = serde_json::Map::new();
    for kind in MeasureKind::ALL {
        let value = match measures::evaluate(kind, view) {
            Ok(score) => json!(score),
            Err(_) => serde_json::Value::Null,
        };
        scores.insert(kind.name().to_string(), value);
    }
    serde_json::Value::Object(scores)
}

fn cmd_measure(args: &MeasureArgs) -> Result<String, CliError> {
    let ds = args.roles.load()?;
    let view = ds.full_view();
    let rates = measures::positive_rates(&view);
    let groups: Vec<serde_json::Value> = ds
        .group_names()
        .iter()
        .enumerate()
        .map(|(g, name)| {
            json!({
                "name": name,
                "count": rates.counts[g],
                "positive_rate": rates.rates[g],
            })
        })
        .collect();
    let report = json!({
        "n": ds.n(),
        "d": ds.d(),
        "k": ds.k(),
        "groups": groups,
        "scores": score_json(&view),
    });
    serde_json::to_string_pretty(&report).map_err(CliError::internal)
}

fn cmd_generate(args: &GenerateArgs) -> Result<String, CliError> {
    let real = args.roles.load()?;
    if let Some(external) = &args.external {
        // Validation-only path: check schema compatibility, copy unchanged.
        let ext = load_dataset(
            external,
            &args.roles.label,
            &args.roles.protected,
            args.roles.positive.as_deref(),
            args.roles.features.clone(),
        )?;
        objective::check_schema(&real, &ext).map_err(CliError::config)?;
        std::fs::copy(external, &args.output).map_err(CliError::internal)?;
        let report = json!({
            "source": "external",
            "rows": ext.n(),
            "output": args.output.display().to_string(),
            "fidelity_ks": ks_json(&real, &ext),
        });
        return serde_json::to_string_pretty(&report).map_err(CliError::internal);
    }

    let rows = args.rows.unwrap_or(real.n());
    let model = synth::fit(&real).map_err(CliError::config)?;
    let synthetic = synth::sample(&model, rows, args.seed);
    let synthetic = Arc::new(synthetic);
    dataset::write_csv(&synthetic.full_view(), &args.output).map_err(CliError::internal)?;
    let missing: Vec<&String> = real
        .group_names()
        .iter()
        .enumerate()
        .filter(|(g, _)| !synthetic.groups().contains(&((*g as u32) + 1)))
        .map(|(_, name)| name)
        .collect();
    let report = json!({
        "source": "copula",
        "rows": rows,
        "seed": args.seed,
        "output": args.output.display().to_string(),
        "fidelity_ks": ks_json(&real, &synthetic),
        "missing_groups": missing,
    });
    serde_json::to_string_pretty(&report).map_err(CliError::internal)
}

fn ks_json(real: &EncodedDataset, synth_ds: &EncodedDataset) -> serde_json::Value {
    let summary = synth::fidelity_summary(real, synth_ds);
    let map: BTreeMap<String, f64> = summary.into_iter().collect();
    json!(map)
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<String, CliError> {
    let file_config = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let config = file_config.merge_flags(args);

    let input = RunConfig::require(&config.input, "input")?;
    let label = RunConfig::require(&config.label, "label")?;
    let protected = RunConfig::require(&config.protected, "protected")?;
    let output = RunConfig::require(&config.output, "output")?;
    let mode = PoolMode::from_name(config.mode.as_deref().unwrap_or("remove"))
        .map_err(CliError::config)?;
    let measure = MeasureKind::from_name(config.measure.as_deref().unwrap_or("sdp_sum"))
        .map_err(CliError::config)?;

    let real = load_dataset(
        &input,
        &label,
        &protected,
        config.positive.as_deref(),
        config.features.clone(),
    )?;

    let synthetic = if mode.requires_synthetic() {
        Some(resolve_synthetic(&config, &real, &label, &protected)?)
    } else {
        None
    };

    let mut spec = objective::build_pool(mode, measure, Arc::clone(&real), synthetic)
        .map_err(CliError::config)?;
    if let Some(q) = config.min_fraction {
        if !(0.0..=1.0).contains(&q) {
            return Err(CliError::Config("min_fraction must lie in [0, 1]".into()));
        }
        spec = spec.with_min_selection_fraction(q);
    }
    let solver_config = config.solver_config()?;

    let report = heuristics::solve(&spec, &solver_config).map_err(CliError::internal)?;
    let result_view = spec.materialize(&report.best_mask).map_err(CliError::internal)?;

    let write_options = WriteOptions {
        provenance: config.provenance == Some(true),
    };
    dataset::write_csv_with(&result_view, &output, &write_options).map_err(CliError::internal)?;

    let before_view = real.full_view();
    let before = score_json(&before_view);
    let after = score_json(&result_view);
    let optimized = measure.name();
    if let (Some(b), Some(a)) = (
        before.get(optimized).and_then(|v| v.as_f64()),
        after.get(optimized).and_then(|v| v.as_f64()),
    ) {
        if a > b {
            log::warn!(
                "optimized {optimized} rose from {b} to {a}; the selected pool cannot reach the input's score"
            );
        }
    }

    let report_json = json!({
        "config": config,
        "mode": mode.name(),
        "measure": measure.name(),
        "solver": solver_config.kind.name(),
        "selection": solver_config.selection.name(),
        "seed": solver_config.seed,
        "pool_size": spec.pool_size(),
        "popcount": report.best_mask.popcount(),
        "output_rows": result_view.len(),
        "evaluations": report.evaluations,
        "runtime_s": report.wall_time,
        "terminated_early": report.terminated_early,
        "best_score": report.best_score,
        "before": before,
        "after": after,
        "output": output.display().to_string(),
    });
    let rendered = serde_json::to_string_pretty(&report_json).map_err(CliError::internal)?;
    if let Some(path) = &config.report {
        std::fs::write(path, &rendered).map_err(CliError::internal)?;
    }
    Ok(rendered)
}

fn resolve_synthetic(
    config: &RunConfig,
    real: &Arc<EncodedDataset>,
    label: &str,
    protected: &str,
) -> Result<Arc<EncodedDataset>, CliError> {
    if let Some(path) = &config.synthetic {
        return load_dataset(
            path,
            label,
            protected,
            config.positive.as_deref(),
            config.features.clone(),
        );
    }
    if config.generate_synthetic == Some(true) {
        let model = synth::fit(real).map_err(CliError::config)?;
        let seed = config.synthetic_seed.or(config.seed).unwrap_or(0);
        return Ok(Arc::new(synth::sample(&model, real.n(), seed)));
    }
    Err(CliError::Config(
        "this mode needs synthetic data: pass --synthetic <csv> or --generate-synthetic".into(),
    ))
}

fn cmd_benchmark(args: &BenchmarkArgs) -> Result<String, CliError> {
    let mut plan = ExperimentPlan::from_path(&args.plan).map_err(CliError::config)?;
    if let Some(out) = &args.out {
        plan.output = Some(out.display().to_string());
    }
    let table = harness::run_plan(&plan).map_err(CliError::internal)?;
    let mut rendered = table.to_csv();
    if let Some(grid) = plan.grid.clone() {
        let grid_table = harness::grid_search(&plan, &grid).map_err(CliError::internal)?;
        rendered.push('\n');
        rendered.push_str(&grid_table.to_csv());
    }
    Ok(rendered.trim_end().to_string())
}
