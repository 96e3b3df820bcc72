//! Experiment harness: repeated-trial plans producing mean/std score and
//! runtime tables, hyperparameter grids, a seeded biased-dataset generator
//! for offline runs, and an exhaustive brute-force oracle for small pools.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{
    ColumnEncoding, ColumnRoles, DatasetError, EncodeOptions, EncodedDataset, TableSchema,
};
use crate::heuristics::{solve, SelectionKind, SolverConfig, SolverError, SolverKind};
use crate::measures::{Measure, MeasureError, MeasureKind};
use crate::objective::{build_pool, Mask, ObjectiveError, ObjectiveSpec, PoolMode};
use crate::synth::{self, SynthError};

/// Hard cap on the pool size the exhaustive oracle accepts.
pub const BRUTE_FORCE_CAP: usize = 24;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("pool size {size} exceeds the exhaustive-search cap of {cap}")]
    PoolTooLarge { size: usize, cap: usize },
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("plan parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

// ---------------------------------------------------------------------------
// Seeded biased dataset generator
// ---------------------------------------------------------------------------

/// Configuration for a synthetic biased dataset with known group rates, used
/// when no benchmark CSV is available.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BiasedDatasetSpec {
    pub n: usize,
    /// Desired positive rate per group; its length sets k.
    pub positive_rates: Vec<f64>,
    /// Relative group sizes; equal when empty.
    #[serde(default)]
    pub group_weights: Vec<f64>,
    #[serde(default = "default_feature_dim")]
    pub feature_dim: usize,
    pub seed: u64,
}

fn default_feature_dim() -> usize {
    3
}

/// Generate a dataset with the configured per-group positive rates.
///
/// Group sizes are exact (largest-remainder apportionment, at least one row
/// per group); labels are Bernoulli draws at the group's rate; features are
/// group-shifted normals so the table has learnable structure.
pub fn biased_dataset(spec: &BiasedDatasetSpec) -> Arc<EncodedDataset> {
    let k = spec.positive_rates.len();
    assert!(k >= 2, "need at least two groups");
    assert!(spec.n >= k, "need at least one row per group");
    let weights = if spec.group_weights.is_empty() {
        vec![1.0; k]
    } else {
        assert_eq!(spec.group_weights.len(), k, "one weight per group");
        spec.group_weights.clone()
    };
    let counts = apportion(spec.n, &weights);

    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let mut assignment: Vec<u32> = Vec::with_capacity(spec.n);
    for (g, &c) in counts.iter().enumerate() {
        assignment.extend(std::iter::repeat_n(g as u32 + 1, c));
    }
    assignment.shuffle(&mut rng);

    let d = spec.feature_dim.max(1);
    let mut features = Vec::with_capacity(spec.n * d);
    let mut labels = Vec::with_capacity(spec.n);
    for &g in &assignment {
        let rate = spec.positive_rates[(g - 1) as usize];
        let y = rng.gen_bool(rate.clamp(0.0, 1.0)) as u8;
        for j in 0..d {
            let noise: f64 = rng.sample(rand_distr::StandardNormal);
            features.push(noise + 0.5 * g as f64 + 0.25 * (j as f64) * y as f64);
        }
        labels.push(y);
    }

    let schema = TableSchema {
        label_column: "y".into(),
        protected_column: "z".into(),
        encodings: (1..=d)
            .map(|j| ColumnEncoding::Numeric {
                name: format!("f{j}"),
            })
            .collect(),
        label_values: ["0".into(), "1".into()],
    };
    let group_names = (1..=k).map(|g| format!("g{g}")).collect();
    Arc::new(
        EncodedDataset::from_parts(features, labels, assignment, group_names, schema)
            .expect("generated rows satisfy the dataset invariants"),
    )
}

/// Largest-remainder apportionment with a floor of one per group.
fn apportion(n: usize, weights: &[f64]) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| w / total * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| (q.floor() as usize).max(1)).collect();
    let mut assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        (quotas[b] - quotas[b].floor()).total_cmp(&(quotas[a] - quotas[a].floor()))
    });
    let mut cursor = 0usize;
    while assigned < n {
        counts[order[cursor % order.len()]] += 1;
        assigned += 1;
        cursor += 1;
    }
    while assigned > n {
        let idx = order[cursor % order.len()];
        if counts[idx] > 1 {
            counts[idx] -= 1;
            assigned -= 1;
        }
        cursor += 1;
    }
    counts
}

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

/// A dataset source in a plan: either a CSV path with roles, or a generated
/// biased dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub protected: Option<String>,
    #[serde(default)]
    pub positive: Option<String>,
    #[serde(default)]
    pub features: Option<Vec<String>>,
    #[serde(default)]
    pub biased: Option<BiasedDatasetSpec>,
}

impl DatasetSpec {
    pub fn load(&self) -> Result<Arc<EncodedDataset>, HarnessError> {
        if let Some(biased) = &self.biased {
            return Ok(biased_dataset(biased));
        }
        let path = self.path.as_ref().ok_or_else(|| {
            HarnessError::InvalidPlan(format!(
                "dataset `{}` needs either `path` or `biased`",
                self.name
            ))
        })?;
        let label = self.label.clone().ok_or_else(|| {
            HarnessError::InvalidPlan(format!("dataset `{}` is missing `label`", self.name))
        })?;
        let protected = self.protected.clone().ok_or_else(|| {
            HarnessError::InvalidPlan(format!("dataset `{}` is missing `protected`", self.name))
        })?;
        let features = match &self.features {
            Some(cols) => cols.clone(),
            None => feature_columns_from_header(path, &label, &protected)?,
        };
        let roles = ColumnRoles::new(label, protected, features, self.positive.clone())?;
        Ok(Arc::new(crate::dataset::load_csv(
            path,
            &roles,
            &EncodeOptions::default(),
        )?))
    }
}

/// All header columns except the two role columns.
pub fn feature_columns_from_header(
    path: impl AsRef<Path>,
    label: &str,
    protected: &str,
) -> Result<Vec<String>, HarnessError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())
        .map_err(DatasetError::Csv)?;
    let headers = reader.headers().map_err(DatasetError::Csv)?;
    Ok(headers
        .iter()
        .filter(|h| *h != label && *h != protected)
        .map(str::to_string)
        .collect())
}

/// One solver entry of a plan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverSpec {
    pub kind: String,
    #[serde(default)]
    pub selection: Option<String>,
    #[serde(default)]
    pub pop: Option<usize>,
    #[serde(default)]
    pub gens: Option<usize>,
    #[serde(default)]
    pub mutation: Option<f64>,
    #[serde(default)]
    pub patience: Option<usize>,
    #[serde(default)]
    pub tournament_size: Option<usize>,
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default)]
    pub seed_all_ones: Option<bool>,
}

impl SolverSpec {
    pub fn named(kind: &str) -> Self {
        Self {
            kind: kind.into(),
            selection: None,
            pop: None,
            gens: None,
            mutation: None,
            patience: None,
            tournament_size: None,
            budget: None,
            seed_all_ones: None,
        }
    }

    pub fn to_config(&self, seed: u64) -> Result<SolverConfig, HarnessError> {
        let mut config = SolverConfig {
            kind: SolverKind::from_name(&self.kind)?,
            seed,
            ..Default::default()
        };
        if let Some(s) = &self.selection {
            config.selection = SelectionKind::from_name(s)?;
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
        if let Some(v) = self.budget {
            config.evaluation_budget = Some(v);
        }
        if let Some(v) = self.seed_all_ones {
            config.seed_all_ones = v;
        }
        config.validate()?;
        Ok(config)
    }

    /// Label used in tables: `ga/elitist`, `random`, `original`.
    pub fn label(&self) -> String {
        if self.kind == "ga" {
            format!(
                "ga/{}",
                self.selection.clone().unwrap_or_else(|| "elitist".into())
            )
        } else {
            self.kind.clone()
        }
    }
}

/// Hyperparameter grid over the GA.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub pop_sizes: Vec<usize>,
    pub generations: Vec<usize>,
    /// Selection operator used for every grid point.
    #[serde(default = "default_grid_selection")]
    pub selection: String,
}

fn default_grid_selection() -> String {
    "tournament".into()
}

/// A full experiment: datasets x modes x measures x solvers, repeated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentPlan {
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub seed_base: u64,
    /// Seed for copula sampling when a mode needs synthetic data; the
    /// dataset index is added so each dataset gets its own stream.
    #[serde(default)]
    pub synthetic_seed: Option<u64>,
    #[serde(default)]
    pub output: Option<String>,
    pub datasets: Vec<DatasetSpec>,
    pub modes: Vec<String>,
    pub measures: Vec<String>,
    #[serde(default)]
    pub solvers: Vec<SolverSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

fn default_repeats() -> usize {
    15
}

impl ExperimentPlan {
    pub fn from_toml_str(content: &str) -> Result<Self, HarnessError> {
        let plan: ExperimentPlan = toml::from_str(content)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let mut missing = Vec::new();
        if self.datasets.is_empty() {
            missing.push("datasets");
        }
        if self.modes.is_empty() {
            missing.push("modes");
        }
        if self.measures.is_empty() {
            missing.push("measures");
        }
        if self.solvers.is_empty() && self.grid.is_none() {
            missing.push("solvers (or grid)");
        }
        if !missing.is_empty() {
            return Err(HarnessError::InvalidPlan(format!(
                "missing keys: {}",
                missing.join(", ")
            )));
        }
        if self.repeats == 0 {
            return Err(HarnessError::InvalidPlan("repeats must be >= 1".into()));
        }
        for mode in &self.modes {
            PoolMode::from_name(mode)?;
        }
        for measure in &self.measures {
            MeasureKind::from_name(measure)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Records and tables
// ---------------------------------------------------------------------------

/// One solver trial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawRecord {
    pub dataset: String,
    pub mode: String,
    pub measure: String,
    pub solver: String,
    pub trial: usize,
    pub seed: u64,
    pub score: f64,
    pub runtime_s: f64,
    pub evaluations: usize,
    pub popcount: usize,
    pub pool_size: usize,
}

impl RawRecord {
    /// Every field except the wall-clock runtime, which is inherently
    /// non-deterministic; used to compare executions bit-for-bit.
    pub fn deterministic_key(&self) -> String {
        format!(
            "{}|{}|{}|{}|{}|{}|{:016x}|{}|{}|{}",
            self.dataset,
            self.mode,
            self.measure,
            self.solver,
            self.trial,
            self.seed,
            self.score.to_bits(),
            self.evaluations,
            self.popcount,
            self.pool_size
        )
    }
}

/// Identifies one (dataset, mode, measure, solver) cell.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub dataset: String,
    pub mode: String,
    pub measure: String,
    pub solver: String,
}

/// Aggregates over a cell's trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellAggregate {
    pub trials: usize,
    pub mean_score: f64,
    pub std_score: f64,
    pub mean_runtime_s: f64,
    pub std_runtime_s: f64,
    /// Set when the cell failed to run; its trials are absent from the raw
    /// records.
    pub error: Option<String>,
}

/// Raw records plus per-cell aggregates.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ResultTable {
    pub cells: BTreeMap<CellKey, CellAggregate>,
    pub raw: Vec<RawRecord>,
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation, so a single trial reports 0.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

impl ResultTable {
    fn aggregate_cell(&mut self, key: CellKey, records: &[RawRecord]) {
        let scores: Vec<f64> = records.iter().map(|r| r.score).collect();
        let runtimes: Vec<f64> = records.iter().map(|r| r.runtime_s).collect();
        self.cells.insert(
            key,
            CellAggregate {
                trials: records.len(),
                mean_score: mean(&scores),
                std_score: std_dev(&scores),
                mean_runtime_s: mean(&runtimes),
                std_runtime_s: std_dev(&runtimes),
                error: None,
            },
        );
    }

    /// Mean score of one cell, if it ran.
    pub fn mean_score(&self, key: &CellKey) -> Option<f64> {
        self.cells
            .get(key)
            .filter(|c| c.error.is_none())
            .map(|c| c.mean_score)
    }

    /// Render the aggregates as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "dataset,mode,measure,solver,trials,mean_score,std_score,mean_runtime_s,std_runtime_s,error\n",
        );
        for (key, agg) in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                key.dataset,
                key.mode,
                key.measure,
                key.solver,
                agg.trials,
                agg.mean_score,
                agg.std_score,
                agg.mean_runtime_s,
                agg.std_runtime_s,
                agg.error.clone().unwrap_or_default()
            ));
        }
        out
    }

    /// Write `results_raw.jsonl` and `results_table.csv` into a directory.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<(), HarnessError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut jsonl = String::new();
        for record in &self.raw {
            jsonl.push_str(&serde_json::to_string(record)?);
            jsonl.push('\n');
        }
        std::fs::write(dir.join("results_raw.jsonl"), jsonl)?;
        std::fs::write(dir.join("results_table.csv"), self.to_csv())?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Plan execution
// ---------------------------------------------------------------------------

struct PreparedDataset {
    name: String,
    real: Arc<EncodedDataset>,
    synthetic: Option<Arc<EncodedDataset>>,
}

fn prepare_datasets(plan: &ExperimentPlan) -> Result<Vec<PreparedDataset>, HarnessError> {
    let needs_synth = plan
        .modes
        .iter()
        .any(|m| matches!(PoolMode::from_name(m), Ok(mode) if mode.requires_synthetic()));
    let base = plan.synthetic_seed.unwrap_or(plan.seed_base);
    plan.datasets
        .iter()
        .enumerate()
        .map(|(idx, spec)| {
            let real = spec.load()?;
            let synthetic = if needs_synth {
                let model = synth::fit(&real)?;
                Some(Arc::new(synth::sample(&model, real.n(), base + idx as u64)))
            } else {
                None
            };
            Ok(PreparedDataset {
                name: spec.name.clone(),
                real,
                synthetic,
            })
        })
        .collect()
}

fn run_cell(
    prepared: &PreparedDataset,
    mode: PoolMode,
    measure: MeasureKind,
    solver: &SolverSpec,
    repeats: usize,
    seed_base: u64,
) -> Result<Vec<RawRecord>, HarnessError> {
    let spec = build_pool(
        mode,
        Measure::Builtin(measure),
        Arc::clone(&prepared.real),
        prepared.synthetic.clone(),
    )?;
    let mut records = Vec::with_capacity(repeats);
    for trial in 0..repeats {
        let config = solver.to_config(seed_base + trial as u64)?;
        let start = Instant::now();
        let report = solve(&spec, &config)?;
        let runtime_s = start.elapsed().as_secs_f64();
        records.push(RawRecord {
            dataset: prepared.name.clone(),
            mode: mode.name().into(),
            measure: measure.name().into(),
            solver: solver.label(),
            trial,
            seed: config.seed,
            score: report.best_score,
            runtime_s,
            evaluations: report.evaluations,
            popcount: report.best_mask.popcount(),
            pool_size: spec.pool_size(),
        });
    }
    Ok(records)
}

/// Execute every cell of the plan. Cell failures are recorded in the table
/// and do not abort the remaining cells.
pub fn run_plan(plan: &ExperimentPlan) -> Result<ResultTable, HarnessError> {
    plan.validate()?;
    let prepared = prepare_datasets(plan)?;
    let mut table = ResultTable::default();
    for dataset in &prepared {
        for mode_name in &plan.modes {
            let mode = PoolMode::from_name(mode_name)?;
            for measure_name in &plan.measures {
                let measure = MeasureKind::from_name(measure_name)?;
                for solver in &plan.solvers {
                    let key = CellKey {
                        dataset: dataset.name.clone(),
                        mode: mode.name().into(),
                        measure: measure.name().into(),
                        solver: solver.label(),
                    };
                    match run_cell(dataset, mode, measure, solver, plan.repeats, plan.seed_base) {
                        Ok(records) => {
                            table.aggregate_cell(key, &records);
                            table.raw.extend(records);
                        }
                        Err(err) => {
                            table.cells.insert(
                                key,
                                CellAggregate {
                                    trials: 0,
                                    mean_score: f64::NAN,
                                    std_score: f64::NAN,
                                    mean_runtime_s: f64::NAN,
                                    std_runtime_s: f64::NAN,
                                    error: Some(err.to_string()),
                                },
                            );
                        }
                    }
                }
            }
        }
    }
    if let Some(dir) = &plan.output {
        table.write_to_dir(dir)?;
    }
    Ok(table)
}

/// Run the GA over every (pop_size, generations) grid point; one table cell
/// per point, solver labeled `ga/<selection> pop=<p> gens=<g>`.
pub fn grid_search(plan: &ExperimentPlan, grid: &GridSpec) -> Result<ResultTable, HarnessError> {
    plan.validate()?;
    let prepared = prepare_datasets(plan)?;
    let mut table = ResultTable::default();
    for dataset in &prepared {
        for mode_name in &plan.modes {
            let mode = PoolMode::from_name(mode_name)?;
            for measure_name in &plan.measures {
                let measure = MeasureKind::from_name(measure_name)?;
                for &pop in &grid.pop_sizes {
                    for &gens in &grid.generations {
                        let mut solver = SolverSpec::named("ga");
                        solver.selection = Some(grid.selection.clone());
                        solver.pop = Some(pop);
                        solver.gens = Some(gens);
                        let key = CellKey {
                            dataset: dataset.name.clone(),
                            mode: mode.name().into(),
                            measure: measure.name().into(),
                            solver: format!("{} pop={pop} gens={gens}", solver.label()),
                        };
                        let mut records = run_cell(
                            dataset,
                            mode,
                            measure,
                            &solver,
                            plan.repeats,
                            plan.seed_base,
                        )?;
                        for r in &mut records {
                            r.solver = key.solver.clone();
                        }
                        table.aggregate_cell(key, &records);
                        table.raw.extend(records);
                    }
                }
            }
        }
    }
    if let Some(dir) = &plan.output {
        let dir = Path::new(dir);
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("grid_table.csv"), table.to_csv())?;
    }
    Ok(table)
}

// ---------------------------------------------------------------------------
// Brute force oracle
// ---------------------------------------------------------------------------

/// Result of the exhaustive scan.
#[derive(Debug, Clone)]
pub struct BruteForceResult {
    /// Lexicographically smallest optimal mask.
    pub mask: Mask,
    pub score: f64,
    /// Number of masks examined: exactly 2^pool_size.
    pub evaluations: u64,
}

/// Exhaustively scan all 2^n masks of a pool (n <= 24) in Gray-code order
/// with incremental stats updates, returning the true minimum.
pub fn brute_force(spec: &ObjectiveSpec) -> Result<BruteForceResult, HarnessError> {
    let n = spec.pool_size();
    if n > BRUTE_FORCE_CAP {
        return Err(HarnessError::PoolTooLarge {
            size: n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let stats_path = matches!(spec.measure(), Measure::Builtin(_));
    let mut mask = Mask::zeros(n);
    let mut stats = spec.stats_of(&mask)?;
    let score_of = |stats: &crate::dataset::GroupStats, mask: &Mask| -> Result<f64, HarnessError> {
        if stats_path {
            Ok(spec.score_stats(stats))
        } else {
            Ok(spec.fitness(mask)?)
        }
    };

    let mut best_score = score_of(&stats, &mask)?;
    let mut best_mask = mask.clone();
    let total: u64 = 1u64 << n;
    for i in 1..total {
        // Reflected Gray code: step i toggles the lowest set bit of i.
        let flip = i.trailing_zeros() as usize;
        spec.apply_flip(&mut stats, &mask, flip)?;
        mask.toggle(flip);
        let score = score_of(&stats, &mask)?;
        if score < best_score || (score == best_score && mask.bits() < best_mask.bits()) {
            best_score = score;
            best_mask = mask.clone();
        }
    }
    Ok(BruteForceResult {
        mask: best_mask,
        score: best_score,
        evaluations: total,
    })
}
