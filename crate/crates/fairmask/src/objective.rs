//! The combinatorial objective: a binary mask over a sample pool selects the
//! rows of the output dataset, and the configured measure scores it.
//!
//! Pool settings: remove rows from the original data, use synthetic data
//! only, merge both, drop synthetic rows that duplicate real ones (privacy),
//! or keep the original data fixed and select synthetic additions.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::dataset::{DatasetView, EncodedDataset, GroupStats, RowRef, RowSource};
use crate::measures::{Measure, PositiveRates};

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error("schema mismatch between real and synthetic data: {0}")]
    SchemaMismatch(String),
    #[error("pool mode `{0}` requires a synthetic dataset")]
    MissingSynthetic(PoolMode),
    #[error("mask length {mask} does not match pool size {pool}")]
    LengthMismatch { mask: usize, pool: usize },
    #[error("flip index {index} out of range for pool size {pool}")]
    IndexOutOfRange { index: usize, pool: usize },
    #[error("unknown pool mode `{0}`")]
    UnknownMode(String),
}

/// Fixed-length binary decision vector over a sample pool.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn ones(len: usize) -> Self {
        Self {
            bits: vec![true; len],
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn toggle(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn hamming_distance(&self, other: &Mask) -> usize {
        assert_eq!(self.len(), other.len());
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }
}

/// Which samples form the selectable pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolMode {
    /// Pool is the original data; selection removes rows.
    Remove,
    /// Pool is the synthetic data only.
    SyntheticOnly,
    /// Pool is the multiset union of original and synthetic rows.
    Merge,
    /// Pool is the synthetic data with rows identical to any real row
    /// removed, so the output cannot leak a real record.
    PrivacyDiff,
    /// Original data is fixed; selection adds synthetic rows on top.
    Add,
}

impl PoolMode {
    pub fn name(&self) -> &'static str {
        match self {
            PoolMode::Remove => "remove",
            PoolMode::SyntheticOnly => "synthetic",
            PoolMode::Merge => "merge",
            PoolMode::PrivacyDiff => "privacy",
            PoolMode::Add => "add",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, ObjectiveError> {
        match name {
            "remove" => Ok(PoolMode::Remove),
            "synthetic" => Ok(PoolMode::SyntheticOnly),
            "merge" => Ok(PoolMode::Merge),
            "privacy" => Ok(PoolMode::PrivacyDiff),
            "add" => Ok(PoolMode::Add),
            other => Err(ObjectiveError::UnknownMode(other.to_string())),
        }
    }

    pub fn requires_synthetic(&self) -> bool {
        !matches!(self, PoolMode::Remove)
    }
}

impl std::fmt::Display for PoolMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One selectable pool entry with its cached label and dictionary group code.
#[derive(Debug, Clone, Copy)]
struct PoolRow {
    source: RowSource,
    index: usize,
    label: u8,
    group: u32,
}

/// The materialized objective f(b): pool, measure, and penalty policy.
#[derive(Debug, Clone)]
pub struct ObjectiveSpec {
    mode: PoolMode,
    measure: Measure,
    real: Arc<EncodedDataset>,
    synthetic: Option<Arc<EncodedDataset>>,
    /// Shared group dictionary over real and synthetic data.
    group_names: Arc<Vec<String>>,
    /// Synthetic group code -> dictionary code.
    synth_group_map: Option<Arc<Vec<u32>>>,
    pool: Vec<PoolRow>,
    /// Group stats of the fixed part (all real rows) under `Add` mode.
    fixed_stats: Option<GroupStats>,
    penalty: f64,
    /// Masks selecting fewer than this fraction of the pool are penalized.
    min_selection_fraction: Option<f64>,
}

/// Build the sample pool for a mode and wrap it with a measure into an
/// objective.
pub fn build_pool(
    mode: PoolMode,
    measure: impl Into<Measure>,
    real: Arc<EncodedDataset>,
    synthetic: Option<Arc<EncodedDataset>>,
) -> Result<ObjectiveSpec, ObjectiveError> {
    let measure = measure.into();
    if mode.requires_synthetic() && synthetic.is_none() {
        return Err(ObjectiveError::MissingSynthetic(mode));
    }
    let synthetic = if mode.requires_synthetic() {
        synthetic
    } else {
        None
    };

    // Shared dictionary: real names first, unseen synthetic names appended.
    let mut group_names: Vec<String> = real.group_names().to_vec();
    let synth_group_map = synthetic.as_ref().map(|synth| {
        let map: Vec<u32> = synth
            .group_names()
            .iter()
            .map(|name| match group_names.iter().position(|g| g == name) {
                Some(pos) => (pos + 1) as u32,
                None => {
                    group_names.push(name.clone());
                    group_names.len() as u32
                }
            })
            .collect();
        Arc::new(map)
    });

    if let Some(synth) = &synthetic {
        check_schema(&real, synth)?;
    }

    let real_rows = || {
        (0..real.n()).map(|i| PoolRow {
            source: RowSource::Real,
            index: i,
            label: real.label(i),
            group: real.group(i),
        })
    };
    let synth_rows = |synth: &Arc<EncodedDataset>, map: &Arc<Vec<u32>>| {
        let map = Arc::clone(map);
        let synth = Arc::clone(synth);
        (0..synth.n()).map(move |i| PoolRow {
            source: RowSource::Synthetic,
            index: i,
            label: synth.label(i),
            group: map[(synth.group(i) - 1) as usize],
        })
    };

    let mut fixed_stats = None;
    let pool: Vec<PoolRow> = match mode {
        PoolMode::Remove => real_rows().collect(),
        PoolMode::SyntheticOnly => {
            let synth = synthetic.as_ref().unwrap();
            synth_rows(synth, synth_group_map.as_ref().unwrap()).collect()
        }
        PoolMode::Merge => {
            let synth = synthetic.as_ref().unwrap();
            real_rows()
                .chain(synth_rows(synth, synth_group_map.as_ref().unwrap()))
                .collect()
        }
        PoolMode::PrivacyDiff => {
            let synth = synthetic.as_ref().unwrap();
            let duplicates = exact_duplicates(&real, synth);
            synth_rows(synth, synth_group_map.as_ref().unwrap())
                .filter(|row| !duplicates[row.index])
                .collect()
        }
        PoolMode::Add => {
            let mut stats = GroupStats::zeros(group_names.len());
            for row in real_rows() {
                stats.add_row(row.group, row.label);
            }
            fixed_stats = Some(stats);
            let synth = synthetic.as_ref().unwrap();
            synth_rows(synth, synth_group_map.as_ref().unwrap()).collect()
        }
    };

    let k = group_names.len();
    let penalty = measure.upper_bound(k) + 1.0;
    Ok(ObjectiveSpec {
        mode,
        measure,
        real,
        synthetic,
        group_names: Arc::new(group_names),
        synth_group_map,
        pool,
        fixed_stats,
        penalty,
        min_selection_fraction: None,
    })
}

/// Check that two datasets share the same encoded feature layout, so their
/// rows can share one pool.
pub fn check_schema(real: &EncodedDataset, synth: &EncodedDataset) -> Result<(), ObjectiveError> {
    if real.d() != synth.d() {
        return Err(ObjectiveError::SchemaMismatch(format!(
            "feature width {} vs {}",
            real.d(),
            synth.d()
        )));
    }
    let a = real.schema().encoded_feature_names();
    let b = synth.schema().encoded_feature_names();
    if a != b {
        return Err(ObjectiveError::SchemaMismatch(
            "encoded feature columns differ".into(),
        ));
    }
    Ok(())
}

/// Flags synthetic rows that exactly equal some real row in every encoded
/// field (features, label, group name).
fn exact_duplicates(real: &EncodedDataset, synth: &EncodedDataset) -> Vec<bool> {
    #[derive(PartialEq, Eq, Hash)]
    struct Key {
        bits: Vec<u64>,
        label: u8,
        group: String,
    }
    let key_of = |ds: &EncodedDataset, i: usize| Key {
        bits: ds.row(i).iter().map(|v| v.to_bits()).collect(),
        label: ds.label(i),
        group: ds.group_name(ds.group(i)).to_string(),
    };
    let mut seen: HashMap<Key, ()> = HashMap::with_capacity(real.n());
    for i in 0..real.n() {
        seen.insert(key_of(real, i), ());
    }
    (0..synth.n())
        .map(|i| seen.contains_key(&key_of(synth, i)))
        .collect()
}

impl ObjectiveSpec {
    /// Pool size: the length every mask must have.
    pub fn pool_size(&self) -> usize {
        self.pool.len()
    }

    pub fn mode(&self) -> PoolMode {
        self.mode
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    /// Size of the shared group dictionary.
    pub fn k(&self) -> usize {
        self.group_names.len()
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    /// The fitness value assigned to degenerate selections (empty view,
    /// empty group, or below the minimum selection fraction). Strictly
    /// exceeds any attainable defined score.
    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn real(&self) -> &Arc<EncodedDataset> {
        &self.real
    }

    pub fn synthetic(&self) -> Option<&Arc<EncodedDataset>> {
        self.synthetic.as_ref()
    }

    /// Provenance of each pool entry, aligned with mask positions.
    pub fn pool_sources(&self) -> impl Iterator<Item = RowSource> + '_ {
        self.pool.iter().map(|r| r.source)
    }

    /// Reject masks selecting fewer than `q * pool_size` rows via the
    /// penalty. Off by default.
    pub fn with_min_selection_fraction(mut self, q: f64) -> Self {
        assert!((0.0..=1.0).contains(&q), "fraction must lie in [0, 1]");
        self.min_selection_fraction = Some(q);
        self
    }

    fn check_len(&self, mask: &Mask) -> Result<(), ObjectiveError> {
        if mask.len() != self.pool.len() {
            return Err(ObjectiveError::LengthMismatch {
                mask: mask.len(),
                pool: self.pool.len(),
            });
        }
        Ok(())
    }

    /// Materialize the rows a mask selects (plus all real rows under `Add`).
    pub fn materialize(&self, mask: &Mask) -> Result<DatasetView, ObjectiveError> {
        self.check_len(mask)?;
        let mut rows: Vec<RowRef> = Vec::with_capacity(mask.popcount());
        if self.mode == PoolMode::Add {
            rows.extend((0..self.real.n()).map(RowRef::real));
        }
        for i in mask.iter_ones() {
            let row = self.pool[i];
            rows.push(RowRef {
                source: row.source,
                index: row.index,
            });
        }
        Ok(match (&self.synthetic, &self.synth_group_map) {
            (Some(synth), Some(map)) => DatasetView::paired(
                Arc::clone(&self.real),
                Arc::clone(synth),
                Arc::clone(map),
                Arc::clone(&self.group_names),
                rows,
            ),
            _ => DatasetView::single(Arc::clone(&self.real), rows),
        })
    }

    /// Group stats of the selection (including the fixed part under `Add`).
    pub fn stats_of(&self, mask: &Mask) -> Result<GroupStats, ObjectiveError> {
        self.check_len(mask)?;
        let mut stats = match &self.fixed_stats {
            Some(fixed) => fixed.clone(),
            None => GroupStats::zeros(self.k()),
        };
        for i in mask.iter_ones() {
            let row = self.pool[i];
            stats.add_row(row.group, row.label);
        }
        Ok(stats)
    }

    /// Score a selection given its group stats, applying the penalty policy.
    pub fn score_stats(&self, stats: &GroupStats) -> f64 {
        let total = stats.total();
        if total == 0 {
            return self.penalty;
        }
        if stats.counts.contains(&0) {
            return self.penalty;
        }
        if let Some(q) = self.min_selection_fraction {
            let selected = total - self.fixed_stats.as_ref().map_or(0, GroupStats::total);
            if (selected as f64) < q * self.pool.len() as f64 {
                return self.penalty;
            }
        }
        match &self.measure {
            Measure::Builtin(kind) => {
                let rates = PositiveRates::from_stats(stats, &self.group_names);
                kind.score(&rates).unwrap_or(self.penalty)
            }
            // Custom measures are black boxes over views; score_stats is
            // only called for them via fitness, which falls back below.
            Measure::Custom { .. } => unreachable!("custom measures are scored on views"),
        }
    }

    /// The objective value f(b). Deterministic; degenerate selections get
    /// the penalty value.
    pub fn fitness(&self, mask: &Mask) -> Result<f64, ObjectiveError> {
        self.check_len(mask)?;
        match &self.measure {
            Measure::Builtin(_) => {
                let stats = self.stats_of(mask)?;
                Ok(self.score_stats(&stats))
            }
            Measure::Custom { func, .. } => {
                let view = self.materialize(mask)?;
                if view.is_empty() {
                    return Ok(self.penalty);
                }
                let stats = crate::dataset::group_stats(&view);
                if stats.counts.contains(&0) {
                    return Ok(self.penalty);
                }
                if let Some(q) = self.min_selection_fraction {
                    let selected = mask.popcount();
                    if (selected as f64) < q * self.pool.len() as f64 {
                        return Ok(self.penalty);
                    }
                }
                Ok(func(&view).unwrap_or(self.penalty))
            }
        }
    }

    /// Stats after toggling one pool bit, given the stats of `mask`.
    ///
    /// `mask` must be the selection `stats` was computed from; the flip
    /// direction is read from its current bit.
    pub fn incremental_stats(
        &self,
        stats: &GroupStats,
        mask: &Mask,
        flip: usize,
    ) -> Result<GroupStats, ObjectiveError> {
        let mut next = stats.clone();
        self.apply_flip(&mut next, mask, flip)?;
        Ok(next)
    }

    /// In-place version of [`incremental_stats`](Self::incremental_stats).
    pub fn apply_flip(
        &self,
        stats: &mut GroupStats,
        mask: &Mask,
        flip: usize,
    ) -> Result<(), ObjectiveError> {
        if flip >= self.pool.len() {
            return Err(ObjectiveError::IndexOutOfRange {
                index: flip,
                pool: self.pool.len(),
            });
        }
        let row = self.pool[flip];
        if mask.get(flip) {
            stats.remove_row(row.group, row.label);
        } else {
            stats.add_row(row.group, row.label);
        }
        Ok(())
    }
}
