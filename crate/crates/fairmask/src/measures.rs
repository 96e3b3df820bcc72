//! Discrimination measures over a dataset view.
//!
//! Each measure is a black-box score: lower means fairer, 0 means the
//! per-group positive rates are all equal. Non-binary protected attributes
//! are handled by comparing all k(k-1)/2 group pairs.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::dataset::{group_stats, DatasetView, GroupStats};

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    /// A group of the view's dictionary has no rows, so its positive rate
    /// is undefined. Resolved by the objective's penalty policy.
    #[error("group `{group}` is empty in the view; its positive rate is undefined")]
    UndefinedRate { group: String },
    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),
}

/// The built-in statistical-parity disparity measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    SdpSum,
    SdpAvg,
    SdpMax,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 3] = [MeasureKind::SdpSum, MeasureKind::SdpAvg, MeasureKind::SdpMax];

    pub fn name(&self) -> &'static str {
        match self {
            MeasureKind::SdpSum => "sdp_sum",
            MeasureKind::SdpAvg => "sdp_avg",
            MeasureKind::SdpMax => "sdp_max",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, MeasureError> {
        match name {
            "sdp_sum" => Ok(MeasureKind::SdpSum),
            "sdp_avg" => Ok(MeasureKind::SdpAvg),
            "sdp_max" => Ok(MeasureKind::SdpMax),
            other => Err(MeasureError::UnknownMeasure(other.to_string())),
        }
    }

    /// Largest score any view can attain: k(k-1)/2 pair terms of at most 1
    /// for the sum, 1 for the average and the maximum.
    pub fn upper_bound(&self, k: usize) -> f64 {
        match self {
            MeasureKind::SdpSum => (k * (k - 1) / 2) as f64,
            MeasureKind::SdpAvg | MeasureKind::SdpMax => 1.0,
        }
    }

    pub fn score(&self, rates: &PositiveRates) -> Result<f64, MeasureError> {
        match self {
            MeasureKind::SdpSum => sdp_sum(rates),
            MeasureKind::SdpAvg => sdp_avg(rates),
            MeasureKind::SdpMax => sdp_max(rates),
        }
    }
}

impl std::fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Empirical P(y=1 | z=g) per group, with `None` marking an empty group.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveRates {
    pub rates: Vec<Option<f64>>,
    pub counts: Vec<usize>,
    group_names: Vec<String>,
}

impl PositiveRates {
    pub fn from_stats(stats: &GroupStats, group_names: &[String]) -> Self {
        let rates = stats
            .counts
            .iter()
            .zip(&stats.positives)
            .map(|(&c, &p)| (c > 0).then(|| p as f64 / c as f64))
            .collect();
        Self {
            rates,
            counts: stats.counts.clone(),
            group_names: group_names.to_vec(),
        }
    }

    pub fn from_rates(rates: Vec<f64>) -> Self {
        let counts = vec![1; rates.len()];
        let group_names = (1..=rates.len()).map(|g| format!("g{g}")).collect();
        Self {
            rates: rates.into_iter().map(Some).collect(),
            counts,
            group_names,
        }
    }

    pub fn k(&self) -> usize {
        self.rates.len()
    }

    /// All k rates, or the first empty group's error.
    fn defined(&self) -> Result<Vec<f64>, MeasureError> {
        self.rates
            .iter()
            .enumerate()
            .map(|(g, r)| {
                r.ok_or_else(|| MeasureError::UndefinedRate {
                    group: self
                        .group_names
                        .get(g)
                        .cloned()
                        .unwrap_or_else(|| format!("g{}", g + 1)),
                })
            })
            .collect()
    }
}

/// Empirical positive rate per group over the view.
pub fn positive_rates(view: &DatasetView) -> PositiveRates {
    PositiveRates::from_stats(&group_stats(view), view.group_names())
}

/// Sum of absolute pairwise rate differences over all k(k-1)/2 pairs.
pub fn sdp_sum(rates: &PositiveRates) -> Result<f64, MeasureError> {
    let r = rates.defined()?;
    let mut total = 0.0;
    for i in 0..r.len() {
        for j in (i + 1)..r.len() {
            total += (r[i] - r[j]).abs();
        }
    }
    Ok(total)
}

/// Average absolute pairwise rate difference; always in [0, 1].
pub fn sdp_avg(rates: &PositiveRates) -> Result<f64, MeasureError> {
    let k = rates.k();
    let pairs = (k * (k - 1) / 2) as f64;
    Ok(sdp_sum(rates)? / pairs)
}

/// Maximum absolute pairwise rate difference: max(rates) - min(rates).
pub fn sdp_max(rates: &PositiveRates) -> Result<f64, MeasureError> {
    let r = rates.defined()?;
    let max = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = r.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

/// Score a view with a built-in measure.
pub fn evaluate(kind: MeasureKind, view: &DatasetView) -> Result<f64, MeasureError> {
    kind.score(&positive_rates(view))
}

/// A user-registered black-box measure: any function from a view to a
/// non-negative score.
pub type MeasureFn = dyn Fn(&DatasetView) -> Result<f64, MeasureError> + Send + Sync;

/// A discrimination measure as the objective consumes it: one of the
/// built-ins (scored from group statistics on the hot path) or a custom
/// black box evaluated on the materialized view.
#[derive(Clone)]
pub enum Measure {
    Builtin(MeasureKind),
    Custom {
        name: String,
        func: Arc<MeasureFn>,
        /// Largest attainable score; the penalty policy adds 1 to this.
        upper_bound: f64,
    },
}

impl Measure {
    pub fn name(&self) -> &str {
        match self {
            Measure::Builtin(kind) => kind.name(),
            Measure::Custom { name, .. } => name,
        }
    }

    pub fn upper_bound(&self, k: usize) -> f64 {
        match self {
            Measure::Builtin(kind) => kind.upper_bound(k),
            Measure::Custom { upper_bound, .. } => *upper_bound,
        }
    }
}

impl std::fmt::Debug for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Measure::Builtin(kind) => write!(f, "Measure::Builtin({kind})"),
            Measure::Custom { name, .. } => write!(f, "Measure::Custom({name})"),
        }
    }
}

impl From<MeasureKind> for Measure {
    fn from(kind: MeasureKind) -> Self {
        Measure::Builtin(kind)
    }
}

/// Name-to-measure registry, pre-populated with the built-ins.
#[derive(Default)]
pub struct MeasureRegistry {
    custom: HashMap<String, Measure>,
}

impl MeasureRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(
        &mut self,
        name: impl Into<String>,
        upper_bound: f64,
        func: impl Fn(&DatasetView) -> Result<f64, MeasureError> + Send + Sync + 'static,
    ) {
        let name = name.into();
        self.custom.insert(
            name.clone(),
            Measure::Custom {
                name,
                func: Arc::new(func),
                upper_bound,
            },
        );
    }

    pub fn resolve(&self, name: &str) -> Result<Measure, MeasureError> {
        if let Some(m) = self.custom.get(name) {
            return Ok(m.clone());
        }
        MeasureKind::from_name(name).map(Measure::Builtin)
    }
}
