//! Tabular data ingestion and encoding.
//!
//! Raw CSV rows become the numeric triple form (features, label, group):
//! categorical feature columns are one-hot encoded, the protected column is
//! mapped to dense group codes `1..=k` in first-appearance order, the label
//! column is mapped to {0, 1}, and rows with a missing cell are dropped.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("role column `{0}` not found in header")]
    MissingColumn(String),
    #[error("no rows left after cleaning (all rows had missing values)")]
    EmptyAfterCleaning,
    #[error("protected column `{column}` has a single group after cleaning; need k >= 2")]
    SingleGroup { column: String },
    #[error("label column `{column}` has {distinct} distinct values and no positive label value was given")]
    NonBinaryLabel { column: String, distinct: usize },
    #[error("label column `{column}` values {values:?} are not {{0,1}}; pass the positive label value explicitly")]
    AmbiguousLabel { column: String, values: Vec<String> },
    #[error("invalid column roles: {0}")]
    InvalidRoles(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Which columns play which role when loading a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnRoles {
    pub label_column: String,
    pub protected_column: String,
    pub feature_columns: Vec<String>,
    /// Raw label value mapped to y = 1. When `None` and the label column is
    /// already numeric {0, 1}, the value 1 is taken as positive.
    pub positive_label_value: Option<String>,
}

impl ColumnRoles {
    pub fn new(
        label_column: impl Into<String>,
        protected_column: impl Into<String>,
        feature_columns: Vec<String>,
        positive_label_value: Option<String>,
    ) -> Result<Self, DatasetError> {
        let roles = Self {
            label_column: label_column.into(),
            protected_column: protected_column.into(),
            feature_columns,
            positive_label_value,
        };
        roles.validate()?;
        Ok(roles)
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.label_column == self.protected_column {
            return Err(DatasetError::InvalidRoles(
                "label and protected columns must be distinct".into(),
            ));
        }
        if self.feature_columns.is_empty() {
            return Err(DatasetError::InvalidRoles(
                "feature_columns must be non-empty".into(),
            ));
        }
        for f in &self.feature_columns {
            if *f == self.label_column || *f == self.protected_column {
                return Err(DatasetError::InvalidRoles(format!(
                    "column `{f}` cannot be both a feature and a role column"
                )));
            }
        }
        Ok(())
    }
}

/// Options controlling CSV ingestion.
#[derive(Debug, Clone)]
pub struct EncodeOptions {
    /// Cell contents treated as missing; any such cell drops the whole row.
    pub missing_values: Vec<String>,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        Self {
            missing_values: vec![String::new(), "?".into()],
        }
    }
}

/// How one raw feature column maps onto encoded columns.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnEncoding {
    /// Passed through unscaled as a single numeric column.
    Numeric { name: String },
    /// Expanded to one indicator column per category, categories in
    /// first-appearance order.
    OneHot { name: String, categories: Vec<String> },
}

impl ColumnEncoding {
    pub fn name(&self) -> &str {
        match self {
            ColumnEncoding::Numeric { name } => name,
            ColumnEncoding::OneHot { name, .. } => name,
        }
    }

    pub fn width(&self) -> usize {
        match self {
            ColumnEncoding::Numeric { .. } => 1,
            ColumnEncoding::OneHot { categories, .. } => categories.len(),
        }
    }
}

/// Table schema retained so an encoded dataset can be written back out as a
/// raw CSV and reloaded bit-identically with the same roles.
#[derive(Debug, Clone, PartialEq)]
pub struct TableSchema {
    pub label_column: String,
    pub protected_column: String,
    pub encodings: Vec<ColumnEncoding>,
    /// Raw strings for label codes 0 and 1.
    pub label_values: [String; 2],
}

impl TableSchema {
    /// Encoded feature column names, one per matrix column.
    pub fn encoded_feature_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for enc in &self.encodings {
            match enc {
                ColumnEncoding::Numeric { name } => names.push(name.clone()),
                ColumnEncoding::OneHot { name, categories } => {
                    for cat in categories {
                        names.push(format!("{name}={cat}"));
                    }
                }
            }
        }
        names
    }
}

/// Immutable encoded table: n rows of d real-valued features, binary labels,
/// and dense group codes `1..=k`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    features: Vec<f64>, // row-major, n * d
    labels: Vec<u8>,
    groups: Vec<u32>,
    group_names: Vec<String>,
    schema: TableSchema,
    n: usize,
    d: usize,
}

impl EncodedDataset {
    /// Build from already-encoded parts, checking the type invariants.
    pub fn from_parts(
        features: Vec<f64>,
        labels: Vec<u8>,
        groups: Vec<u32>,
        group_names: Vec<String>,
        schema: TableSchema,
    ) -> Result<Self, DatasetError> {
        let n = labels.len();
        let k = group_names.len();
        if k < 2 {
            return Err(DatasetError::SingleGroup {
                column: schema.protected_column.clone(),
            });
        }
        let d = schema.encodings.iter().map(|e| e.width()).sum::<usize>();
        assert_eq!(features.len(), n * d, "feature matrix shape mismatch");
        assert_eq!(groups.len(), n, "group vector length mismatch");
        assert!(labels.iter().all(|&y| y <= 1), "labels must be 0 or 1");
        assert!(
            groups.iter().all(|&g| g >= 1 && g as usize <= k),
            "group codes must lie in 1..=k"
        );
        Ok(Self {
            features,
            labels,
            groups,
            group_names,
            schema,
            n,
            d,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.group_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    /// Group code in `1..=k`.
    pub fn group(&self, i: usize) -> u32 {
        self.groups[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn groups(&self) -> &[u32] {
        &self.groups
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    pub fn group_name(&self, code: u32) -> &str {
        &self.group_names[(code - 1) as usize]
    }

    pub fn schema(&self) -> &TableSchema {
        &self.schema
    }

    /// View over every row of this dataset.
    pub fn full_view(self: &Arc<Self>) -> DatasetView {
        let rows = (0..self.n).map(RowRef::real).collect();
        DatasetView::single(Arc::clone(self), rows)
    }

    /// View over the given row indices (deduplicated and sorted).
    pub fn view_of(self: &Arc<Self>, indices: &[usize]) -> DatasetView {
        let mut idx: Vec<usize> = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        let rows = idx
            .into_iter()
            .inspect(|&i| assert!(i < self.n, "row index out of range"))
            .map(RowRef::real)
            .collect();
        DatasetView::single(Arc::clone(self), rows)
    }
}

/// Where a view row comes from when the view spans a real/synthetic pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RowSource {
    Real,
    Synthetic,
}

/// Reference to one row of a view's source datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct RowRef {
    pub source: RowSource,
    pub index: usize,
}

impl RowRef {
    pub fn real(index: usize) -> Self {
        Self {
            source: RowSource::Real,
            index,
        }
    }

    pub fn synthetic(index: usize) -> Self {
        Self {
            source: RowSource::Synthetic,
            index,
        }
    }
}

/// A selection of rows over one or two encoded datasets, without copying.
///
/// When the view spans a synthetic dataset, group codes are reported against
/// a shared group dictionary and synthetic codes are remapped accordingly.
#[derive(Debug, Clone)]
pub struct DatasetView {
    real: Arc<EncodedDataset>,
    synthetic: Option<Arc<EncodedDataset>>,
    /// Synthetic group code (1-based) -> shared dictionary code (1-based).
    synth_group_map: Option<Arc<Vec<u32>>>,
    group_names: Arc<Vec<String>>,
    rows: Vec<RowRef>, // unique, sorted
}

impl DatasetView {
    pub(crate) fn single(real: Arc<EncodedDataset>, rows: Vec<RowRef>) -> Self {
        let group_names = Arc::new(real.group_names.clone());
        debug_assert!(rows.windows(2).all(|w| w[0] < w[1]));
        Self {
            real,
            synthetic: None,
            synth_group_map: None,
            group_names,
            rows,
        }
    }

    pub(crate) fn paired(
        real: Arc<EncodedDataset>,
        synthetic: Arc<EncodedDataset>,
        synth_group_map: Arc<Vec<u32>>,
        group_names: Arc<Vec<String>>,
        rows: Vec<RowRef>,
    ) -> Self {
        debug_assert!(rows.windows(2).all(|w| w[0] < w[1]));
        Self {
            real,
            synthetic: Some(synthetic),
            synth_group_map: Some(synth_group_map),
            group_names,
            rows,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Size of the shared group dictionary this view reports against.
    pub fn k(&self) -> usize {
        self.group_names.len()
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    pub fn rows(&self) -> &[RowRef] {
        &self.rows
    }

    fn source(&self, r: RowRef) -> &EncodedDataset {
        match r.source {
            RowSource::Real => &self.real,
            RowSource::Synthetic => self
                .synthetic
                .as_ref()
                .expect("synthetic row in a single-source view"),
        }
    }

    pub fn features(&self, i: usize) -> &[f64] {
        let r = self.rows[i];
        self.source(r).row(r.index)
    }

    pub fn label(&self, i: usize) -> u8 {
        let r = self.rows[i];
        self.source(r).label(r.index)
    }

    /// Group code of view row `i` under the shared dictionary.
    pub fn group(&self, i: usize) -> u32 {
        let r = self.rows[i];
        let raw = self.source(r).group(r.index);
        match (r.source, &self.synth_group_map) {
            (RowSource::Synthetic, Some(map)) => map[(raw - 1) as usize],
            _ => raw,
        }
    }

    pub fn schema(&self) -> &TableSchema {
        &self.real.schema
    }
}

/// Per-group sufficient statistics: how many rows and how many positives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupStats {
    pub counts: Vec<usize>,
    pub positives: Vec<usize>,
}

impl GroupStats {
    pub fn zeros(k: usize) -> Self {
        Self {
            counts: vec![0; k],
            positives: vec![0; k],
        }
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn add_row(&mut self, group: u32, label: u8) {
        let g = (group - 1) as usize;
        self.counts[g] += 1;
        self.positives[g] += label as usize;
    }

    pub fn remove_row(&mut self, group: u32, label: u8) {
        let g = (group - 1) as usize;
        self.counts[g] -= 1;
        self.positives[g] -= label as usize;
    }
}

/// Count rows and positive labels per group over a view.
pub fn group_stats(view: &DatasetView) -> GroupStats {
    let mut stats = GroupStats::zeros(view.k());
    for i in 0..view.len() {
        stats.add_row(view.group(i), view.label(i));
    }
    stats
}

/// Load a CSV file and encode it per the column roles.
pub fn load_csv(
    path: impl AsRef<Path>,
    roles: &ColumnRoles,
    options: &EncodeOptions,
) -> Result<EncodedDataset, DatasetError> {
    roles.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let col_index = |name: &str| -> Result<usize, DatasetError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
    };

    let label_idx = col_index(&roles.label_column)?;
    let protected_idx = col_index(&roles.protected_column)?;
    let feature_idx: Vec<usize> = roles
        .feature_columns
        .iter()
        .map(|c| col_index(c))
        .collect::<Result<_, _>>()?;

    let is_missing = |cell: &str| options.missing_values.iter().any(|m| m == cell);

    // First pass: keep complete rows as raw strings.
    let mut raw_rows: Vec<(Vec<String>, String, String)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let cells: Vec<&str> = feature_idx
            .iter()
            .map(|&i| record.get(i).unwrap_or(""))
            .collect();
        let label_cell = record.get(label_idx).unwrap_or("");
        let protected_cell = record.get(protected_idx).unwrap_or("");
        if cells.iter().any(|c| is_missing(c))
            || is_missing(label_cell)
            || is_missing(protected_cell)
        {
            continue;
        }
        raw_rows.push((
            cells.into_iter().map(str::to_string).collect(),
            label_cell.to_string(),
            protected_cell.to_string(),
        ));
    }
    if raw_rows.is_empty() {
        return Err(DatasetError::EmptyAfterCleaning);
    }

    encode_rows(raw_rows, roles)
}

fn encode_rows(
    raw_rows: Vec<(Vec<String>, String, String)>,
    roles: &ColumnRoles,
) -> Result<EncodedDataset, DatasetError> {
    let n = raw_rows.len();
    let n_raw_features = roles.feature_columns.len();

    // Decide numeric vs categorical per raw feature column.
    let mut parsed: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(n); n_raw_features];
    for (cells, _, _) in &raw_rows {
        for (j, cell) in cells.iter().enumerate() {
            parsed[j].push(cell.trim().parse::<f64>().ok().filter(|v| v.is_finite()));
        }
    }
    let mut encodings = Vec::with_capacity(n_raw_features);
    for (j, name) in roles.feature_columns.iter().enumerate() {
        if parsed[j].iter().all(|v| v.is_some()) {
            encodings.push(ColumnEncoding::Numeric { name: name.clone() });
        } else {
            let mut categories: Vec<String> = Vec::new();
            for (cells, _, _) in &raw_rows {
                let cell = &cells[j];
                if !categories.contains(cell) {
                    categories.push(cell.clone());
                }
            }
            encodings.push(ColumnEncoding::OneHot {
                name: name.clone(),
                categories,
            });
        }
    }

    // Label mapping.
    let mut distinct_labels: Vec<String> = Vec::new();
    for (_, label, _) in &raw_rows {
        if !distinct_labels.contains(label) {
            distinct_labels.push(label.clone());
        }
    }
    let positive = resolve_positive_label(roles, &distinct_labels)?;
    let negative = distinct_labels
        .iter()
        .find(|v| **v != positive)
        .cloned()
        .unwrap_or_else(|| "0".to_string());

    // Protected mapping: dense codes in first-appearance order.
    let mut group_names: Vec<String> = Vec::new();
    let mut group_codes: HashMap<String, u32> = HashMap::new();
    for (_, _, prot) in &raw_rows {
        if !group_codes.contains_key(prot) {
            group_names.push(prot.clone());
            group_codes.insert(prot.clone(), group_names.len() as u32);
        }
    }
    if group_names.len() < 2 {
        return Err(DatasetError::SingleGroup {
            column: roles.protected_column.clone(),
        });
    }

    let d: usize = encodings.iter().map(|e| e.width()).sum();
    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    for (i, (cells, label, prot)) in raw_rows.iter().enumerate() {
        for (j, enc) in encodings.iter().enumerate() {
            match enc {
                ColumnEncoding::Numeric { .. } => {
                    features.push(parsed[j][i].expect("numeric column had unparsable cell"));
                }
                ColumnEncoding::OneHot { categories, .. } => {
                    for cat in categories {
                        features.push(if cat == &cells[j] { 1.0 } else { 0.0 });
                    }
                }
            }
        }
        labels.push(u8::from(*label == positive));
        groups.push(group_codes[prot]);
    }

    let schema = TableSchema {
        label_column: roles.label_column.clone(),
        protected_column: roles.protected_column.clone(),
        encodings,
        label_values: [negative, positive],
    };
    EncodedDataset::from_parts(features, labels, groups, group_names, schema)
}

fn resolve_positive_label(
    roles: &ColumnRoles,
    distinct: &[String],
) -> Result<String, DatasetError> {
    if let Some(pos) = &roles.positive_label_value {
        return Ok(pos.clone());
    }
    // Numeric {0, 1} labels default to 1 as positive.
    let as_numbers: Option<Vec<f64>> = distinct
        .iter()
        .map(|v| v.trim().parse::<f64>().ok())
        .collect();
    if let Some(nums) = as_numbers {
        if nums.iter().all(|&v| v == 0.0 || v == 1.0) {
            return Ok(distinct
                .iter()
                .zip(&nums)
                .find(|(_, &v)| v == 1.0)
                .map(|(s, _)| s.clone())
                .unwrap_or_else(|| "1".to_string()));
        }
    }
    if distinct.len() > 2 {
        return Err(DatasetError::NonBinaryLabel {
            column: roles.label_column.clone(),
            distinct: distinct.len(),
        });
    }
    Err(DatasetError::AmbiguousLabel {
        column: roles.label_column.clone(),
        values: distinct.to_vec(),
    })
}

/// CSV export options.
#[derive(Debug, Clone, Default)]
pub struct WriteOptions {
    /// Append a `provenance` column with `real`/`synthetic` per row.
    pub provenance: bool,
}

/// Write the materialized view rows back to a raw CSV: original column
/// names, decoded categories, decoded group names, decoded labels.
pub fn write_csv(view: &DatasetView, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    write_csv_with(view, path, &WriteOptions::default())
}

pub fn write_csv_with(
    view: &DatasetView,
    path: impl AsRef<Path>,
    options: &WriteOptions,
) -> Result<(), DatasetError> {
    let schema = view.schema();
    let mut writer = csv::Writer::from_path(path.as_ref())?;

    let mut header: Vec<String> = schema
        .encodings
        .iter()
        .map(|e| e.name().to_string())
        .collect();
    header.push(schema.label_column.clone());
    header.push(schema.protected_column.clone());
    if options.provenance {
        header.push("provenance".to_string());
    }
    writer.write_record(&header)?;

    let mut cell = String::new();
    for i in 0..view.len() {
        let feats = view.features(i);
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        let mut offset = 0usize;
        for enc in &schema.encodings {
            match enc {
                ColumnEncoding::Numeric { .. } => {
                    cell.clear();
                    // Shortest round-trip formatting, so reload is exact.
                    write!(cell, "{}", feats[offset]).unwrap();
                    record.push(cell.clone());
                    offset += 1;
                }
                ColumnEncoding::OneHot { categories, .. } => {
                    let block = &feats[offset..offset + categories.len()];
                    let hot = block
                        .iter()
                        .position(|&v| v == 1.0)
                        .expect("one-hot block without an active indicator");
                    record.push(categories[hot].clone());
                    offset += categories.len();
                }
            }
        }
        record.push(schema.label_values[view.label(i) as usize].clone());
        record.push(view.group_names()[(view.group(i) - 1) as usize].clone());
        if options.provenance {
            record.push(match view.rows()[i].source {
                RowSource::Real => "real".to_string(),
                RowSource::Synthetic => "synthetic".to_string(),
            });
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
