//! Synthetic tabular data via a Gaussian copula over the encoded table.
//!
//! Fitting rank-transforms every encoded column (features, label, protected
//! code) to normal scores and estimates their correlation matrix; sampling
//! draws correlated normals, maps them through the standard normal CDF and
//! the per-column empirical inverse CDF (nearest rank), then repairs one-hot
//! blocks so each has a single active indicator. Sampled values are always
//! observed values, so labels and group codes stay valid by construction.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::dataset::{ColumnEncoding, EncodedDataset};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("need at least two rows to fit a copula, got {0}")]
    TooFewRows(usize),
}

/// Per-column marginal: the sorted observed values (empirical CDF support).
#[derive(Debug, Clone)]
struct ColumnMarginal {
    sorted_values: Vec<f64>,
    /// Constant columns are excluded from the correlation model and
    /// reproduced exactly.
    degenerate: bool,
}

/// A fitted Gaussian copula over all encoded columns of a dataset.
#[derive(Debug, Clone)]
pub struct CopulaModel {
    marginals: Vec<ColumnMarginal>,
    /// Correlation over the non-degenerate columns' normal scores,
    /// projected to the nearest positive semidefinite correlation matrix.
    correlation: DMatrix<f64>,
    /// Indices of non-degenerate columns into the full encoded width.
    active: Vec<usize>,
    /// PSD factor A with A * A^T = correlation.
    factor: DMatrix<f64>,
    /// Discrete flags: label, protected code, and one-hot indicators.
    discrete: Vec<bool>,
    template: Arc<EncodedDataset>,
}

impl CopulaModel {
    /// Total encoded width: d feature columns plus label and protected code.
    pub fn width(&self) -> usize {
        self.marginals.len()
    }

    pub fn correlation(&self) -> &DMatrix<f64> {
        &self.correlation
    }

    pub fn is_degenerate(&self, column: usize) -> bool {
        self.marginals[column].degenerate
    }

    pub fn is_discrete(&self, column: usize) -> bool {
        self.discrete[column]
    }
}

/// Value of encoded column `col` for row `i`, with label and protected code
/// appended after the feature columns.
fn encoded_cell(ds: &EncodedDataset, i: usize, col: usize) -> f64 {
    let d = ds.d();
    if col < d {
        ds.row(i)[col]
    } else if col == d {
        ds.label(i) as f64
    } else {
        ds.group(i) as f64
    }
}

fn discrete_flags(ds: &EncodedDataset) -> Vec<bool> {
    let mut flags = Vec::with_capacity(ds.d() + 2);
    for enc in &ds.schema().encodings {
        match enc {
            ColumnEncoding::Numeric { .. } => flags.push(false),
            ColumnEncoding::OneHot { categories, .. } => {
                flags.extend(std::iter::repeat_n(true, categories.len()))
            }
        }
    }
    flags.push(true); // label
    flags.push(true); // protected code
    flags
}

/// Fit a Gaussian copula to an encoded dataset.
pub fn fit(real: &Arc<EncodedDataset>) -> Result<CopulaModel, SynthError> {
    let n = real.n();
    if n < 2 {
        return Err(SynthError::TooFewRows(n));
    }
    let width = real.d() + 2;
    let normal = Normal::standard();

    let mut marginals = Vec::with_capacity(width);
    let mut scores: Vec<Option<Vec<f64>>> = Vec::with_capacity(width);
    for col in 0..width {
        let values: Vec<f64> = (0..n).map(|i| encoded_cell(real, i, col)).collect();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let degenerate = sorted[0] == sorted[n - 1];
        if degenerate {
            scores.push(None);
        } else {
            // Normal scores via average ranks for ties.
            let ranks = average_ranks(&values, &sorted);
            scores.push(Some(
                ranks
                    .iter()
                    .map(|&r| normal.inverse_cdf((r - 0.5) / n as f64))
                    .collect(),
            ));
        }
        marginals.push(ColumnMarginal {
            sorted_values: sorted,
            degenerate,
        });
    }

    let active: Vec<usize> = (0..width).filter(|&c| scores[c].is_some()).collect();
    let m = active.len();
    let mut correlation = DMatrix::identity(m, m);
    for (a, &ca) in active.iter().enumerate() {
        for (b, &cb) in active.iter().enumerate().skip(a + 1) {
            let rho = pearson(scores[ca].as_ref().unwrap(), scores[cb].as_ref().unwrap());
            correlation[(a, b)] = rho;
            correlation[(b, a)] = rho;
        }
    }
    let correlation = nearest_psd_correlation(correlation);
    let factor = psd_factor(&correlation);

    Ok(CopulaModel {
        marginals,
        correlation,
        active,
        factor,
        discrete: discrete_flags(real),
        template: Arc::clone(real),
    })
}

/// Ranks 1..=n with ties receiving their average rank.
fn average_ranks(values: &[f64], sorted: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            let lo = sorted.partition_point(|&s| s < v);
            let hi = sorted.partition_point(|&s| s <= v);
            // average of ranks lo+1 ..= hi
            (lo + 1 + hi) as f64 / 2.0
        })
        .collect()
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - mean_a) * (y - mean_b);
        var_a += (x - mean_a).powi(2);
        var_b += (y - mean_b).powi(2);
    }
    if var_a == 0.0 || var_b == 0.0 {
        0.0
    } else {
        (cov / (var_a.sqrt() * var_b.sqrt())).clamp(-1.0, 1.0)
    }
}

/// Clip negative eigenvalues to zero and rescale the diagonal back to one.
fn nearest_psd_correlation(matrix: DMatrix<f64>) -> DMatrix<f64> {
    let m = matrix.nrows();
    let eigen = nalgebra::SymmetricEigen::new(matrix);
    let clipped = DVector::from_iterator(m, eigen.eigenvalues.iter().map(|&l| l.max(0.0)));
    let mut repaired =
        &eigen.eigenvectors * DMatrix::from_diagonal(&clipped) * eigen.eigenvectors.transpose();
    let scale: Vec<f64> = (0..m).map(|i| repaired[(i, i)].max(1e-15).sqrt()).collect();
    for i in 0..m {
        for j in 0..m {
            repaired[(i, j)] /= scale[i] * scale[j];
        }
        repaired[(i, i)] = 1.0;
    }
    repaired
}

/// Symmetric PSD factor A with A * A^T equal to the matrix.
fn psd_factor(matrix: &DMatrix<f64>) -> DMatrix<f64> {
    let eigen = nalgebra::SymmetricEigen::new(matrix.clone());
    let roots = DVector::from_iterator(
        matrix.nrows(),
        eigen.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()),
    );
    &eigen.eigenvectors * DMatrix::from_diagonal(&roots)
}

/// Nearest-rank empirical inverse CDF: always an observed value.
fn inverse_cdf(sorted: &[f64], u: f64) -> f64 {
    let n = sorted.len();
    let rank = (u * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Draw `m` synthetic rows from the fitted model.
///
/// Deterministic for a given (model, m, seed). Logs a warning when a
/// protected group of the original data does not appear in the sample.
pub fn sample(model: &CopulaModel, m: usize, seed: u64) -> EncodedDataset {
    assert!(m >= 1, "sample count must be >= 1");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let normal = Normal::standard();
    let width = model.width();
    let template = &model.template;
    let d = template.d();
    let active_count = model.active.len();

    let mut features = Vec::with_capacity(m * d);
    let mut labels = Vec::with_capacity(m);
    let mut groups = Vec::with_capacity(m);
    let mut row = vec![0.0f64; width];
    for _ in 0..m {
        // Correlated normals for the active columns.
        let z = DVector::from_iterator(
            active_count,
            (0..active_count).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)),
        );
        let w = &model.factor * z;
        let mut u = vec![0.5f64; width];
        for (slot, &col) in model.active.iter().enumerate() {
            u[col] = normal.cdf(w[slot]);
        }
        for col in 0..width {
            let marginal = &model.marginals[col];
            row[col] = if marginal.degenerate {
                marginal.sorted_values[0]
            } else {
                inverse_cdf(&marginal.sorted_values, u[col])
            };
        }
        repair_one_hot_blocks(template, &mut row, &u);

        features.extend_from_slice(&row[..d]);
        labels.push(row[d] as u8);
        groups.push(row[d + 1] as u32);
    }

    let out = EncodedDataset::from_parts(
        features,
        labels,
        groups,
        template.group_names().to_vec(),
        template.schema().clone(),
    )
    .expect("sampled rows respect the template schema");

    for (g, name) in out.group_names().iter().enumerate() {
        let code = (g + 1) as u32;
        if !out.groups().contains(&code) {
            log::warn!("group `{name}` is absent from the synthetic sample");
        }
    }
    out
}

/// Force exactly one active indicator per one-hot block, keeping the
/// latent-percentile ordering when the sampled block has zero or several.
fn repair_one_hot_blocks(template: &EncodedDataset, row: &mut [f64], u: &[f64]) {
    let mut offset = 0usize;
    for enc in &template.schema().encodings {
        match enc {
            ColumnEncoding::Numeric { .. } => offset += 1,
            ColumnEncoding::OneHot { categories, .. } => {
                let width = categories.len();
                let block = offset..offset + width;
                let ones: Vec<usize> = block.clone().filter(|&c| row[c] == 1.0).collect();
                let hot = match ones.len() {
                    1 => ones[0],
                    _ => {
                        let candidates: Vec<usize> = if ones.is_empty() {
                            block.clone().collect()
                        } else {
                            ones
                        };
                        candidates
                            .into_iter()
                            .max_by(|&a, &b| u[a].total_cmp(&u[b]))
                            .unwrap()
                    }
                };
                for c in block {
                    row[c] = if c == hot { 1.0 } else { 0.0 };
                }
                offset += width;
            }
        }
    }
}

/// Two-sample Kolmogorov-Smirnov statistic between two value samples.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let mut i = 0usize;
    let mut j = 0usize;
    let mut max_gap = 0.0f64;
    while i < sa.len() && j < sb.len() {
        let x = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= x {
            i += 1;
        }
        while j < sb.len() && sb[j] <= x {
            j += 1;
        }
        max_gap = max_gap.max((i as f64 / na - j as f64 / nb).abs());
    }
    max_gap
}

/// Per-encoded-column KS statistics between two schema-compatible datasets,
/// labeled with the encoded column names plus the label and protected roles.
pub fn fidelity_summary(real: &EncodedDataset, synth: &EncodedDataset) -> Vec<(String, f64)> {
    let mut names = real.schema().encoded_feature_names();
    names.push(real.schema().label_column.clone());
    names.push(real.schema().protected_column.clone());
    let width = real.d() + 2;
    (0..width)
        .map(|col| {
            let a: Vec<f64> = (0..real.n()).map(|i| encoded_cell(real, i, col)).collect();
            let b: Vec<f64> = (0..synth.n()).map(|i| encoded_cell(synth, i, col)).collect();
            (names[col].clone(), ks_statistic(&a, &b))
        })
        .collect()
}
