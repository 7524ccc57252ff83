//! Kernel SVM trained by sequential minimal optimization, with stratified
//! k-fold cross validation.
//!
//! The solver is Platt-style SMO: the first multiplier comes from scanning
//! KKT violations, the second from the max `|E1 - E2|` heuristic with
//! fallback scans that start at a seeded random position, so a run is fully
//! determined by its seed. Ties everywhere break by index.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureMatrix, FeatureSelector};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("training set must contain both classes")]
    SingleClass,
    #[error("labels must be -1 or +1, got {0}")]
    BadLabel(f64),
    #[error("training rows are empty or ragged")]
    BadTrainingData,
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("input has {got} features, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("class {label} has {count} rows, fewer than {folds} folds")]
    ClassSmallerThanFolds {
        label: String,
        count: usize,
        folds: usize,
    },
    #[error("confusion counts are all zero")]
    EmptyConfusion,
    #[error("feature selection matched no columns")]
    EmptySelection,
}

/// Per-column standardization learned from training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    /// Column means and population standard deviations; constant columns
    /// get scale 1 so they map to zero.
    pub fn fit(rows: &[Vec<f64>]) -> Standardizer {
        let n = rows.len() as f64;
        let d = rows.first().map_or(0, Vec::len);
        let mut means = vec![0.0; d];
        for row in rows {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut scales = vec![0.0; d];
        for row in rows {
            for ((s, m), v) in scales.iter_mut().zip(&means).zip(row) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut scales {
            *s = (*s / n).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        Standardizer { means, scales }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.means)
            .zip(&self.scales)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}

/// Kernel request; `Rbf { gamma: None }` resolves against the training rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: Option<f64> },
}

/// Kernel with all parameters fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

/// `gamma = 1 / (d * mean per-feature variance)` of the given rows,
/// falling back to `1 / d` for constant data.
pub fn auto_gamma(rows: &[Vec<f64>]) -> f64 {
    let d = rows.first().map_or(1, Vec::len).max(1);
    let n = rows.len() as f64;
    let mut mean_var = 0.0;
    for col in 0..d {
        let mean: f64 = rows.iter().map(|r| r[col]).sum::<f64>() / n;
        let var: f64 = rows.iter().map(|r| (r[col] - mean).powi(2)).sum::<f64>() / n;
        mean_var += var / d as f64;
    }
    if mean_var > 0.0 {
        1.0 / (d as f64 * mean_var)
    } else {
        1.0 / d as f64
    }
}

impl KernelSpec {
    pub fn resolve(&self, rows: &[Vec<f64>]) -> Kernel {
        match *self {
            KernelSpec::Linear => Kernel::Linear,
            KernelSpec::Rbf { gamma: Some(g) } => Kernel::Rbf { gamma: g },
            KernelSpec::Rbf { gamma: None } => Kernel::Rbf {
                gamma: auto_gamma(rows),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub kernel: KernelSpec,
    pub c: f64,
    /// KKT violation tolerance.
    pub tol: f64,
    /// Cap on full passes of the outer SMO loop.
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> SvmParams {
        SvmParams {
            kernel: KernelSpec::Rbf { gamma: None },
            c: 1.0,
            tol: 1e-3,
            max_epochs: 1000,
            seed: 0,
        }
    }
}

/// A trained model: support vectors with their duals, the bias, and the
/// standardization (if any) learned from the training fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    pub bias: f64,
    pub support_alphas: Vec<f64>,
    pub support_labels: Vec<f64>,
    pub support_rows: Vec<Vec<f64>>,
    pub standardizer: Option<Standardizer>,
    pub converged: bool,
    pub dual_objective: f64,
    /// Signed sum of all duals at convergence; bounded by 1e-6 in tests.
    pub alpha_label_balance: f64,
}

impl SvmModel {
    pub fn dimension(&self) -> usize {
        self.support_rows.first().map_or(0, Vec::len)
    }

    /// Kernel expansion plus bias, after applying the stored standardizer.
    pub fn decision_function(&self, row: &[f64]) -> Result<f64, ClassifyError> {
        let expected = self
            .standardizer
            .as_ref()
            .map_or(self.dimension(), |s| s.means.len());
        if row.len() != expected {
            return Err(ClassifyError::DimensionMismatch {
                expected,
                got: row.len(),
            });
        }
        let row = match &self.standardizer {
            Some(s) => s.transform_row(row),
            None => row.to_vec(),
        };
        let mut f = self.bias;
        for ((alpha, y), sv) in self
            .support_alphas
            .iter()
            .zip(&self.support_labels)
            .zip(&self.support_rows)
        {
            f += alpha * y * self.kernel.eval(sv, &row);
        }
        Ok(f)
    }

    /// Predicted label in {-1, +1}; an exact zero maps to +1.
    pub fn predict(&self, row: &[f64]) -> Result<f64, ClassifyError> {
        let f = self.decision_function(row)?;
        Ok(if f < 0.0 { -1.0 } else { 1.0 })
    }
}

struct Smo<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    kernel: Kernel,
    c: f64,
    tol: f64,
    alphas: Vec<f64>,
    errors: Vec<f64>,
    bias: f64,
    rng: ChaCha8Rng,
}

// Threshold below which an alpha update is treated as no progress.
const ALPHA_EPS: f64 = 1e-12;

impl<'a> Smo<'a> {
    fn new(x: &'a [Vec<f64>], y: &'a [f64], kernel: Kernel, c: f64, tol: f64, seed: u64) -> Smo<'a> {
        Smo {
            x,
            y,
            kernel,
            c,
            tol,
            alphas: vec![0.0; x.len()],
            // f(x) = 0 initially, so E_i = -y_i.
            errors: y.iter().map(|&v| -v).collect(),
            bias: 0.0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn kernel_ij(&self, i: usize, j: usize) -> f64 {
        self.kernel.eval(&self.x[i], &self.x[j])
    }

    fn is_free(&self, i: usize) -> bool {
        self.alphas[i] > 0.0 && self.alphas[i] < self.c
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (a1, a2) = (self.alphas[i1], self.alphas[i2]);
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (e1, e2) = (self.errors[i1], self.errors[i2]);
        let s = y1 * y2;
        let (low, high) = if s < 0.0 {
            ((a2 - a1).max(0.0), (self.c + a2 - a1).min(self.c))
        } else {
            ((a1 + a2 - self.c).max(0.0), (a1 + a2).min(self.c))
        };
        if low >= high {
            return false;
        }
        let k11 = self.kernel_ij(i1, i1);
        let k12 = self.kernel_ij(i1, i2);
        let k22 = self.kernel_ij(i2, i2);
        let eta = k11 + k22 - 2.0 * k12;
        let a2_new = if eta > 0.0 {
            (a2 + y2 * (e1 - e2) / eta).clamp(low, high)
        } else {
            // Degenerate curvature: evaluate the objective at both ends.
            let f1 = y1 * (e1 + self.bias) - a1 * k11 - s * a2 * k12;
            let f2 = y2 * (e2 + self.bias) - s * a1 * k12 - a2 * k22;
            let l1 = a1 + s * (a2 - low);
            let h1 = a1 + s * (a2 - high);
            let obj_low =
                l1 * f1 + low * f2 + 0.5 * l1 * l1 * k11 + 0.5 * low * low * k22 + s * low * l1 * k12;
            let obj_high = h1 * f1
                + high * f2
                + 0.5 * h1 * h1 * k11
                + 0.5 * high * high * k22
                + s * high * h1 * k12;
            if obj_low < obj_high - ALPHA_EPS {
                low
            } else if obj_high < obj_low - ALPHA_EPS {
                high
            } else {
                a2
            }
        };
        if (a2_new - a2).abs() < ALPHA_EPS * (a2_new + a2 + ALPHA_EPS) {
            return false;
        }
        let a1_new = a1 + s * (a2 - a2_new);

        let b1 = e1 + y1 * (a1_new - a1) * k11 + y2 * (a2_new - a2) * k12 + self.bias;
        let b2 = e2 + y1 * (a1_new - a1) * k12 + y2 * (a2_new - a2) * k22 + self.bias;
        let new_bias = if a1_new > 0.0 && a1_new < self.c {
            b1
        } else if a2_new > 0.0 && a2_new < self.c {
            b2
        } else {
            (b1 + b2) / 2.0
        };

        let d1 = y1 * (a1_new - a1);
        let d2 = y2 * (a2_new - a2);
        for i in 0..self.x.len() {
            self.errors[i] += d1 * self.kernel_ij(i1, i) + d2 * self.kernel_ij(i2, i)
                - (new_bias - self.bias);
        }
        self.alphas[i1] = a1_new;
        self.alphas[i2] = a2_new;
        self.bias = new_bias;
        // Free multipliers sit exactly on the margin.
        self.errors[i1] = if self.is_free(i1) { 0.0 } else { self.errors[i1] };
        self.errors[i2] = if self.is_free(i2) { 0.0 } else { self.errors[i2] };
        true
    }

    fn examine(&mut self, i2: usize) -> bool {
        let y2 = self.y[i2];
        let a2 = self.alphas[i2];
        let e2 = self.errors[i2];
        let r2 = e2 * y2;
        if !((r2 < -self.tol && a2 < self.c) || (r2 > self.tol && a2 > 0.0)) {
            return false;
        }
        // Second-choice heuristic: maximize |E1 - E2| over free multipliers.
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.x.len() {
            if self.is_free(i) {
                let gap = (self.errors[i] - e2).abs();
                if best.is_none_or(|(_, g)| gap > g) {
                    best = Some((i, gap));
                }
            }
        }
        if let Some((i1, _)) = best {
            if self.take_step(i1, i2) {
                return true;
            }
        }
        // Fallback: free multipliers, then everything, from a random start.
        let n = self.x.len();
        let start = self.rng.random_range(0..n);
        for offset in 0..n {
            let i1 = (start + offset) % n;
            if self.is_free(i1) && self.take_step(i1, i2) {
                return true;
            }
        }
        let start = self.rng.random_range(0..n);
        for offset in 0..n {
            let i1 = (start + offset) % n;
            if self.take_step(i1, i2) {
                return true;
            }
        }
        false
    }

    fn dual_objective(&self) -> f64 {
        let mut obj: f64 = self.alphas.iter().sum();
        for i in 0..self.x.len() {
            if self.alphas[i] == 0.0 {
                continue;
            }
            for j in 0..self.x.len() {
                if self.alphas[j] == 0.0 {
                    continue;
                }
                obj -= 0.5
                    * self.alphas[i]
                    * self.alphas[j]
                    * self.y[i]
                    * self.y[j]
                    * self.kernel_ij(i, j);
            }
        }
        obj
    }
}

/// Trains on pre-scaled rows; standardize separately (cross validation
/// fits a [`Standardizer`] on each training fold).
pub fn train_svm(
    x: &[Vec<f64>],
    y: &[f64],
    params: &SvmParams,
) -> Result<SvmModel, ClassifyError> {
    if x.is_empty() || x.iter().any(|r| r.len() != x[0].len()) || x[0].is_empty() {
        return Err(ClassifyError::BadTrainingData);
    }
    for (row, r) in x.iter().enumerate() {
        for (col, v) in r.iter().enumerate() {
            if !v.is_finite() {
                return Err(ClassifyError::NonFinite { row, col });
            }
        }
    }
    for &label in y {
        if label != 1.0 && label != -1.0 {
            return Err(ClassifyError::BadLabel(label));
        }
    }
    if !y.contains(&1.0) || !y.contains(&-1.0) {
        return Err(ClassifyError::SingleClass);
    }

    let kernel = params.kernel.resolve(x);
    let mut smo = Smo::new(x, y, kernel, params.c, params.tol, params.seed);

    let mut epochs = 0;
    let mut examine_all = true;
    let mut converged = false;
    while epochs < params.max_epochs {
        epochs += 1;
        let mut changed = 0;
        for i in 0..x.len() {
            if (examine_all || smo.is_free(i)) && smo.examine(i) {
                changed += 1;
            }
        }
        if examine_all {
            if changed == 0 {
                converged = true;
                break;
            }
            examine_all = false;
        } else if changed == 0 {
            examine_all = true;
        }
    }

    let dual_objective = smo.dual_objective();
    let alpha_label_balance: f64 = smo.alphas.iter().zip(y).map(|(a, l)| a * l).sum();
    let mut support_alphas = Vec::new();
    let mut support_labels = Vec::new();
    let mut support_rows = Vec::new();
    for (i, &alpha) in smo.alphas.iter().enumerate() {
        if alpha > 0.0 {
            support_alphas.push(alpha);
            support_labels.push(y[i]);
            support_rows.push(x[i].clone());
        }
    }
    // Platt keeps the threshold on the other side of the expansion.
    let bias = -smo.bias;
    Ok(SvmModel {
        kernel,
        c: params.c,
        bias,
        support_alphas,
        support_labels,
        support_rows,
        standardizer: None,
        converged,
        dual_objective,
        alpha_label_balance,
    })
}

/// Accuracy, precision, recall, and F1 from a confusion matrix. Zero
/// denominators yield 0 by convention.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn metrics(tp: usize, fp: usize, fn_: usize, tn: usize) -> Result<Metrics, ClassifyError> {
    let total = tp + fp + fn_ + tn;
    if total == 0 {
        return Err(ClassifyError::EmptyConfusion);
    }
    let accuracy = (tp + tn) as f64 / total as f64;
    let precision = if tp + fp > 0 {
        tp as f64 / (tp + fp) as f64
    } else {
        0.0
    };
    let recall = if tp + fn_ > 0 {
        tp as f64 / (tp + fn_) as f64
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(Metrics {
        accuracy,
        precision,
        recall,
        f1,
    })
}

/// Seeded stratified fold assignment: each class is shuffled and dealt
/// round-robin, so per-fold class counts differ by at most one.
pub fn stratified_folds(labels: &[f64], folds: usize, seed: u64) -> Result<Vec<usize>, ClassifyError> {
    if folds < 2 {
        return Err(ClassifyError::TooFewFolds(folds));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0usize; labels.len()];
    for class in [1.0, -1.0] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < folds {
            return Err(ClassifyError::ClassSmallerThanFolds {
                label: format!("{class:+}"),
                count: members.len(),
                folds,
            });
        }
        use rand::seq::SliceRandom;
        members.shuffle(&mut rng);
        for (pos, &row) in members.iter().enumerate() {
            assignment[row] = pos % folds;
        }
    }
    Ok(assignment)
}

/// How cross-fold metrics are aggregated into the headline numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricAggregation {
    /// Unweighted mean of per-fold metrics.
    FoldMean,
    /// Metrics of the confusion matrix summed over folds.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub fold: usize,
    pub metrics: Metrics,
    pub converged: bool,
}

/// Cross-validation result for one feature set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub feature_set: String,
    pub folds: Vec<FoldOutcome>,
    /// Unweighted mean over folds.
    pub mean: Metrics,
    /// Metrics of the pooled confusion matrix.
    pub pooled: Metrics,
    pub fold_of_row: Vec<usize>,
    pub all_converged: bool,
}

impl ClassificationReport {
    pub fn headline(&self, aggregation: MetricAggregation) -> Metrics {
        match aggregation {
            MetricAggregation::FoldMean => self.mean,
            MetricAggregation::Pooled => self.pooled,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvParams {
    pub folds: usize,
    pub seed: u64,
    pub svm: SvmParams,
}

/// Stratified k-fold cross validation of the selected feature columns.
/// Persistent users are the positive class.
pub fn cross_validate(
    matrix: &FeatureMatrix,
    selector: &FeatureSelector,
    params: &CvParams,
) -> Result<ClassificationReport, ClassifyError> {
    let columns = matrix.select(selector);
    if columns.is_empty() {
        return Err(ClassifyError::EmptySelection);
    }
    let rows: Vec<Vec<f64>> = matrix
        .rows
        .iter()
        .map(|r| columns.iter().map(|&c| r.values[c]).collect())
        .collect();
    let labels: Vec<f64> = matrix.rows.iter().map(|r| r.signed_label()).collect();

    let fold_of_row = stratified_folds(&labels, params.folds, params.seed)?;
    let mut outcomes = Vec::with_capacity(params.folds);
    let mut pooled_counts = (0usize, 0usize, 0usize, 0usize);
    for fold in 0..params.folds {
        let train_idx: Vec<usize> = (0..rows.len()).filter(|&i| fold_of_row[i] != fold).collect();
        let test_idx: Vec<usize> = (0..rows.len()).filter(|&i| fold_of_row[i] == fold).collect();
        let train_rows: Vec<Vec<f64>> = train_idx.iter().map(|&i| rows[i].clone()).collect();
        let train_labels: Vec<f64> = train_idx.iter().map(|&i| labels[i]).collect();

        let standardizer = Standardizer::fit(&train_rows);
        let scaled = standardizer.transform(&train_rows);
        let svm = SvmParams {
            seed: params.svm.seed.wrapping_add(fold as u64),
            ..params.svm
        };
        let mut model = train_svm(&scaled, &train_labels, &svm)?;
        model.standardizer = Some(standardizer);

        let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
        for &i in &test_idx {
            let predicted = model.predict(&rows[i])?;
            match (labels[i] > 0.0, predicted > 0.0) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
        pooled_counts.0 += tp;
        pooled_counts.1 += fp;
        pooled_counts.2 += fn_;
        pooled_counts.3 += tn;
        outcomes.push(FoldOutcome {
            fold,
            metrics: metrics(tp, fp, fn_, tn)?,
            converged: model.converged,
        });
    }

    let n = outcomes.len() as f64;
    let mean = Metrics {
        accuracy: outcomes.iter().map(|o| o.metrics.accuracy).sum::<f64>() / n,
        precision: outcomes.iter().map(|o| o.metrics.precision).sum::<f64>() / n,
        recall: outcomes.iter().map(|o| o.metrics.recall).sum::<f64>() / n,
        f1: outcomes.iter().map(|o| o.metrics.f1).sum::<f64>() / n,
    };
    let pooled = metrics(
        pooled_counts.0,
        pooled_counts.1,
        pooled_counts.2,
        pooled_counts.3,
    )?;
    Ok(ClassificationReport {
        feature_set: selector.name(),
        all_converged: outcomes.iter().all(|o| o.converged),
        folds: outcomes,
        mean,
        pooled,
        fold_of_row,
    })
}
