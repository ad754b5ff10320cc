//! Shared numeric data model: dense row-major matrices, fit configuration and
//! fit results.
//!
//! All matrices are stored sample-major (one row per sample or cluster) in a
//! single contiguous `Vec<f64>`.

use serde::{Deserialize, Serialize};

use crate::error::{ClusterError, Result};

/// Absolute tolerance on membership row sums.
pub const ROW_SUM_TOL: f64 = 1e-10;

/// `n × d` matrix of samples, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    n: usize,
    d: usize,
}

impl DataMatrix {
    pub fn new(values: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        check_dense(&values, n, d, "data")?;
        Ok(Self { values, n, d })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let (values, n, d) = flatten_rows(rows)?;
        Self::new(values, n, d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Copies the selected rows into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self::new(values, indices.len(), self.d)
    }
}

/// `c × d` matrix of cluster centroids, one centroid per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidMatrix {
    values: Vec<f64>,
    c: usize,
    d: usize,
}

impl CentroidMatrix {
    pub fn new(values: Vec<f64>, c: usize, d: usize) -> Result<Self> {
        check_dense(&values, c, d, "centroids")?;
        Ok(Self { values, c, d })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let (values, c, d) = flatten_rows(rows)?;
        Self::new(values, c, d)
    }

    pub fn cluster_count(&self) -> usize {
        self.c
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.d..(k + 1) * self.d]
    }

    pub(crate) fn row_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.values[k * self.d..(k + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Returns a copy whose row `k` is row `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.c {
            return Err(ClusterError::DimensionMismatch {
                expected: self.c,
                actual: perm.len(),
            });
        }
        let mut values = Vec::with_capacity(self.values.len());
        for &k in perm {
            values.extend_from_slice(self.row(k));
        }
        Self::new(values, self.c, self.d)
    }
}

fn flatten_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<(Vec<f64>, usize, usize)> {
    let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
    let mut values = Vec::with_capacity(rows.len() * d);
    for row in rows {
        let row = row.as_ref();
        if row.len() != d {
            return Err(ClusterError::DimensionMismatch {
                expected: d,
                actual: row.len(),
            });
        }
        values.extend_from_slice(row);
    }
    Ok((values, rows.len(), d))
}

fn check_dense(values: &[f64], rows: usize, cols: usize, what: &str) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(ClusterError::InvalidMatrix(format!(
            "{what} must have at least one row and one column"
        )));
    }
    if values.len() != rows * cols {
        return Err(ClusterError::DimensionMismatch {
            expected: rows * cols,
            actual: values.len(),
        });
    }
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(ClusterError::InvalidMatrix(format!(
            "{what} entry ({}, {}) is not finite",
            pos / cols,
            pos % cols
        )));
    }
    Ok(())
}

/// Row-stochastic `n × c` membership matrix with at most `k_tilde` nonzero
/// entries per row.
///
/// Rows are stored densely. A row may carry fewer than `k_tilde` nonzeros only
/// when it was resolved by the zero-distance rule, which is flagged per row.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix {
    values: Vec<f64>,
    n: usize,
    c: usize,
    k_tilde: usize,
    degenerate: Vec<bool>,
}

impl MembershipMatrix {
    /// Builds a membership matrix from dense values and validates it.
    pub fn new(values: Vec<f64>, n: usize, c: usize, k_tilde: usize) -> Result<Self> {
        let m = Self::from_parts(values, n, c, k_tilde, vec![false; n]);
        m.check().map_err(ClusterError::InvalidMatrix)?;
        Ok(m)
    }

    pub(crate) fn from_parts(
        values: Vec<f64>,
        n: usize,
        c: usize,
        k_tilde: usize,
        degenerate: Vec<bool>,
    ) -> Self {
        debug_assert_eq!(values.len(), n * c);
        debug_assert_eq!(degenerate.len(), n);
        Self {
            values,
            n,
            c,
            k_tilde,
            degenerate,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cluster_count(&self) -> usize {
        self.c
    }

    pub fn k_tilde(&self) -> usize {
        self.k_tilde
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.c..(i + 1) * self.c]
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.c + k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.c)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Whether row `i` was resolved by the zero-distance rule.
    pub fn is_degenerate(&self, i: usize) -> bool {
        self.degenerate[i]
    }

    pub fn degenerate_count(&self) -> usize {
        self.degenerate.iter().filter(|&&d| d).count()
    }

    pub fn nonzeros(&self, i: usize) -> usize {
        self.row(i).iter().filter(|&&v| v != 0.0).count()
    }

    /// Argmax per row; ties go to the lowest cluster index.
    pub fn labels(&self) -> Vec<usize> {
        self.rows().map(argmax_lowest).collect()
    }

    /// Verifies non-negativity, unit row sums and the per-row sparsity rule.
    pub fn check(&self) -> std::result::Result<(), String> {
        if self.k_tilde == 0 || self.k_tilde > self.c {
            return Err(format!("k_tilde {} outside [1, {}]", self.k_tilde, self.c));
        }
        for (i, row) in self.rows().enumerate() {
            if let Some(k) = row.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(format!(
                    "row {i}: entry {k} = {} is not a finite non-negative value",
                    row[k]
                ));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(format!("row {i}: sum {sum} differs from 1"));
            }
            let nnz = self.nonzeros(i);
            let ok = if self.degenerate[i] {
                nnz >= 1 && nnz <= self.k_tilde
            } else {
                nnz == self.k_tilde
            };
            if !ok {
                return Err(format!(
                    "row {i}: {nnz} nonzeros, expected {} (degenerate: {})",
                    self.k_tilde, self.degenerate[i]
                ));
            }
        }
        Ok(())
    }
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax_lowest(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = k;
        }
    }
    best
}

/// How the initial centroids are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    KMeansPlusPlus,
    RandomSamples,
    Explicit(CentroidMatrix),
}

impl Init {
    pub fn name(&self) -> &'static str {
        match self {
            Init::KMeansPlusPlus => "kmeanspp",
            Init::RandomSamples => "random",
            Init::Explicit(_) => "explicit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub cluster_count: usize,
    /// Fuzzifier `r > 1`.
    pub fuzzifier: f64,
    /// Nonzero memberships per row.
    pub k_tilde: usize,
    /// Relative objective decrease that stops the iteration.
    pub tolerance: f64,
    pub max_iter: usize,
    pub init: Init,
    pub rng_seed: u64,
}

pub const DEFAULT_FUZZIFIER: f64 = 1.1;
pub const DEFAULT_TOLERANCE: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 300;

impl FitConfig {
    /// Defaults: r = 1.1, tolerance 1e-7, 300 iterations, k-means++ seeding, seed 0.
    pub fn new(cluster_count: usize, k_tilde: usize) -> Self {
        Self {
            cluster_count,
            fuzzifier: DEFAULT_FUZZIFIER,
            k_tilde,
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
            init: Init::KMeansPlusPlus,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(ClusterError::InvalidConfig(self.violations))
        }
    }
}

pub fn validate_config(config: &FitConfig, data: &DataMatrix) -> ValidationReport {
    let mut report = ValidationReport::default();
    let c = config.cluster_count;
    let n = data.n();
    if c < 2 {
        report
            .violations
            .push(format!("cluster count must be at least 2 (got {c})"));
    }
    if c > n {
        report
            .violations
            .push(format!("cluster count {c} exceeds sample count {n}"));
    }
    if !(config.fuzzifier.is_finite() && config.fuzzifier > 1.0) {
        report
            .violations
            .push("fuzzifier must exceed 1".to_string());
    }
    if config.k_tilde < 1 || config.k_tilde > c {
        report.violations.push(format!(
            "k_tilde must lie in [1, {c}] (got {})",
            config.k_tilde
        ));
    } else if config.k_tilde == 1 || config.k_tilde == c {
        report.warnings.push(format!(
            "k_tilde outside recommended range (1, c): k_tilde = {}, c = {c}",
            config.k_tilde
        ));
    }
    if !(config.tolerance.is_finite() && config.tolerance > 0.0) {
        report
            .violations
            .push("tolerance must be positive".to_string());
    }
    if config.max_iter == 0 {
        report
            .violations
            .push("max_iter must be at least 1".to_string());
    }
    if let Init::Explicit(b) = &config.init {
        if b.cluster_count() != c || b.dim() != data.dim() {
            report.violations.push(format!(
                "explicit centroids are {}x{}, expected {c}x{}",
                b.cluster_count(),
                b.dim(),
                data.dim()
            ));
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReseedEvent {
    pub iteration: usize,
    pub cluster: usize,
    pub sample: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Starved clusters moved onto a sample.
    pub reseeds: Vec<ReseedEvent>,
    /// Rows resolved by the zero-distance rule, summed over all membership updates.
    pub degenerate_rows: usize,
    /// Reweighted centroid moves discarded because they raised their cluster's objective.
    pub rejected_centroid_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub membership: MembershipMatrix,
    pub centroids: CentroidMatrix,
    pub labels: Vec<usize>,
    /// Objective after each membership update, one entry per iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub diagnostics: Diagnostics,
}

impl FitResult {
    pub fn final_objective(&self) -> f64 {
        *self
            .objective_trace
            .last()
            .expect("fit records at least one iteration")
    }
}
