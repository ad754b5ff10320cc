//! CSV ingestion and write-back, per-feature normalization and a seeded
//! Gaussian blob generator with uniform outliers.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ClusterError, Result};
use crate::model::DataMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub data: DataMatrix,
    /// Dense 0-based class ids, one per sample.
    pub labels: Option<Vec<usize>>,
    /// Original label text per class id, when labels were read from a file.
    pub label_names: Vec<String>,
    pub name: String,
}

impl LabeledDataset {
    pub fn class_count(&self) -> usize {
        self.labels
            .as_ref()
            .and_then(|l| l.iter().max())
            .map_or(0, |m| m + 1)
    }
}

/// Which CSV column, if any, holds the class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelColumn {
    None,
    Index(usize),
    Last,
}

pub fn load_csv(
    path: &Path,
    has_header: bool,
    label_column: LabelColumn,
) -> Result<LabeledDataset> {
    let file = File::open(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(file, has_header, label_column, name)
}

/// Parses a comma-separated numeric table. Row and column numbers in errors
/// are 1-based and count the header line.
pub fn read_csv<R: Read>(
    reader: R,
    has_header: bool,
    label_column: LabelColumn,
    name: String,
) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut values = Vec::new();
    let mut width: Option<usize> = None;
    let mut label_idx = None;
    let mut labels = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut codes: HashMap<String, usize> = HashMap::new();
    let mut n = 0;

    for (line, record) in rdr.records().enumerate() {
        let row = line + 1;
        let record = record.map_err(|e| ClusterError::Parse {
            row,
            column: 0,
            message: e.to_string(),
        })?;
        if has_header && line == 0 {
            continue;
        }
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(ClusterError::Parse {
                row,
                column: record.len().min(w) + 1,
                message: format!("expected {w} fields, found {}", record.len()),
            });
        }
        let li = match label_column {
            LabelColumn::None => None,
            LabelColumn::Last => Some(w - 1),
            LabelColumn::Index(i) if i < w => Some(i),
            LabelColumn::Index(i) => {
                return Err(ClusterError::Parse {
                    row,
                    column: i + 1,
                    message: format!("label column {i} out of range for {w} fields"),
                })
            }
        };
        label_idx = li;
        for (col, field) in record.iter().enumerate() {
            if Some(col) == li {
                let next = codes.len();
                let code = *codes.entry(field.to_string()).or_insert_with(|| {
                    names.push(field.to_string());
                    next
                });
                labels.push(code);
                continue;
            }
            let v: f64 = field.parse().map_err(|_| ClusterError::Parse {
                row,
                column: col + 1,
                message: format!("not a number: {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(ClusterError::Parse {
                    row,
                    column: col + 1,
                    message: format!("non-finite value: {field:?}"),
                });
            }
            values.push(v);
        }
        n += 1;
    }

    let width = width.ok_or(ClusterError::EmptyDataset)?;
    let d = width - usize::from(label_idx.is_some());
    if n == 0 || d == 0 {
        return Err(ClusterError::EmptyDataset);
    }
    Ok(LabeledDataset {
        data: DataMatrix::new(values, n, d)?,
        labels: label_idx.map(|_| labels),
        label_names: names,
        name,
    })
}

/// Writes features, then the label id when present, without a header.
/// Values use the shortest representation that parses back exactly.
pub fn write_csv(path: &Path, dataset: &LabeledDataset) -> Result<()> {
    let mut file = std::io::BufWriter::new(File::create(path)?);
    write_csv_to(&mut file, dataset)?;
    file.flush()?;
    Ok(())
}

pub fn write_csv_to<W: Write>(out: &mut W, dataset: &LabeledDataset) -> Result<()> {
    for (i, row) in dataset.data.rows().enumerate() {
        let mut line = row
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        if let Some(labels) = &dataset.labels {
            line.push(',');
            line.push_str(&labels[i].to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    None,
    MinMaxPerFeature,
    ZScorePerFeature,
}

/// Per-feature rescaling. Constant features map to 0 in both modes.
pub fn normalize(data: &DataMatrix, mode: Normalization) -> DataMatrix {
    let (n, d) = (data.n(), data.dim());
    let mut out = data.as_slice().to_vec();
    match mode {
        Normalization::None => {}
        Normalization::MinMaxPerFeature => {
            for j in 0..d {
                let (lo, hi) = data
                    .rows()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                        (lo.min(r[j]), hi.max(r[j]))
                    });
                let range = hi - lo;
                for i in 0..n {
                    let v = &mut out[i * d + j];
                    *v = if range > 0.0 { (*v - lo) / range } else { 0.0 };
                }
            }
        }
        Normalization::ZScorePerFeature => {
            for j in 0..d {
                let mean = data.rows().map(|r| r[j]).sum::<f64>() / n as f64;
                let var = data.rows().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n as f64;
                let sd = var.sqrt();
                for i in 0..n {
                    let v = &mut out[i * d + j];
                    *v = if sd > 0.0 { (*v - mean) / sd } else { 0.0 };
                }
            }
        }
    }
    DataMatrix::new(out, n, d).expect("normalization preserves shape and finiteness")
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlobCluster {
    pub center: Vec<f64>,
    pub stdev: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlobSpec {
    pub clusters: Vec<BlobCluster>,
    pub outlier_count: usize,
    /// Outliers fill the centers' bounding box enlarged by this factor about its middle.
    pub outlier_box_scale: f64,
    pub rng_seed: u64,
}

/// Standard normal deviates by the Box–Muller transform, both outputs used.
struct BoxMuller {
    spare: Option<f64>,
}

impl BoxMuller {
    fn sample(&mut self, rng: &mut ChaCha8Rng) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - rng.gen::<f64>();
        let u2 = rng.gen::<f64>();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

/// Samples isotropic Gaussian clusters followed by uniform outliers.
///
/// Cluster `j` gets label `j`; outliers share label `clusters.len()`. Along a
/// dimension where all centers coincide the box half-width falls back to the
/// largest stdev (or 1 if every stdev is 0).
pub fn generate_blobs(spec: &BlobSpec) -> Result<LabeledDataset> {
    let d = spec.clusters.first().map_or(0, |c| c.center.len());
    let total: usize = spec.clusters.iter().map(|c| c.count).sum::<usize>() + spec.outlier_count;
    let mut problems = Vec::new();
    if d == 0 {
        problems.push("at least one cluster with a non-empty center is required".to_string());
    }
    if total == 0 {
        problems.push("total sample count must be positive".to_string());
    }
    for (j, c) in spec.clusters.iter().enumerate() {
        if c.center.len() != d {
            problems.push(format!(
                "cluster {j} center has dimension {}, expected {d}",
                c.center.len()
            ));
        }
        if !(c.stdev.is_finite() && c.stdev >= 0.0) || c.center.iter().any(|v| !v.is_finite()) {
            problems.push(format!(
                "cluster {j} has a non-finite center or invalid stdev"
            ));
        }
    }
    if spec.outlier_count > 0
        && !(spec.outlier_box_scale.is_finite() && spec.outlier_box_scale > 1.0)
    {
        problems.push("outlier_box_scale must exceed 1".to_string());
    }
    if !problems.is_empty() {
        return Err(ClusterError::InvalidConfig(problems));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut normal = BoxMuller { spare: None };
    let mut values = Vec::with_capacity(total * d);
    let mut labels = Vec::with_capacity(total);
    for (j, cluster) in spec.clusters.iter().enumerate() {
        for _ in 0..cluster.count {
            for &mu in &cluster.center {
                values.push(mu + cluster.stdev * normal.sample(&mut rng));
            }
            labels.push(j);
        }
    }

    if spec.outlier_count > 0 {
        let max_sd = spec.clusters.iter().map(|c| c.stdev).fold(0.0, f64::max);
        let fallback = if max_sd > 0.0 { max_sd } else { 1.0 };
        let mut bounds = Vec::with_capacity(d);
        for j in 0..d {
            let (lo, hi) = spec
                .clusters
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
                    (lo.min(c.center[j]), hi.max(c.center[j]))
                });
            let mid = 0.5 * (lo + hi);
            let half = if hi > lo { 0.5 * (hi - lo) } else { fallback };
            let half = half * spec.outlier_box_scale;
            bounds.push((mid - half, mid + half));
        }
        let outlier_label = spec.clusters.len();
        for _ in 0..spec.outlier_count {
            for &(lo, hi) in &bounds {
                values.push(rng.gen_range(lo..hi));
            }
            labels.push(outlier_label);
        }
    }

    Ok(LabeledDataset {
        data: DataMatrix::new(values, total, d)?,
        labels: Some(labels),
        label_names: Vec::new(),
        name: "blobs".to_string(),
    })
}
