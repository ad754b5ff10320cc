//! Browser bindings for the demo page in `www/`.
//!
//! Every export is a thin wrapper over a plain function returning JSON, so
//! the logic is testable natively.

use refcmfs_core::baselines::{fit_baseline, Baseline, BaselineConfig};
use refcmfs_core::data_io::{generate_blobs, BlobCluster, BlobSpec};
use refcmfs_core::metrics::{accuracy, nmi};
use refcmfs_core::refcmfs::{fit, rank_ascending, row_objective, update_membership_row};
use refcmfs_core::{DataMatrix, FitConfig, FitResult};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct Blobs {
    pub points: Vec<[f64; 2]>,
    /// Blob index per point; outliers get the number of blobs.
    pub labels: Vec<usize>,
}

/// `clusters` blobs with centers evenly spaced on a circle of the given radius.
pub fn blobs(
    clusters: usize,
    per_cluster: usize,
    stdev: f64,
    radius: f64,
    outliers: usize,
    seed: u64,
) -> Result<Blobs, String> {
    let spec = BlobSpec {
        clusters: (0..clusters)
            .map(|j| {
                let angle = std::f64::consts::TAU * j as f64 / clusters as f64;
                BlobCluster {
                    center: vec![radius * angle.cos(), radius * angle.sin()],
                    stdev,
                    count: per_cluster,
                }
            })
            .collect(),
        outlier_count: outliers,
        outlier_box_scale: 2.0,
        rng_seed: seed,
    };
    let ds = generate_blobs(&spec).map_err(|e| e.to_string())?;
    Ok(Blobs {
        points: ds.data.rows().map(|r| [r[0], r[1]]).collect(),
        labels: ds.labels.unwrap_or_default(),
    })
}

#[derive(Debug, Serialize)]
pub struct FitView {
    pub labels: Vec<usize>,
    /// Largest membership per point.
    pub confidence: Vec<f64>,
    pub membership: Vec<Vec<f64>>,
    pub centroids: Vec<Vec<f64>>,
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub acc: Option<f64>,
    pub nmi: Option<f64>,
}

/// Fits flat row-major `points` of width `dim`. `truth`, when non-empty, is
/// scored against the fitted labels.
#[allow(clippy::too_many_arguments)]
pub fn fit_points(
    points: &[f64],
    dim: usize,
    algo: &str,
    c: usize,
    k_tilde: usize,
    r: f64,
    seed: u64,
    truth: &[usize],
) -> Result<FitView, String> {
    if dim == 0 || !points.len().is_multiple_of(dim) {
        return Err(format!(
            "{} values do not form rows of width {dim}",
            points.len()
        ));
    }
    let data =
        DataMatrix::new(points.to_vec(), points.len() / dim, dim).map_err(|e| e.to_string())?;
    let result = match algo {
        "refcmfs" => {
            let mut cfg = FitConfig::new(c, k_tilde);
            cfg.fuzzifier = r;
            cfg.rng_seed = seed;
            fit(&data, &cfg)
        }
        _ => {
            let variant = match algo {
                "kmeans" => Baseline::KMeans,
                "fcm" => Baseline::Fcm { fuzzifier: r },
                "sim-refcmfs" => Baseline::SimRefcmfs {
                    fuzzifier: r,
                    k_tilde,
                },
                other => return Err(format!("unknown algorithm: {other}")),
            };
            let mut cfg = BaselineConfig::new(variant, c);
            cfg.rng_seed = seed;
            fit_baseline(&data, &cfg)
        }
    }
    .map_err(|e| e.to_string())?;
    view(result, truth)
}

fn view(result: FitResult, truth: &[usize]) -> Result<FitView, String> {
    let (acc, nmi) = if truth.is_empty() {
        (None, None)
    } else {
        let score = |f: fn(&[usize], &[usize]) -> refcmfs_core::Result<f64>| {
            f(&result.labels, truth).map_err(|e| e.to_string())
        };
        (Some(score(accuracy)?), Some(score(nmi)?))
    };
    let membership: Vec<Vec<f64>> = result.membership.rows().map(<[f64]>::to_vec).collect();
    Ok(FitView {
        confidence: membership
            .iter()
            .map(|r| r.iter().copied().fold(0.0, f64::max))
            .collect(),
        labels: result.labels,
        membership,
        centroids: result.centroids.rows().map(<[f64]>::to_vec).collect(),
        iterations: result.iterations,
        converged: result.converged,
        trace: result.objective_trace,
        acc,
        nmi,
    })
}

#[derive(Debug, Serialize)]
pub struct RowView {
    pub values: Vec<f64>,
    pub support: Vec<usize>,
    /// Cluster indices by ascending distance.
    pub order: Vec<usize>,
    pub objective: f64,
    pub degenerate: bool,
}

/// Optimal sparse membership for one row of distances.
pub fn membership_row(distances: &[f64], k_tilde: usize, r: f64) -> Result<RowView, String> {
    if distances.is_empty() || distances.iter().any(|h| !h.is_finite() || *h < 0.0) {
        return Err("distances must be non-empty, finite and non-negative".into());
    }
    if !(1..=distances.len()).contains(&k_tilde) || r.is_nan() || r <= 1.0 {
        return Err(format!(
            "need 1 <= k_tilde <= {} and r > 1",
            distances.len()
        ));
    }
    let row = update_membership_row(distances, k_tilde, r);
    Ok(RowView {
        objective: row_objective(distances, &row.values, r),
        order: rank_ascending(distances).order,
        values: row.values,
        support: row.support,
        degenerate: row.degenerate,
    })
}

fn to_js<T: Serialize>(value: Result<T, String>) -> Result<String, JsError> {
    let value = value.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = generateBlobs)]
pub fn generate_blobs_js(
    clusters: usize,
    per_cluster: usize,
    stdev: f64,
    radius: f64,
    outliers: usize,
    seed: u32,
) -> Result<String, JsError> {
    to_js(blobs(
        clusters,
        per_cluster,
        stdev,
        radius,
        outliers,
        seed.into(),
    ))
}

#[wasm_bindgen(js_name = fitPoints)]
#[allow(clippy::too_many_arguments)]
pub fn fit_points_js(
    points: &[f64],
    dim: usize,
    algo: &str,
    c: usize,
    k_tilde: usize,
    r: f64,
    seed: u32,
    truth: &[u32],
) -> Result<String, JsError> {
    let truth: Vec<usize> = truth.iter().map(|&t| t as usize).collect();
    to_js(fit_points(
        points,
        dim,
        algo,
        c,
        k_tilde,
        r,
        seed.into(),
        &truth,
    ))
}

#[wasm_bindgen(js_name = membershipRow)]
pub fn membership_row_js(distances: &[f64], k_tilde: usize, r: f64) -> Result<String, JsError> {
    to_js(membership_row(distances, k_tilde, r))
}
