//! Comparison algorithms and centroid seeding.
//!
//! All three baselines run on the same alternating solver as the robust
//! model with a squared-distance data term:
//!
//! | variant      | k_tilde | fuzzifier | objective                    |
//! |--------------|---------|-----------|------------------------------|
//! | K-Means      | 1       | (unused)  | `Σ ‖x_i − b_{label(i)}‖²`    |
//! | FCM          | c       | r         | `Σ ‖x_i − b_k‖² α_ik^r`      |
//! | sim-REFCMFS  | k_tilde | r         | `Σ ‖x_i − b_k‖² α_ik^r`      |
//!
//! With `k_tilde = c` the closed-form sparse row reduces to the classic FCM
//! membership `1 / Σ_s (d_ik / d_is)^{2/(r−1)}`, and with `k_tilde = 1` it is
//! the nearest-centroid indicator.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ClusterError, Result};
use crate::model::{
    validate_config, CentroidMatrix, DataMatrix, FitConfig, FitResult, Init, MembershipMatrix,
};
use crate::refcmfs::{loss_objective, squared_distance, Loss, Model, Solver};

/// Fuzzifier used internally for K-Means; memberships are 0/1 so it has no effect.
const KMEANS_FUZZIFIER: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Baseline {
    KMeans,
    Fcm { fuzzifier: f64 },
    SimRefcmfs { fuzzifier: f64, k_tilde: usize },
}

impl Baseline {
    pub fn name(&self) -> &'static str {
        match self {
            Baseline::KMeans => "kmeans",
            Baseline::Fcm { .. } => "fcm",
            Baseline::SimRefcmfs { .. } => "sim-refcmfs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub variant: Baseline,
    pub cluster_count: usize,
    pub tolerance: f64,
    pub max_iter: usize,
    pub init: Init,
    pub rng_seed: u64,
}

impl BaselineConfig {
    pub fn new(variant: Baseline, cluster_count: usize) -> Self {
        let base = FitConfig::new(cluster_count, 1);
        Self {
            variant,
            cluster_count,
            tolerance: base.tolerance,
            max_iter: base.max_iter,
            init: base.init,
            rng_seed: base.rng_seed,
        }
    }

    fn model(&self) -> Model {
        let (k_tilde, fuzzifier) = match self.variant {
            Baseline::KMeans => (1, KMEANS_FUZZIFIER),
            Baseline::Fcm { fuzzifier } => (self.cluster_count, fuzzifier),
            Baseline::SimRefcmfs { fuzzifier, k_tilde } => (k_tilde, fuzzifier),
        };
        Model {
            loss: Loss::Squared,
            k_tilde,
            fuzzifier,
        }
    }

    fn as_fit_config(&self) -> FitConfig {
        let model = self.model();
        FitConfig {
            cluster_count: self.cluster_count,
            fuzzifier: model.fuzzifier,
            k_tilde: model.k_tilde,
            tolerance: self.tolerance,
            max_iter: self.max_iter,
            init: self.init.clone(),
            rng_seed: self.rng_seed,
        }
    }
}

fn run_baseline(data: &DataMatrix, config: &BaselineConfig, expected: &str) -> Result<FitResult> {
    if config.variant.name() != expected {
        return Err(ClusterError::InvalidConfig(vec![format!(
            "expected a {expected} configuration, got {}",
            config.variant.name()
        )]));
    }
    validate_config(&config.as_fit_config(), data).into_result()?;
    let centroids = initial_centroids(data, config.cluster_count, &config.init, config.rng_seed)?;
    Ok(Solver::new(data, config.model(), centroids)?.run(config.tolerance, config.max_iter))
}

/// Lloyd iterations on the sum of squared distances.
pub fn kmeans_fit(data: &DataMatrix, config: &BaselineConfig) -> Result<FitResult> {
    run_baseline(data, config, "kmeans")
}

/// Classic fuzzy C-means with full-support memberships.
pub fn fcm_fit(data: &DataMatrix, config: &BaselineConfig) -> Result<FitResult> {
    run_baseline(data, config, "fcm")
}

/// Sparse fuzzy C-means with a least-squares data term.
pub fn sim_refcmfs_fit(data: &DataMatrix, config: &BaselineConfig) -> Result<FitResult> {
    run_baseline(data, config, "sim-refcmfs")
}

/// Dispatches on `config.variant`.
pub fn fit_baseline(data: &DataMatrix, config: &BaselineConfig) -> Result<FitResult> {
    run_baseline(data, config, config.variant.name())
}

/// `Σ_i Σ_k ‖x_i − b_k‖² α_ik^r`, the objective of FCM and sim-REFCMFS
/// (and of K-Means for one-hot memberships).
pub fn squared_objective(
    data: &DataMatrix,
    centroids: &CentroidMatrix,
    membership: &MembershipMatrix,
    r: f64,
) -> Result<f64> {
    loss_objective(data, centroids, membership, r, Loss::Squared)
}

/// Objective of a baseline fit, matching the values in its trace.
pub fn baseline_objective(
    variant: &Baseline,
    data: &DataMatrix,
    centroids: &CentroidMatrix,
    membership: &MembershipMatrix,
) -> Result<f64> {
    let r = match *variant {
        Baseline::KMeans => KMEANS_FUZZIFIER,
        Baseline::Fcm { fuzzifier } | Baseline::SimRefcmfs { fuzzifier, .. } => fuzzifier,
    };
    squared_objective(data, centroids, membership, r)
}

/// Builds the starting centroids for `init`.
pub fn initial_centroids(
    data: &DataMatrix,
    c: usize,
    init: &Init,
    rng_seed: u64,
) -> Result<CentroidMatrix> {
    match init {
        Init::KMeansPlusPlus => kmeanspp_seed(data, c, rng_seed),
        Init::RandomSamples => random_samples_seed(data, c, rng_seed),
        Init::Explicit(b) => {
            if b.cluster_count() != c || b.dim() != data.dim() {
                return Err(ClusterError::DimensionMismatch {
                    expected: c * data.dim(),
                    actual: b.cluster_count() * b.dim(),
                });
            }
            Ok(b.clone())
        }
    }
}

fn check_seed_count(data: &DataMatrix, c: usize) -> Result<()> {
    if c == 0 || c > data.n() {
        return Err(ClusterError::InvalidConfig(vec![format!(
            "cannot seed {c} centroids from {} samples",
            data.n()
        )]));
    }
    Ok(())
}

/// `c` distinct samples drawn uniformly without replacement.
pub fn random_samples_seed(data: &DataMatrix, c: usize, rng_seed: u64) -> Result<CentroidMatrix> {
    check_seed_count(data, c)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let picked = sample(&mut rng, data.n(), c).into_vec();
    let rows: Vec<&[f64]> = picked.iter().map(|&i| data.row(i)).collect();
    CentroidMatrix::from_rows(&rows)
}

/// Indices of the samples chosen by k-means++ seeding.
///
/// The first centre is uniform over the samples. Each further centre is the
/// best of `2 + ⌊ln c⌋` candidates drawn with probability proportional to the
/// squared distance to the nearest centre chosen so far, where "best" means the
/// lowest resulting potential `Σ_i min_k ‖x_i − b_k‖²`. Samples at distance 0
/// from a chosen centre are never drawn unless every remaining sample is, in
/// which case an unchosen index is drawn uniformly.
pub fn kmeanspp_indices(data: &DataMatrix, c: usize, rng_seed: u64) -> Result<Vec<usize>> {
    check_seed_count(data, c)?;
    let n = data.n();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let trials = 2 + (c as f64).ln().floor() as usize;

    let first = rng.gen_range(0..n);
    let mut chosen = vec![first];
    let mut taken = vec![false; n];
    taken[first] = true;
    let mut closest: Vec<f64> = data
        .rows()
        .map(|x| squared_distance(x, data.row(first)))
        .collect();
    let mut scratch = vec![0.0; n];
    let mut best = vec![0.0; n];

    while chosen.len() < c {
        let total: f64 = closest.iter().sum();
        let next = if total > 0.0 {
            let mut best_idx = usize::MAX;
            let mut best_potential = f64::INFINITY;
            for _ in 0..trials {
                let cand = draw_weighted(&closest, total, &mut rng);
                let cx = data.row(cand);
                let mut potential = 0.0;
                for (s, (x, &cur)) in scratch.iter_mut().zip(data.rows().zip(&closest)) {
                    *s = cur.min(squared_distance(x, cx));
                    potential += *s;
                }
                if potential < best_potential {
                    best_potential = potential;
                    best_idx = cand;
                    best.copy_from_slice(&scratch);
                }
            }
            closest.copy_from_slice(&best);
            best_idx
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
            free[rng.gen_range(0..free.len())]
        };
        taken[next] = true;
        chosen.push(next);
    }
    Ok(chosen)
}

fn draw_weighted(weights: &[f64], total: f64, rng: &mut ChaCha8Rng) -> usize {
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if acc > target {
                return i;
            }
        }
    }
    last_positive
}

/// k-means++ seeding; see [`kmeanspp_indices`].
pub fn kmeanspp_seed(data: &DataMatrix, c: usize, rng_seed: u64) -> Result<CentroidMatrix> {
    let picked = kmeanspp_indices(data, c, rng_seed)?;
    let rows: Vec<&[f64]> = picked.iter().map(|&i| data.row(i)).collect();
    CentroidMatrix::from_rows(&rows)
}
