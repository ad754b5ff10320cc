//! Robust sparse fuzzy C-means.
//!
//! Minimizes `Σ_i Σ_k ‖x_i − b_k‖₂ · α_ik^r` subject to every membership row
//! lying on the probability simplex with exactly `k_tilde` nonzero entries.
//!
//! Each iteration alternates two exact block updates:
//!
//! * **Membership.** With the centroids fixed the problem separates per
//!   sample. Ranking the distances `h_i·` in ascending order, the optimal
//!   support is the `k_tilde` nearest centroids and the optimal weights on it
//!   are `α_ik ∝ h_ik^{1/(1−r)}`, giving the row value
//!   `(Σ_support h^{1/(1−r)})^{1−r}`, which only shrinks as the selected
//!   distances shrink.
//! * **Centroids.** With memberships fixed the unsquared-distance objective is
//!   majorized by the weighted least-squares surrogate
//!   `Σ s_ik ‖x_i − b_k‖² α_ik^r` with `s_ik = 1 / (2 h_ik)` taken at the
//!   current centroids. Its minimizer is the `s·α^r`-weighted mean of the
//!   data, and it can only lower the original objective.
//!
//! The same machinery drives the squared-loss variants in [`crate::baselines`]
//! through [`Loss::Squared`].

use crate::baselines::initial_centroids;
use crate::error::{ClusterError, Result};
use crate::model::{
    validate_config, CentroidMatrix, DataMatrix, Diagnostics, FitConfig, FitResult,
    MembershipMatrix, ReseedEvent,
};

/// Distances at or below this are treated as exact coincidences.
pub const ZERO_DISTANCE_EPS: f64 = 1e-12;
/// Lower clamp on distances inside the reweighting factor `1 / (2h)`.
pub const WEIGHT_EPS: f64 = 1e-9;
/// Centroid denominators at or below this mark a starved cluster.
pub const STARVED_DENOMINATOR: f64 = 1e-300;

/// Ascending order of one distance row.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingPermutation {
    /// `order[j]` is the index of the `j`-th smallest entry; ties keep index order.
    pub order: Vec<usize>,
    pub sorted: Vec<f64>,
}

/// One membership row together with its selected support.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipRow {
    pub values: Vec<f64>,
    /// The `k_tilde` nearest clusters, nearest first.
    pub support: Vec<usize>,
    /// Set when the zero-distance rule decided the row.
    pub degenerate: bool,
}

/// IRLS reweighting factors `s_ik`, row-major `n × c`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    values: Vec<f64>,
    n: usize,
    c: usize,
}

impl WeightMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cluster_count(&self) -> usize {
        self.c
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.c + k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.c..(i + 1) * self.c]
    }
}

/// Result of a centroid update.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidUpdate {
    pub centroids: CentroidMatrix,
    /// `(cluster, sample)` pairs for clusters that were reseeded.
    pub reseeded: Vec<(usize, usize)>,
}

#[inline]
pub(crate) fn squared_distance(x: &[f64], b: &[f64]) -> f64 {
    x.iter().zip(b).map(|(xi, bi)| (xi - bi) * (xi - bi)).sum()
}

/// Euclidean distance from `x` to every centroid.
pub fn distance_row(x: &[f64], centroids: &CentroidMatrix) -> Result<Vec<f64>> {
    if x.len() != centroids.dim() {
        return Err(ClusterError::DimensionMismatch {
            expected: centroids.dim(),
            actual: x.len(),
        });
    }
    Ok(centroids
        .rows()
        .map(|b| squared_distance(x, b).sqrt())
        .collect())
}

/// Stable ascending ranking of `h`.
pub fn rank_ascending(h: &[f64]) -> RankingPermutation {
    let mut order: Vec<usize> = (0..h.len()).collect();
    sort_order(h, &mut order);
    let sorted = order.iter().map(|&k| h[k]).collect();
    RankingPermutation { order, sorted }
}

#[inline]
fn sort_order(h: &[f64], order: &mut [usize]) {
    order.sort_by(|&a, &b| h[a].total_cmp(&h[b]));
}

/// Closed-form optimal membership row for distances `h` under the
/// `k_tilde`-sparsity constraint.
pub fn update_membership_row(h: &[f64], k_tilde: usize, r: f64) -> MembershipRow {
    assert!(
        (1..=h.len()).contains(&k_tilde),
        "k_tilde {k_tilde} outside [1, {}]",
        h.len()
    );
    let mut order: Vec<usize> = (0..h.len()).collect();
    let mut values = vec![0.0; h.len()];
    let degenerate = fill_membership_row(h, k_tilde, r, ZERO_DISTANCE_EPS, &mut order, &mut values);
    MembershipRow {
        values,
        support: order[..k_tilde].to_vec(),
        degenerate,
    }
}

/// Writes the optimal row into `out` and leaves the ranking in `order`.
/// Returns whether the zero-distance rule applied.
pub(crate) fn fill_membership_row(
    h: &[f64],
    k_tilde: usize,
    r: f64,
    zero_eps: f64,
    order: &mut [usize],
    out: &mut [f64],
) -> bool {
    for (j, o) in order.iter_mut().enumerate() {
        *o = j;
    }
    sort_order(h, order);
    out.iter_mut().for_each(|v| *v = 0.0);
    let support = &order[..k_tilde];

    // Sorted ascending, so coincident centroids form a prefix of the support.
    let zeros = support.iter().take_while(|&&k| h[k] <= zero_eps).count();
    if zeros > 0 {
        let mass = 1.0 / zeros as f64;
        for &k in &support[..zeros] {
            out[k] = mass;
        }
        return true;
    }

    // (h_k / h_min)^{1/(1−r)} keeps every term in (0, 1] and the largest at 1.
    let exponent = 1.0 / (1.0 - r);
    let h_min = h[support[0]];
    let mut total = 0.0;
    for &k in support {
        // Underflow would silently drop a support entry.
        let w = (h[k] / h_min).powf(exponent).max(f64::MIN_POSITIVE);
        out[k] = w;
        total += w;
    }
    for &k in support {
        out[k] /= total;
    }
    false
}

/// `Σ_k h_k · α_k^r` for one sample.
pub fn row_objective(h: &[f64], row: &[f64], r: f64) -> f64 {
    h.iter()
        .zip(row)
        .map(|(&hk, &a)| if a == 0.0 { 0.0 } else { hk * a.powf(r) })
        .sum()
}

/// `s_ik = 1 / (2 · max(‖x_i − b_k‖₂, ε_s))`.
pub fn update_weights(data: &DataMatrix, centroids: &CentroidMatrix) -> Result<WeightMatrix> {
    check_dims(data, centroids)?;
    let h = loss_matrix(data, centroids, Loss::L21);
    Ok(weights_from_distances(
        h,
        data.n(),
        centroids.cluster_count(),
    ))
}

fn weights_from_distances(mut h: Vec<f64>, n: usize, c: usize) -> WeightMatrix {
    for v in h.iter_mut() {
        *v = 1.0 / (2.0 * v.max(WEIGHT_EPS));
    }
    WeightMatrix { values: h, n, c }
}

/// Reweighted centroid step: `b_k = Σ_i s_ik α_ik^r x_i / Σ_i s_ik α_ik^r`.
///
/// Clusters whose denominator vanishes are moved onto the samples with the
/// largest objective contribution under `previous`.
pub fn update_centroids(
    data: &DataMatrix,
    membership: &MembershipMatrix,
    weights: &WeightMatrix,
    r: f64,
    previous: &CentroidMatrix,
) -> Result<CentroidUpdate> {
    check_dims(data, previous)?;
    let c = previous.cluster_count();
    if membership.n() != data.n() || membership.cluster_count() != c {
        return Err(ClusterError::DimensionMismatch {
            expected: data.n() * c,
            actual: membership.n() * membership.cluster_count(),
        });
    }
    if weights.n() != data.n() || weights.cluster_count() != c {
        return Err(ClusterError::DimensionMismatch {
            expected: data.n() * c,
            actual: weights.n() * weights.cluster_count(),
        });
    }
    Ok(centroid_step(
        data,
        membership,
        r,
        |i, k| weights.get(i, k),
        || row_contributions(&loss_matrix(data, previous, Loss::L21), membership, r),
        previous,
    ))
}

/// Weighted-mean centroid update shared by every variant.
pub(crate) fn centroid_step(
    data: &DataMatrix,
    membership: &MembershipMatrix,
    r: f64,
    sample_weight: impl Fn(usize, usize) -> f64,
    contributions: impl FnOnce() -> Vec<f64>,
    previous: &CentroidMatrix,
) -> CentroidUpdate {
    let c = previous.cluster_count();
    let d = data.dim();
    let mut num = vec![0.0; c * d];
    let mut den = vec![0.0; c];
    for (i, (x, row)) in data.rows().zip(membership.rows()).enumerate() {
        for (k, &a) in row.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let w = sample_weight(i, k) * a.powf(r);
            den[k] += w;
            for (acc, xj) in num[k * d..(k + 1) * d].iter_mut().zip(x) {
                *acc += w * xj;
            }
        }
    }

    let mut centroids = previous.clone();
    let mut starved = Vec::new();
    for k in 0..c {
        if den[k] <= STARVED_DENOMINATOR {
            starved.push(k);
            continue;
        }
        for (b, acc) in centroids
            .row_mut(k)
            .iter_mut()
            .zip(&num[k * d..(k + 1) * d])
        {
            *b = acc / den[k];
        }
    }

    let mut reseeded = Vec::new();
    if !starved.is_empty() {
        let contrib = contributions();
        let mut ranked: Vec<usize> = (0..data.n()).collect();
        ranked.sort_by(|&a, &b| contrib[b].total_cmp(&contrib[a]));
        for (k, &sample) in starved.iter().zip(ranked.iter()) {
            centroids.row_mut(*k).copy_from_slice(data.row(sample));
            reseeded.push((*k, sample));
        }
    }
    CentroidUpdate {
        centroids,
        reseeded,
    }
}

fn row_contributions(h: &[f64], membership: &MembershipMatrix, r: f64) -> Vec<f64> {
    let c = membership.cluster_count();
    membership
        .rows()
        .enumerate()
        .map(|(i, row)| row_objective(&h[i * c..(i + 1) * c], row, r))
        .collect()
}

/// `Σ_i Σ_k ‖x_i − b_k‖₂ · α_ik^r`.
pub fn objective(
    data: &DataMatrix,
    centroids: &CentroidMatrix,
    membership: &MembershipMatrix,
    r: f64,
) -> Result<f64> {
    loss_objective(data, centroids, membership, r, Loss::L21)
}

pub(crate) fn loss_objective(
    data: &DataMatrix,
    centroids: &CentroidMatrix,
    membership: &MembershipMatrix,
    r: f64,
    loss: Loss,
) -> Result<f64> {
    check_dims(data, centroids)?;
    if membership.n() != data.n() || membership.cluster_count() != centroids.cluster_count() {
        return Err(ClusterError::DimensionMismatch {
            expected: data.n() * centroids.cluster_count(),
            actual: membership.n() * membership.cluster_count(),
        });
    }
    let h = loss_matrix(data, centroids, loss);
    Ok(sum_objective(&h, membership, r))
}

fn sum_objective(h: &[f64], membership: &MembershipMatrix, r: f64) -> f64 {
    row_contributions(h, membership, r).into_iter().sum()
}

fn check_dims(data: &DataMatrix, centroids: &CentroidMatrix) -> Result<()> {
    if data.dim() != centroids.dim() {
        return Err(ClusterError::DimensionMismatch {
            expected: data.dim(),
            actual: centroids.dim(),
        });
    }
    Ok(())
}

/// Per-entry data term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    /// Unsquared Euclidean distance, centroids updated by reweighting.
    L21,
    /// Squared Euclidean distance, centroids are plain `α^r`-weighted means.
    Squared,
}

impl Loss {
    #[inline]
    fn term(self, x: &[f64], b: &[f64]) -> f64 {
        match self {
            Loss::L21 => squared_distance(x, b).sqrt(),
            Loss::Squared => squared_distance(x, b),
        }
    }

    fn zero_eps(self) -> f64 {
        match self {
            Loss::L21 => ZERO_DISTANCE_EPS,
            Loss::Squared => ZERO_DISTANCE_EPS * ZERO_DISTANCE_EPS,
        }
    }
}

fn loss_matrix(data: &DataMatrix, centroids: &CentroidMatrix, loss: Loss) -> Vec<f64> {
    let mut h = Vec::with_capacity(data.n() * centroids.cluster_count());
    for x in data.rows() {
        h.extend(centroids.rows().map(|b| loss.term(x, b)));
    }
    h
}

/// Loss, sparsity and fuzzifier of one alternating scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub loss: Loss,
    pub k_tilde: usize,
    pub fuzzifier: f64,
}

/// Step-wise driver of the alternating updates.
///
/// [`Solver::assign`] and [`Solver::update_centroids`] expose single steps so
/// callers can run a fixed number of iterations; [`Solver::run`] is the
/// convergence loop used by every `fit`.
#[derive(Debug, Clone)]
pub struct Solver<'a> {
    data: &'a DataMatrix,
    model: Model,
    centroids: CentroidMatrix,
    /// Loss terms `h_ik` at `centroids`.
    loss_terms: Vec<f64>,
    membership: Option<MembershipMatrix>,
    trace: Vec<f64>,
    diagnostics: Diagnostics,
    order: Vec<usize>,
}

impl<'a> Solver<'a> {
    pub fn new(data: &'a DataMatrix, model: Model, centroids: CentroidMatrix) -> Result<Self> {
        check_dims(data, &centroids)?;
        let c = centroids.cluster_count();
        if !(1..=c).contains(&model.k_tilde) || model.fuzzifier.is_nan() || model.fuzzifier <= 1.0 {
            return Err(ClusterError::InvalidConfig(vec![format!(
                "model requires 1 <= k_tilde <= {c} and r > 1 (got k_tilde = {}, r = {})",
                model.k_tilde, model.fuzzifier
            )]));
        }
        Ok(Self {
            data,
            model,
            centroids,
            loss_terms: Vec::new(),
            membership: None,
            trace: Vec::new(),
            diagnostics: Diagnostics::default(),
            order: vec![0; c],
        })
    }

    pub fn centroids(&self) -> &CentroidMatrix {
        &self.centroids
    }

    pub fn membership(&self) -> Option<&MembershipMatrix> {
        self.membership.as_ref()
    }

    pub fn trace(&self) -> &[f64] {
        &self.trace
    }

    /// Membership update at the current centroids. Records and returns the
    /// objective of the resulting state.
    pub fn assign(&mut self) -> f64 {
        let n = self.data.n();
        let c = self.centroids.cluster_count();
        let Model {
            loss,
            k_tilde,
            fuzzifier: r,
        } = self.model;
        self.loss_terms = loss_matrix(self.data, &self.centroids, loss);
        let mut values = vec![0.0; n * c];
        let mut degenerate = vec![false; n];
        let zero_eps = loss.zero_eps();
        for i in 0..n {
            degenerate[i] = fill_membership_row(
                &self.loss_terms[i * c..(i + 1) * c],
                k_tilde,
                r,
                zero_eps,
                &mut self.order,
                &mut values[i * c..(i + 1) * c],
            );
        }
        let membership = MembershipMatrix::from_parts(values, n, c, k_tilde, degenerate);
        self.diagnostics.degenerate_rows += membership.degenerate_count();
        let obj = sum_objective(&self.loss_terms, &membership, r);
        self.membership = Some(membership);
        self.trace.push(obj);
        obj
    }

    /// Centroid update for the memberships of the last [`Solver::assign`].
    pub fn update_centroids(&mut self) {
        let membership = membership_ref(&self.membership);
        let c = self.centroids.cluster_count();
        let r = self.model.fuzzifier;
        let loss_terms = &self.loss_terms;
        let update = match self.model.loss {
            Loss::L21 => centroid_step(
                self.data,
                membership,
                r,
                |i, k| 1.0 / (2.0 * loss_terms[i * c + k].max(WEIGHT_EPS)),
                || row_contributions(loss_terms, membership, r),
                &self.centroids,
            ),
            Loss::Squared => centroid_step(
                self.data,
                membership,
                r,
                |_, _| 1.0,
                || row_contributions(loss_terms, membership, r),
                &self.centroids,
            ),
        };
        let mut update = update;
        if self.model.loss == Loss::L21 {
            let membership = membership_ref(&self.membership);
            let alternative = self.coincident_step(membership);
            self.diagnostics.rejected_centroid_steps +=
                self.select_improving(membership, &mut update, &alternative);
        }
        let iteration = self.trace.len();
        self.diagnostics
            .reseeds
            .extend(
                update
                    .reseeded
                    .iter()
                    .map(|&(cluster, sample)| ReseedEvent {
                        iteration,
                        cluster,
                        sample,
                    }),
            );
        self.centroids = update.centroids;
    }

    /// Weiszfeld step with samples closer than `WEIGHT_EPS` to the centroid
    /// left out of the reweighted mean, then pulled back towards the
    /// centroid by their total mass (the Vardi-Zhang correction). Unlike the
    /// guarded step this can move a centroid off a sample it sits on.
    /// `None` for clusters with no sample at positive distance.
    fn coincident_step(&self, membership: &MembershipMatrix) -> Vec<Option<Vec<f64>>> {
        let c = self.centroids.cluster_count();
        let d = self.data.dim();
        let r = self.model.fuzzifier;
        let mut num = vec![0.0; c * d];
        let mut den = vec![0.0; c];
        let mut on_centroid = vec![0.0; c];
        for (i, (x, row)) in self.data.rows().zip(membership.rows()).enumerate() {
            for (k, &a) in row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let h = self.loss_terms[i * c + k];
                if h < WEIGHT_EPS {
                    on_centroid[k] += a.powf(r);
                    continue;
                }
                let w = a.powf(r) / h;
                den[k] += w;
                for (acc, xj) in num[k * d..(k + 1) * d].iter_mut().zip(x) {
                    *acc += w * xj;
                }
            }
        }
        (0..c)
            .map(|k| {
                if den[k] <= STARVED_DENOMINATOR {
                    return None;
                }
                let b = self.centroids.row(k);
                let target: Vec<f64> = num[k * d..(k + 1) * d].iter().map(|v| v / den[k]).collect();
                let pull = den[k] * squared_distance(&target, b).sqrt();
                let eta = if pull > 0.0 {
                    (on_centroid[k] / pull).min(1.0)
                } else {
                    1.0
                };
                Some(
                    target
                        .iter()
                        .zip(b)
                        .map(|(t, bj)| (1.0 - eta) * t + eta * bj)
                        .collect(),
                )
            })
            .collect()
    }

    /// With memberships fixed the objective splits into one term per cluster,
    /// so each cluster independently takes whichever of the guarded step and
    /// `alternative` lowers its term most. The guarded step's majorizer is
    /// only tight where `h_ik >= WEIGHT_EPS`, so neither is guaranteed to
    /// descend; clusters where both would rise keep their previous centroid.
    /// Returns the number of such clusters.
    fn select_improving(
        &self,
        membership: &MembershipMatrix,
        update: &mut CentroidUpdate,
        alternative: &[Option<Vec<f64>>],
    ) -> usize {
        let c = self.centroids.cluster_count();
        let r = self.model.fuzzifier;
        let mut before = vec![0.0; c];
        let mut guarded = vec![0.0; c];
        let mut other = vec![0.0; c];
        for (i, (x, row)) in self.data.rows().zip(membership.rows()).enumerate() {
            for (k, &a) in row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let w = a.powf(r);
                before[k] += self.loss_terms[i * c + k] * w;
                guarded[k] += Loss::L21.term(x, update.centroids.row(k)) * w;
                if let Some(b) = &alternative[k] {
                    other[k] += Loss::L21.term(x, b) * w;
                }
            }
        }
        let mut rejected = 0;
        for k in 0..c {
            if update.reseeded.iter().any(|&(cluster, _)| cluster == k) {
                continue;
            }
            match &alternative[k] {
                Some(b) if other[k] < guarded[k] && other[k] <= before[k] => {
                    update.centroids.row_mut(k).copy_from_slice(b);
                }
                _ if guarded[k] <= before[k] => {}
                _ => {
                    update
                        .centroids
                        .row_mut(k)
                        .copy_from_slice(self.centroids.row(k));
                    rejected += 1;
                }
            }
        }
        rejected
    }

    /// Alternates until the relative objective decrease drops to `tolerance`
    /// or `max_iter` membership updates have run. The returned state is the
    /// last membership together with the centroids it was computed from.
    pub fn run(mut self, tolerance: f64, max_iter: usize) -> FitResult {
        let mut converged = false;
        loop {
            let obj = self.assign();
            let t = self.trace.len();
            if t >= 2 {
                let prev = self.trace[t - 2];
                if (prev - obj).abs() / obj.max(1.0) <= tolerance {
                    converged = true;
                    break;
                }
            }
            if t >= max_iter {
                break;
            }
            self.update_centroids();
        }
        let membership = self.membership.expect("at least one assignment ran");
        FitResult {
            labels: membership.labels(),
            membership,
            centroids: self.centroids,
            iterations: self.trace.len(),
            objective_trace: self.trace,
            converged,
            diagnostics: self.diagnostics,
        }
    }
}

fn membership_ref(m: &Option<MembershipMatrix>) -> &MembershipMatrix {
    m.as_ref().expect("assign must run before update_centroids")
}

/// Fits the robust sparse model with the L2,1 loss.
pub fn fit(data: &DataMatrix, config: &FitConfig) -> Result<FitResult> {
    validate_config(config, data).into_result()?;
    let centroids = initial_centroids(data, config.cluster_count, &config.init, config.rng_seed)?;
    let model = Model {
        loss: Loss::L21,
        k_tilde: config.k_tilde,
        fuzzifier: config.fuzzifier,
    };
    Ok(Solver::new(data, model, centroids)?.run(config.tolerance, config.max_iter))
}
