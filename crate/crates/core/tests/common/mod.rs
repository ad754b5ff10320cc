//! Test-only oracles, independent of the library's update paths, and shared
//! random instance builders.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refcmfs_core::{DataMatrix, FitResult, MembershipMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Euclidean distance by explicit coordinate loop.
pub fn naive_distance(x: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for j in 0..x.len() {
        let diff = x[j] - b[j];
        acc += diff * diff;
    }
    acc.sqrt()
}

/// `Σ_i Σ_k dist(x_i, b_k)^power · α_ik^r` by triple loop.
pub fn triple_loop_objective(
    data: &[Vec<f64>],
    centroids: &[Vec<f64>],
    membership: &[Vec<f64>],
    r: f64,
    power: i32,
) -> f64 {
    let mut total = 0.0;
    for i in 0..data.len() {
        for k in 0..centroids.len() {
            let mut sq = 0.0;
            for j in 0..data[i].len() {
                sq += (data[i][j] - centroids[k][j]).powi(2);
            }
            let dist = if power == 2 { sq } else { sq.sqrt() };
            total += dist * membership[i][k].powf(r);
        }
    }
    total
}

pub fn to_rows(values: &[f64], width: usize) -> Vec<Vec<f64>> {
    values.chunks(width).map(|c| c.to_vec()).collect()
}

/// All `k`-subsets of `0..c`.
pub fn subsets(c: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, c: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..c {
            cur.push(i);
            rec(i + 1, c, k, cur, out);
            cur.pop();
        }
    }
    rec(0, c, k, &mut cur, &mut out);
    out
}

/// Best `Σ h_k α_k^r` over every `k_tilde`-support and every simplex grid
/// point on it at resolution `1/steps`. Returns the value and its support.
pub fn grid_search_membership(
    h: &[f64],
    k_tilde: usize,
    r: f64,
    steps: usize,
) -> (f64, Vec<usize>) {
    let pow: Vec<f64> = (0..=steps)
        .map(|j| (j as f64 / steps as f64).powf(r))
        .collect();
    let mut best = (f64::INFINITY, Vec::new());
    for support in subsets(h.len(), k_tilde) {
        let v = match support.len() {
            1 => h[support[0]],
            2 => {
                let (a, b) = (h[support[0]], h[support[1]]);
                (0..=steps)
                    .map(|j| a * pow[j] + b * pow[steps - j])
                    .fold(f64::INFINITY, f64::min)
            }
            3 => {
                let (a, b, e) = (h[support[0]], h[support[1]], h[support[2]]);
                let mut m = f64::INFINITY;
                for j1 in 0..=steps {
                    let base = a * pow[j1];
                    for j2 in 0..=steps - j1 {
                        let v = base + b * pow[j2] + e * pow[steps - j1 - j2];
                        if v < m {
                            m = v;
                        }
                    }
                }
                m
            }
            _ => unimplemented!("grid oracle covers supports of size 1 to 3"),
        };
        if v < best.0 {
            best = (v, support);
        }
    }
    best
}

/// Uniform draw from the simplex over `support` (normalized exponentials).
pub fn random_simplex_row(c: usize, support: &[usize], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut row = vec![0.0; c];
    let mut total = 0.0;
    for &k in support {
        let e = -(1.0 - rng.gen::<f64>()).ln();
        row[k] = e;
        total += e;
    }
    for &k in support {
        row[k] /= total;
    }
    row
}

/// Accuracy by trying every injective relabeling of predicted clusters.
pub fn brute_force_accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let cp = pred.iter().max().unwrap() + 1;
    let ct = truth.iter().max().unwrap() + 1;
    let size = cp.max(ct);
    let mut perm: Vec<usize> = (0..size).collect();
    let mut best = 0;
    permute(&mut perm, 0, &mut |p| {
        let hits = pred
            .iter()
            .zip(truth)
            .filter(|(&a, &b)| p[a] < ct && p[a] == b)
            .count();
        best = best.max(hits);
    });
    best as f64 / pred.len() as f64
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

pub fn hash_counts(pred: &[usize], truth: &[usize]) -> HashMap<(usize, usize), u64> {
    let mut m = HashMap::new();
    for (&a, &b) in pred.iter().zip(truth) {
        *m.entry((a, b)).or_insert(0) += 1;
    }
    m
}

/// NMI from explicit probabilities `p(a,b)`, `p(a)`, `p(b)` (natural logs
/// converted to bits), normalized by the larger entropy.
pub fn direct_nmi(pred: &[usize], truth: &[usize]) -> f64 {
    let n = pred.len() as f64;
    let joint = hash_counts(pred, truth);
    let mut pa: HashMap<usize, f64> = HashMap::new();
    let mut pb: HashMap<usize, f64> = HashMap::new();
    for (&a, &b) in pred.iter().zip(truth) {
        *pa.entry(a).or_insert(0.0) += 1.0 / n;
        *pb.entry(b).or_insert(0.0) += 1.0 / n;
    }
    let mut mi = 0.0;
    for (&(a, b), &cnt) in &joint {
        let p = cnt as f64 / n;
        mi += p * (p / (pa[&a] * pb[&b])).ln() / std::f64::consts::LN_2;
    }
    let ent = |m: &HashMap<usize, f64>| -> f64 {
        m.values()
            .map(|&p| -p * p.ln() / std::f64::consts::LN_2)
            .sum()
    };
    let (const_a, const_b) = (pa.len() == 1, pb.len() == 1);
    let norm = ent(&pa).max(ent(&pb));
    if const_a && const_b {
        1.0
    } else if const_a || const_b {
        0.0
    } else {
        mi / norm
    }
}

pub fn random_labels(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..k)).collect()
}

/// A random instance: `c_true` Gaussian-ish groups at random offsets.
pub fn random_data(rng: &mut ChaCha8Rng, n: usize, d: usize, c_true: usize) -> DataMatrix {
    let centers: Vec<Vec<f64>> = (0..c_true)
        .map(|_| (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect())
        .collect();
    let mut values = Vec::with_capacity(n * d);
    for i in 0..n {
        let c = &centers[i % c_true];
        for j in 0..d {
            let noise: f64 = (0..4).map(|_| rng.gen_range(-1.0..1.0)).sum::<f64>() * 0.5;
            values.push(c[j] + noise);
        }
    }
    DataMatrix::new(values, n, d).unwrap()
}

/// Shared invariant check on every fit.
pub fn check_fit(res: &FitResult, n: usize, c: usize, k_tilde: usize) {
    let m: &MembershipMatrix = &res.membership;
    assert_eq!((m.n(), m.cluster_count(), m.k_tilde()), (n, c, k_tilde));
    m.check().unwrap();
    for i in 0..n {
        if m.nonzeros(i) != k_tilde {
            assert!(
                m.is_degenerate(i),
                "row {i} lost support without a degeneracy event"
            );
            assert!(res.diagnostics.degenerate_rows > 0);
        }
    }
    assert_eq!(res.labels, m.labels());
    assert_eq!(res.iterations, res.objective_trace.len());
    check_monotone(&res.objective_trace);
}

pub fn check_monotone(trace: &[f64]) {
    for w in trace.windows(2) {
        assert!(
            w[1] <= w[0] + 1e-9,
            "objective rose from {} to {}",
            w[0],
            w[1]
        );
    }
}

/// Same partition up to a relabeling.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    let mut fwd = HashMap::new();
    let mut back = HashMap::new();
    a.iter()
        .zip(b)
        .all(|(&x, &y)| *fwd.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x)
}
