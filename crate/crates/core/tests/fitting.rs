mod common;

use common::*;
use rand::Rng;
use refcmfs_core::baselines::{
    baseline_objective, fcm_fit, kmeans_fit, sim_refcmfs_fit, squared_objective, Baseline,
    BaselineConfig,
};
use refcmfs_core::refcmfs::{
    self, fit, objective, update_centroids, update_weights, Loss, Model, Solver,
};
use refcmfs_core::{CentroidMatrix, DataMatrix, FitConfig, Init, MembershipMatrix};

fn random_config(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> FitConfig {
    let c = rng.gen_range(2..=8usize.min(n));
    let mut cfg = FitConfig::new(c, rng.gen_range(1..=c));
    cfg.fuzzifier = [1.1, 1.5, 2.0][rng.gen_range(0..3)];
    cfg.rng_seed = rng.gen();
    if rng.gen_bool(0.5) {
        cfg.init = Init::RandomSamples;
    }
    cfg
}

#[test]
fn refcmfs_descends_on_random_instances() {
    let mut rng = rng(21);
    for _ in 0..100 {
        let n = rng.gen_range(20..=200);
        let d = rng.gen_range(2..=10);
        let groups = rng.gen_range(1..6);
        let data = random_data(&mut rng, n, d, groups);
        let cfg = random_config(&mut rng, n);
        let res = fit(&data, &cfg).unwrap();
        check_fit(&res, n, cfg.cluster_count, cfg.k_tilde);
        assert_eq!(
            objective(&data, &res.centroids, &res.membership, cfg.fuzzifier).unwrap(),
            res.final_objective()
        );
    }
}

#[test]
fn baselines_descend_on_random_instances() {
    let mut rng = rng(22);
    for _ in 0..100 {
        let n = rng.gen_range(20..=200);
        let d = rng.gen_range(2..=10);
        let groups = rng.gen_range(1..6);
        let data = random_data(&mut rng, n, d, groups);
        let base = random_config(&mut rng, n);
        let c = base.cluster_count;
        for variant in [
            Baseline::KMeans,
            Baseline::Fcm {
                fuzzifier: base.fuzzifier,
            },
            Baseline::SimRefcmfs {
                fuzzifier: base.fuzzifier,
                k_tilde: base.k_tilde,
            },
        ] {
            let mut cfg = BaselineConfig::new(variant, c);
            cfg.init = base.init.clone();
            cfg.rng_seed = base.rng_seed;
            let res = refcmfs_core::baselines::fit_baseline(&data, &cfg).unwrap();
            let k = match variant {
                Baseline::KMeans => 1,
                Baseline::Fcm { .. } => c,
                Baseline::SimRefcmfs { k_tilde, .. } => k_tilde,
            };
            check_fit(&res, n, c, k);
            assert_eq!(
                baseline_objective(&variant, &data, &res.centroids, &res.membership).unwrap(),
                res.final_objective()
            );
        }
    }
}

#[test]
fn objectives_match_triple_loop() {
    let mut rng = rng(23);
    for _ in 0..30 {
        let (n, d, c) = (
            rng.gen_range(5..40),
            rng.gen_range(1..6),
            rng.gen_range(1..6),
        );
        let data = random_data(&mut rng, n, d, 2);
        let cents: Vec<Vec<f64>> = (0..c)
            .map(|_| (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect())
            .collect();
        let k_tilde = rng.gen_range(1..=c);
        let mut values = Vec::new();
        for _ in 0..n {
            let support: Vec<usize> = rand::seq::index::sample(&mut rng, c, k_tilde).into_vec();
            values.extend(random_simplex_row(c, &support, &mut rng));
        }
        let r = rng.gen_range(1.05..3.0);
        let m = MembershipMatrix::new(values.clone(), n, c, k_tilde).unwrap();
        let b = CentroidMatrix::from_rows(&cents).unwrap();
        let rows = to_rows(data.as_slice(), d);
        let mrows = to_rows(&values, c);
        let l21 = objective(&data, &b, &m, r).unwrap();
        let oracle = triple_loop_objective(&rows, &cents, &mrows, r, 1);
        assert!((l21 - oracle).abs() <= 1e-10 * oracle);
        let sq = squared_objective(&data, &b, &m, r).unwrap();
        let oracle = triple_loop_objective(&rows, &cents, &mrows, r, 2);
        assert!((sq - oracle).abs() <= 1e-10 * oracle);
    }
}

#[test]
fn one_hot_uniform_weights_give_cluster_means() {
    let data = DataMatrix::from_rows(&[
        [0.0, 0.0],
        [2.0, 0.0],
        [10.0, 10.0],
        [10.0, 12.0],
        [11.0, 11.0],
    ])
    .unwrap();
    let m = MembershipMatrix::new(
        vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
        5,
        2,
        1,
    )
    .unwrap();
    // Equidistant centroids make every weight identical within a cluster.
    let b = CentroidMatrix::from_rows(&[[1.0, 0.0], [10.0 + 0.0, 11.0]]).unwrap();
    let s = update_weights(&data, &b).unwrap();
    assert_eq!(s.get(0, 0), s.get(1, 0));
    assert_eq!(s.get(2, 1), s.get(3, 1));
    let up = update_centroids(&data, &m, &s, 1.3, &b).unwrap();
    assert!((up.centroids.row(0)[0] - 1.0).abs() < 1e-12 && up.centroids.row(0)[1] == 0.0);
    // Cluster 1 weights are 1/2, 1/2 and 1/(2·1): weighted mean computed by hand.
    let w = [0.5, 0.5, 0.5];
    let pts = [[10.0, 10.0], [10.0, 12.0], [11.0, 11.0]];
    let expect_x = (0..3).map(|i| w[i] * pts[i][0]).sum::<f64>() / 1.5;
    assert!((up.centroids.row(1)[0] - expect_x).abs() < 1e-12);
}

#[test]
fn single_cluster_centroid_matches_naive_weighted_mean() {
    let mut rng = rng(24);
    let data = random_data(&mut rng, 30, 3, 1);
    let b = CentroidMatrix::from_rows(&[[0.3, -0.2, 0.1]]).unwrap();
    let m = MembershipMatrix::new(vec![1.0; 30], 30, 1, 1).unwrap();
    let s = update_weights(&data, &b).unwrap();
    let up = update_centroids(&data, &m, &s, 1.1, &b).unwrap();
    let mut num = [0.0; 3];
    let mut den = 0.0;
    for x in data.rows() {
        let w = 1.0 / (2.0 * naive_distance(x, b.row(0)));
        den += w;
        for j in 0..3 {
            num[j] += w * x[j];
        }
    }
    for j in 0..3 {
        assert!((up.centroids.row(0)[j] - num[j] / den).abs() < 1e-12);
    }
}

#[test]
fn fits_are_deterministic_per_seed() {
    let mut rng = rng(25);
    let data = random_data(&mut rng, 120, 4, 3);
    let mut cfg = FitConfig::new(4, 2);
    cfg.rng_seed = 99;
    assert_eq!(fit(&data, &cfg).unwrap(), fit(&data, &cfg).unwrap());
}

#[test]
fn relabeling_centroids_permutes_memberships() {
    let mut rng = rng(26);
    for _ in 0..10 {
        let data = random_data(&mut rng, 80, 3, 4);
        let c = 4;
        let b = refcmfs_core::baselines::random_samples_seed(&data, c, rng.gen()).unwrap();
        let perm = [2, 0, 3, 1];
        let mut cfg = FitConfig::new(c, 2);
        cfg.init = Init::Explicit(b.clone());
        let a = fit(&data, &cfg).unwrap();
        cfg.init = Init::Explicit(b.permuted(&perm).unwrap());
        let p = fit(&data, &cfg).unwrap();
        assert_eq!(a.iterations, p.iterations);
        for i in 0..data.n() {
            for (k, &src) in perm.iter().enumerate() {
                assert_eq!(p.membership.get(i, k), a.membership.get(i, src));
            }
            assert_eq!(perm[p.labels[i]], a.labels[i]);
        }
        for (x, y) in a.objective_trace.iter().zip(&p.objective_trace) {
            assert!((x - y).abs() <= 1e-12 * x.max(1.0));
        }
    }
}

#[test]
fn sim_with_one_nonzero_matches_kmeans_assignment() {
    let mut rng = rng(27);
    let data = random_data(&mut rng, 100, 2, 3);
    let b = refcmfs_core::baselines::kmeanspp_seed(&data, 3, 5).unwrap();
    let mut km = BaselineConfig::new(Baseline::KMeans, 3);
    km.init = Init::Explicit(b.clone());
    let mut sim = BaselineConfig::new(
        Baseline::SimRefcmfs {
            fuzzifier: 1.1,
            k_tilde: 1,
        },
        3,
    );
    sim.init = Init::Explicit(b);
    let k = kmeans_fit(&data, &km).unwrap();
    let s = sim_refcmfs_fit(&data, &sim).unwrap();
    assert_eq!(k.labels, s.labels);
    assert_eq!(k.centroids, s.centroids);
}

#[test]
fn squared_and_plain_losses_pick_identical_supports() {
    let mut rng = rng(28);
    for _ in 0..20 {
        let data = random_data(&mut rng, 60, 3, 3);
        let c = rng.gen_range(2..6);
        let k_tilde = rng.gen_range(1..=c);
        let b = refcmfs_core::baselines::random_samples_seed(&data, c, rng.gen()).unwrap();
        let model = |loss| Model {
            loss,
            k_tilde,
            fuzzifier: 1.3,
        };
        let mut l21 = Solver::new(&data, model(Loss::L21), b.clone()).unwrap();
        let mut sq = Solver::new(&data, model(Loss::Squared), b).unwrap();
        l21.assign();
        sq.assign();
        let (a, s) = (l21.membership().unwrap(), sq.membership().unwrap());
        for i in 0..data.n() {
            let sa: Vec<bool> = a.row(i).iter().map(|&v| v > 0.0).collect();
            let ss: Vec<bool> = s.row(i).iter().map(|&v| v > 0.0).collect();
            assert_eq!(sa, ss);
        }
    }
}

#[test]
fn fcm_gets_fuzzier_as_r_grows() {
    let data =
        DataMatrix::from_rows(&[[0.0, 0.0], [0.4, 0.1], [1.5, 0.2], [3.0, 0.0], [3.3, -0.2]])
            .unwrap();
    let b = CentroidMatrix::from_rows(&[[0.2, 0.0], [3.1, 0.0]]).unwrap();
    let mut prev = 0.0;
    for step in 0..=29 {
        let r = 1.1 + 0.1 * step as f64;
        let mut cfg = BaselineConfig::new(Baseline::Fcm { fuzzifier: r }, 2);
        cfg.init = Init::Explicit(b.clone());
        cfg.max_iter = 1;
        let res = fcm_fit(&data, &cfg).unwrap();
        let entropy: f64 = res
            .membership
            .rows()
            .flat_map(|row| row.iter())
            .filter(|&&a| a > 0.0)
            .map(|&a| -a * a.ln())
            .sum();
        assert!(entropy >= prev - 1e-12, "r = {r}: {entropy} < {prev}");
        prev = entropy;
    }
}

#[test]
fn trace_starts_at_the_first_assignment() {
    let mut rng = rng(29);
    let data = random_data(&mut rng, 50, 2, 3);
    let mut cfg = FitConfig::new(3, 2);
    cfg.rng_seed = 4;
    let res = fit(&data, &cfg).unwrap();
    let b0 = refcmfs_core::baselines::kmeanspp_seed(&data, 3, 4).unwrap();
    let mut solver = Solver::new(
        &data,
        Model {
            loss: Loss::L21,
            k_tilde: 2,
            fuzzifier: 1.1,
        },
        b0.clone(),
    )
    .unwrap();
    solver.assign();
    let m0 = solver.membership().unwrap();
    assert_eq!(
        res.objective_trace[0],
        refcmfs::objective(&data, &b0, m0, 1.1).unwrap()
    );
}

#[test]
fn starved_cluster_is_reseeded_and_descent_holds() {
    // Third centroid far from everything: it never receives membership.
    let data = DataMatrix::from_rows(&[[0.0], [0.1], [0.2], [5.0], [5.1], [5.3]]).unwrap();
    let b = CentroidMatrix::from_rows(&[[0.0], [5.0], [1000.0]]).unwrap();
    let mut cfg = FitConfig::new(3, 1);
    cfg.init = Init::Explicit(b);
    let res = fit(&data, &cfg).unwrap();
    assert!(!res.diagnostics.reseeds.is_empty());
    assert_eq!(res.diagnostics.reseeds[0].cluster, 2);
    check_fit(&res, 6, 3, 1);
}

#[test]
fn centroid_seeded_on_a_sample_reaches_the_median() {
    // The 1-D L2,1 centroid of a cluster is its median, here 1 and 101.
    let data = DataMatrix::from_rows(&[
        vec![0.0],
        vec![1.0],
        vec![2.0],
        vec![100.0],
        vec![101.0],
        vec![102.5],
    ])
    .unwrap();
    let mut cfg = FitConfig::new(2, 1);
    cfg.init = Init::Explicit(CentroidMatrix::from_rows(&[vec![0.0], vec![102.5]]).unwrap());
    let res = fit(&data, &cfg).unwrap();
    check_fit(&res, 6, 2, 1);
    assert!((res.centroids.row(0)[0] - 1.0).abs() < 1e-6, "{:?}", res.centroids);
    assert!((res.centroids.row(1)[0] - 101.0).abs() < 1e-6, "{:?}", res.centroids);
    assert!(res.final_objective() < res.objective_trace[0]);
}
