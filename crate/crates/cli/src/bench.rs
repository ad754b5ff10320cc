//! Fixed-iteration timing on synthetic data of increasing size.

use std::fmt::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refcmfs_core::baselines::random_samples_seed;
use refcmfs_core::data_io::{generate_blobs, BlobCluster, BlobSpec};
use refcmfs_core::refcmfs::{Loss, Model, Solver};
use refcmfs_core::DataMatrix;

use crate::args::BenchArgs;
use crate::error::CliError;
use crate::run::Algorithm;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub seconds: f64,
    pub seconds_per_iteration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub d: usize,
    pub c: usize,
    pub k_tilde: usize,
    pub iterations: usize,
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of log(time) against log(n); absent for one size.
    pub slope: Option<f64>,
}

fn synthetic(n: usize, d: usize, c: usize, seed: u64) -> Result<DataMatrix, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clusters = (0..c)
        .map(|j| BlobCluster {
            center: (0..d).map(|_| rng.gen_range(-10.0..10.0)).collect(),
            stdev: 1.0,
            count: n / c + usize::from(j < n % c),
        })
        .collect();
    let spec = BlobSpec {
        clusters,
        outlier_count: 0,
        outlier_box_scale: 2.0,
        rng_seed: seed,
    };
    Ok(generate_blobs(&spec)?.data)
}

pub fn bench(args: &BenchArgs) -> Result<BenchReport, CliError> {
    let algorithm = Algorithm::parse(&args.algo)?;
    if args.sizes.is_empty() || args.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::InvalidConfig(
            "--sizes must be non-empty and strictly ascending".into(),
        ));
    }
    if args.iters == 0 || args.repeats == 0 {
        return Err(CliError::InvalidConfig(
            "--iters and --repeats must be positive".into(),
        ));
    }
    let (loss, k_tilde) = match algorithm {
        Algorithm::Refcmfs => (Loss::L21, args.k_tilde),
        Algorithm::SimRefcmfs => (Loss::Squared, args.k_tilde),
        Algorithm::Fcm => (Loss::Squared, args.c),
        Algorithm::KMeans => (Loss::Squared, 1),
    };
    let model = Model {
        loss,
        k_tilde,
        fuzzifier: args.r,
    };

    let mut problems = Vec::new();
    for &n in &args.sizes {
        if n < args.c {
            return Err(CliError::InvalidConfig(format!(
                "size {n} is smaller than c = {}",
                args.c
            )));
        }
        let data = synthetic(n, args.d, args.c, args.seed)?;
        let init = random_samples_seed(&data, args.c, args.seed)?;
        problems.push((data, init));
    }
    // Sizes are interleaved within each repeat so slow spells on a shared
    // machine do not land on a single size.
    let mut best = vec![f64::INFINITY; problems.len()];
    for _ in 0..args.repeats {
        for ((data, init), best) in problems.iter().zip(&mut best) {
            let mut solver = Solver::new(data, model, init.clone())?;
            let start = Instant::now();
            for _ in 0..args.iters {
                solver.assign();
                solver.update_centroids();
            }
            *best = best.min(start.elapsed().as_secs_f64());
        }
    }
    let rows: Vec<BenchRow> = args
        .sizes
        .iter()
        .zip(best)
        .map(|(&n, best)| {
            // Clock resolution floor keeps timings strictly positive.
            let seconds = best.max(1e-9);
            BenchRow {
                n,
                seconds,
                seconds_per_iteration: seconds / args.iters as f64,
            }
        })
        .collect();
    let slope = (rows.len() >= 2).then(|| log_log_slope(&rows));
    Ok(BenchReport {
        d: args.d,
        c: args.c,
        k_tilde,
        iterations: args.iters,
        rows,
        slope,
    })
}

pub fn log_log_slope(rows: &[BenchRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n as f64).ln(), r.seconds_per_iteration.ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn bench_csv(report: &BenchReport) -> String {
    let mut out = String::from("n,d,c,k_tilde,iterations,seconds,seconds_per_iteration\n");
    for row in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.n,
            report.d,
            report.c,
            report.k_tilde,
            report.iterations,
            row.seconds,
            row.seconds_per_iteration
        )
        .unwrap();
    }
    if let Some(slope) = report.slope {
        writeln!(out, "# log-log slope: {slope}").unwrap();
    }
    out
}
