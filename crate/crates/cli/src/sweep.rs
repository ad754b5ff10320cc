//! Grid sweeps over `(k_tilde, r)` with several seeds per grid point.

use std::fmt::Write;

use rayon::prelude::*;

use crate::args::SweepArgs;
use crate::error::CliError;
use crate::run::{load_dataset, run_on, RunConfig};

/// Outcome of one `(k_tilde, r, seed)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub k_tilde: usize,
    pub r: f64,
    pub seed: u64,
    pub outcome: Result<RunSummary, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub acc: Option<f64>,
    pub nmi: Option<f64>,
    pub final_objective: f64,
    pub iterations: usize,
}

/// Mean and sample standard deviation over the successful runs of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k_tilde: usize,
    pub r: f64,
    pub runs: usize,
    pub failed: usize,
    pub acc: Option<(f64, f64)>,
    pub nmi: Option<(f64, f64)>,
    pub objective: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub runs: Vec<SweepRun>,
    pub rows: Vec<SweepRow>,
}

pub fn k_tilde_grid(args: &SweepArgs) -> Vec<usize> {
    match &args.k_tilde_grid {
        Some(grid) => grid.clone(),
        None => (2..args.common.c).collect(),
    }
}

pub fn sweep(args: &SweepArgs) -> Result<SweepResult, CliError> {
    let base = RunConfig::from_args(&args.common)?;
    let k_grid = k_tilde_grid(args);
    if k_grid.is_empty() || args.r_grid.is_empty() || args.seeds == 0 {
        return Err(CliError::InvalidConfig(
            "sweep grids and seed count must be non-empty".to_string(),
        ));
    }
    let ds = load_dataset(&base)?;

    let mut cells = Vec::new();
    for &k in &k_grid {
        for &r in &args.r_grid {
            for s in 0..args.seeds {
                cells.push((k, r, base.seed.wrapping_add(s)));
            }
        }
    }
    // Collected in grid order regardless of completion order.
    let runs: Vec<SweepRun> = cells
        .par_iter()
        .map(|&(k_tilde, r, seed)| {
            let mut cfg = base.clone();
            cfg.k_tilde = Some(k_tilde);
            cfg.r = r;
            cfg.seed = seed;
            let outcome = run_on(&ds, &cfg)
                .map(|(report, _)| RunSummary {
                    acc: report.acc,
                    nmi: report.nmi,
                    final_objective: report.final_objective,
                    iterations: report.iterations,
                })
                .map_err(|e| e.to_string());
            SweepRun {
                k_tilde,
                r,
                seed,
                outcome,
            }
        })
        .collect();

    let per_point = args.seeds as usize;
    let rows = runs.chunks(per_point).map(aggregate).collect();
    Ok(SweepResult { runs, rows })
}

fn aggregate(runs: &[SweepRun]) -> SweepRow {
    let ok: Vec<&RunSummary> = runs
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .collect();
    let stat = |f: &dyn Fn(&RunSummary) -> Option<f64>| -> Option<(f64, f64)> {
        let vals: Option<Vec<f64>> = ok.iter().map(|s| f(s)).collect();
        mean_std(&vals?)
    };
    SweepRow {
        k_tilde: runs[0].k_tilde,
        r: runs[0].r,
        runs: runs.len(),
        failed: runs.len() - ok.len(),
        acc: stat(&|s| s.acc),
        nmi: stat(&|s| s.nmi),
        objective: stat(&|s| Some(s.final_objective)),
    }
}

/// Mean and sample standard deviation; the deviation of a single value is 0.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn pair(v: Option<(f64, f64)>) -> String {
    match v {
        Some((m, s)) => format!("{m},{s}"),
        None => ",".to_string(),
    }
}

pub fn table_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "k_tilde,r,runs,failed,acc_mean,acc_std,nmi_mean,nmi_std,objective_mean,objective_std\n",
    );
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.k_tilde,
            row.r,
            row.runs,
            row.failed,
            pair(row.acc),
            pair(row.nmi),
            pair(row.objective)
        )
        .unwrap();
    }
    out
}

pub fn runs_csv(runs: &[SweepRun]) -> String {
    let mut out = String::from("k_tilde,r,seed,status,acc,nmi,final_objective,iterations\n");
    for run in runs {
        match &run.outcome {
            Ok(s) => writeln!(
                out,
                "{},{},{},ok,{},{},{},{}",
                run.k_tilde,
                run.r,
                run.seed,
                opt(s.acc),
                opt(s.nmi),
                s.final_objective,
                s.iterations
            ),
            Err(e) => writeln!(
                out,
                "{},{},{},\"error: {}\",,,,",
                run.k_tilde,
                run.r,
                run.seed,
                e.replace('"', "'")
            ),
        }
        .unwrap();
    }
    out
}
