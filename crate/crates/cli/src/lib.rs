//! Command-line front end: single fits, parameter sweeps, scaling benchmarks
//! and convergence traces.

pub mod args;
pub mod bench;
pub mod error;
pub mod run;
pub mod sweep;

use std::fmt::Write;

use refcmfs_core::data_io::{generate_blobs, write_csv_to, BlobCluster, BlobSpec};

use args::{Cli, Command, GenerateArgs, TraceArgs};
pub use error::CliError;
use run::{run, write_output, RunConfig};

/// Runs a parsed command, writing its output to `--out` or stdout.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Fit(a) => {
            let (report, _) = run(&RunConfig::from_args(&a.common)?)?;
            write_output(a.common.out.as_deref(), &report.to_json())
        }
        Command::Sweep(a) => {
            let result = sweep::sweep(a)?;
            if let Some(path) = &a.runs_out {
                std::fs::write(path, sweep::runs_csv(&result.runs))?;
            }
            write_output(a.common.out.as_deref(), &sweep::table_csv(&result.rows))
        }
        Command::Bench(a) => {
            let report = bench::bench(a)?;
            write_output(a.out.as_deref(), &bench::bench_csv(&report))
        }
        Command::Trace(a) => {
            let (text, report) = trace(a)?;
            if let Some(path) = &a.report {
                std::fs::write(path, report.to_json())?;
            }
            write_output(a.common.out.as_deref(), &text)
        }
        Command::Generate(a) => write_output(a.out.as_deref(), &generate(a)?),
    }
}

/// Two whitespace-separated columns: 1-based iteration and objective.
pub fn trace(args: &TraceArgs) -> Result<(String, run::RunReport), CliError> {
    let (report, _) = run(&RunConfig::from_args(&args.common)?)?;
    let mut text = String::from("# iteration objective\n");
    for (t, obj) in report.objective_trace.iter().enumerate() {
        writeln!(text, "{} {}", t + 1, obj).unwrap();
    }
    Ok((text, report))
}

pub fn parse_centers(spec: &str) -> Result<Vec<Vec<f64>>, CliError> {
    spec.split(';')
        .map(|c| {
            c.split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|_| {
                        CliError::InvalidConfig(format!("bad center coordinate {v:?}"))
                    })
                })
                .collect()
        })
        .collect()
}

pub fn generate(args: &GenerateArgs) -> Result<String, CliError> {
    let centers = parse_centers(&args.centers)?;
    let spec = BlobSpec {
        clusters: centers
            .into_iter()
            .map(|center| BlobCluster {
                center,
                stdev: args.stdev,
                count: args.count,
            })
            .collect(),
        outlier_count: args.outliers,
        outlier_box_scale: args.box_scale,
        rng_seed: args.seed,
    };
    let ds = generate_blobs(&spec)?;
    let mut buf = Vec::new();
    write_csv_to(&mut buf, &ds)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
