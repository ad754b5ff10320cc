use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use refcmfs_cli::run::{run, RunConfig, RunReport};
use refcmfs_cli::sweep::mean_std;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_refcmfs"))
}

fn exec(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn blob_csv(dir: &Path) -> PathBuf {
    let path = dir.join("blobs.csv");
    let out = exec(&[
        "generate",
        "--centers",
        "0,0;6,0;3,5",
        "--stdev",
        "0.4",
        "--count",
        "40",
        "--outliers",
        "6",
        "--seed",
        "11",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

fn error_line(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let lines: Vec<&str> = stderr.lines().collect();
    assert_eq!(lines.len(), 1, "expected one stderr line, got {stderr:?}");
    serde_json::from_str(lines[0]).expect("stderr line is json")
}

#[test]
fn unsupported_baseline_exits_with_code_1() {
    let dir = tempfile::tempdir().unwrap();
    let data = blob_csv(dir.path());
    for algo in ["rsfkm", "gmm", "sc"] {
        let out = exec(&[
            "fit",
            "--data",
            data.to_str().unwrap(),
            "--c",
            "3",
            "--algo",
            algo,
        ]);
        assert_eq!(out.status.code(), Some(1));
        let err = error_line(&out);
        assert_eq!(err["error"], "unsupported_baseline");
        assert!(err["message"]
            .as_str()
            .unwrap()
            .contains("unsupported baseline"));
    }
    let out = exec(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--c",
        "3",
        "--algo",
        "nope",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_line(&out)["error"], "unknown_algorithm");
}

#[test]
fn malformed_dataset_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "1.0,2.0\n3.0,abc\n").unwrap();
    let out = exec(&[
        "fit",
        "--data",
        path.to_str().unwrap(),
        "--c",
        "2",
        "--k-tilde",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = error_line(&out);
    assert_eq!(err["error"], "dataset_parse");
    assert_eq!(err["code"], 2);

    let ragged = dir.path().join("ragged.csv");
    std::fs::write(&ragged, "1,2\n3\n").unwrap();
    let out = exec(&[
        "fit",
        "--data",
        ragged.to_str().unwrap(),
        "--c",
        "2",
        "--k-tilde",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = exec(&["fit", "--data", "/definitely/missing.csv", "--c", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_config_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let data = blob_csv(dir.path());
    let data = data.to_str().unwrap();
    let cases: &[&[&str]] = &[
        &["fit", "--data", data, "--c", "3", "--k-tilde", "4"],
        &[
            "fit",
            "--data",
            data,
            "--c",
            "3",
            "--k-tilde",
            "2",
            "--r",
            "1.0",
        ],
        &["fit", "--data", data, "--c", "1", "--k-tilde", "1"],
        &[
            "fit",
            "--data",
            data,
            "--c",
            "3",
            "--k-tilde",
            "2",
            "--tol",
            "0",
        ],
        &["fit", "--data", data, "--c", "3"],
        &[
            "fit",
            "--data",
            data,
            "--c",
            "3",
            "--k-tilde",
            "2",
            "--labels-col",
            "x",
        ],
        &["fit", "--data", data, "--c", "3", "--not-a-flag"],
        &["sweep", "--data", data, "--c", "2"],
    ];
    for args in cases {
        let out = exec(args);
        assert_eq!(out.status.code(), Some(3), "{args:?}");
        assert_eq!(error_line(&out)["error"], "invalid_config", "{args:?}");
    }
}

fn fit_report(data: &Path, extra: &[&str]) -> RunReport {
    let mut args = vec![
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--labels-col",
        "last",
        "--c",
        "3",
    ];
    args.extend_from_slice(extra);
    let out = exec(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("report parses")
}

#[test]
fn fits_are_deterministic_for_every_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let data = blob_csv(dir.path());
    for extra in [
        &["--algo", "refcmfs", "--k-tilde", "2", "--seed", "5"][..],
        &["--algo", "sim-refcmfs", "--k-tilde", "2", "--seed", "5"],
        &["--algo", "fcm", "--init", "random", "--seed", "5"],
        &["--algo", "kmeans", "--normalize", "zscore", "--seed", "5"],
    ] {
        let a = fit_report(&data, extra);
        let b = fit_report(&data, extra);
        assert_eq!(a.to_json_without_timing(), b.to_json_without_timing());
        assert!(a.acc.is_some() && a.nmi.is_some());
    }
}

#[test]
fn report_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let data = blob_csv(dir.path());
    let out_path = dir.path().join("report.json");
    let out = exec(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--labels-col",
        "last",
        "--c",
        "3",
        "--k-tilde",
        "2",
        "--r",
        "1.3",
        "--seed",
        "9",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report: RunReport =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let config: RunConfig = report.config.clone();
    let (again, result) = run(&config).unwrap();
    assert_eq!(again.acc, report.acc);
    assert_eq!(again.nmi, report.nmi);
    assert_eq!(again.objective_trace, report.objective_trace);
    assert_eq!(report.iterations, report.objective_trace.len());
    assert_eq!(result.final_objective(), report.final_objective);
}

fn parse_table(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn sweep_aggregates_per_run_results() {
    let dir = tempfile::tempdir().unwrap();
    let data = blob_csv(dir.path());
    let runs_path = dir.path().join("runs.csv");
    let out = exec(&[
        "sweep",
        "--data",
        data.to_str().unwrap(),
        "--labels-col",
        "last",
        "--c",
        "4",
        "--k-tilde-grid",
        "2,3",
        "--r-grid",
        "1.1,1.4",
        "--seeds",
        "3",
        "--runs-out",
        runs_path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = parse_table(&String::from_utf8(out.stdout).unwrap());
    let runs = parse_table(&std::fs::read_to_string(&runs_path).unwrap());
    assert_eq!(rows.len(), 4);
    assert_eq!(runs.len(), 12);

    for row in &rows {
        let members: Vec<&Vec<String>> = runs
            .iter()
            .filter(|r| r[0] == row[0] && r[1] == row[1])
            .collect();
        assert_eq!(members.len(), 3);
        assert_eq!(row[2], "3");
        assert_eq!(row[3], "0");
        for (col, run_col) in [(4, 4), (6, 5), (8, 6)] {
            let vals: Vec<f64> = members
                .iter()
                .map(|r| r[run_col].parse().unwrap())
                .collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let sd = (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt();
            let got_mean: f64 = row[col].parse().unwrap();
            let got_sd: f64 = row[col + 1].parse().unwrap();
            assert!((got_mean - mean).abs() <= 1e-12 * mean.abs().max(1.0));
            assert!((got_sd - sd).abs() <= 1e-12 * sd.abs().max(1.0));
        }
    }
}

#[test]
fn single_point_sweep_matches_fit() {
    let dir = tempfile::tempdir().unwrap();
    let data = blob_csv(dir.path());
    let out = exec(&[
        "sweep",
        "--data",
        data.to_str().unwrap(),
        "--labels-col",
        "last",
        "--c",
        "3",
        "--k-tilde-grid",
        "2",
        "--r-grid",
        "1.2",
        "--seeds",
        "1",
        "--seed",
        "4",
    ]);
    assert!(out.status.success());
    let rows = parse_table(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 1);
    let fit = fit_report(&data, &["--k-tilde", "2", "--r", "1.2", "--seed", "4"]);
    assert_eq!(rows[0][4].parse::<f64>().unwrap(), fit.acc.unwrap());
    assert_eq!(rows[0][5], "0");
    assert_eq!(rows[0][6].parse::<f64>().unwrap(), fit.nmi.unwrap());
    assert_eq!(rows[0][8].parse::<f64>().unwrap(), fit.final_objective);
}

#[test]
fn trace_is_monotone_and_matches_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = blob_csv(dir.path());
    let report_path = dir.path().join("r.json");
    let out = exec(&[
        "trace",
        "--data",
        data.to_str().unwrap(),
        "--c",
        "3",
        "--k-tilde",
        "2",
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# iteration objective"));
    let values: Vec<(usize, f64)> = lines
        .map(|l| {
            let (t, v) = l.split_once(' ').unwrap();
            (t.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    let report: RunReport =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(values.len(), report.iterations);
    for (i, w) in values.windows(2).enumerate() {
        assert_eq!(w[0].0, i + 1);
        assert!(w[1].1 <= w[0].1 + 1e-9 * w[0].1.abs().max(1.0));
    }
    let objs: Vec<f64> = values.iter().map(|v| v.1).collect();
    assert_eq!(objs, report.objective_trace);
}

#[test]
fn bench_reports_each_size() {
    let out = exec(&[
        "bench",
        "--sizes",
        "200,400",
        "--d",
        "4",
        "--c",
        "3",
        "--k-tilde",
        "2",
        "--iters",
        "2",
        "--repeats",
        "1",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3);
    assert!(text
        .lines()
        .last()
        .unwrap()
        .starts_with("# log-log slope: "));

    let out = exec(&["bench", "--sizes", "400,200"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sample_deviation_of_single_run_is_zero() {
    assert_eq!(mean_std(&[2.5]), Some((2.5, 0.0)));
    let (m, s) = mean_std(&[1.0, 2.0, 3.0]).unwrap();
    assert_eq!(m, 2.0);
    assert!((s - 1.0).abs() < 1e-15);
    assert_eq!(mean_std(&[]), None);
}
