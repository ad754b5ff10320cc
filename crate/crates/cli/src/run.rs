//! One fit from an echoed configuration, and the report it produces.

use std::path::{Path, PathBuf};
use std::time::Instant;

use refcmfs_core::baselines::{fit_baseline, Baseline, BaselineConfig};
use refcmfs_core::data_io::{load_csv, normalize, LabelColumn, LabeledDataset, Normalization};
use refcmfs_core::metrics::{accuracy, nmi};
use refcmfs_core::{refcmfs, validate_config, Diagnostics, FitConfig, FitResult, Init};
use serde::{Deserialize, Serialize};

use crate::args::{CommonArgs, InitArg, NormalizeArg};
use crate::error::CliError;

/// Names accepted by `--algo` that refer to comparison methods this tool
/// does not implement.
const UNSUPPORTED: &[&str] = &[
    "rsfkm",
    "gmm",
    "sc",
    "spectral",
    "lsc",
    "kmedoids",
    "k-medoids",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "kmeans")]
    KMeans,
    #[serde(rename = "fcm")]
    Fcm,
    #[serde(rename = "sim-refcmfs")]
    SimRefcmfs,
    #[serde(rename = "refcmfs")]
    Refcmfs,
}

impl Algorithm {
    pub fn parse(name: &str) -> Result<Self, CliError> {
        match name.to_ascii_lowercase().as_str() {
            "kmeans" | "k-means" => Ok(Algorithm::KMeans),
            "fcm" => Ok(Algorithm::Fcm),
            "sim-refcmfs" => Ok(Algorithm::SimRefcmfs),
            "refcmfs" => Ok(Algorithm::Refcmfs),
            other if UNSUPPORTED.contains(&other) => {
                Err(CliError::UnsupportedBaseline(other.to_string()))
            }
            other => Err(CliError::UnknownAlgorithm(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::KMeans => "kmeans",
            Algorithm::Fcm => "fcm",
            Algorithm::SimRefcmfs => "sim-refcmfs",
            Algorithm::Refcmfs => "refcmfs",
        }
    }

    fn uses_k_tilde(self) -> bool {
        matches!(self, Algorithm::SimRefcmfs | Algorithm::Refcmfs)
    }
}

/// Everything needed to reproduce a run; echoed verbatim in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub data: PathBuf,
    pub labels_col: String,
    pub header: bool,
    pub normalize: NormalizeArg,
    pub c: usize,
    pub k_tilde: Option<usize>,
    pub r: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub init: InitArg,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs) -> Result<Self, CliError> {
        Ok(Self {
            algorithm: Algorithm::parse(&args.algo)?,
            data: args.data.clone(),
            labels_col: args.labels_col.clone(),
            header: args.header,
            normalize: args.normalize,
            c: args.c,
            k_tilde: args.k_tilde,
            r: args.r,
            tol: args.tol,
            max_iter: args.max_iter,
            init: args.init,
            seed: args.seed,
        })
    }

    fn label_column(&self) -> Result<LabelColumn, CliError> {
        match self.labels_col.as_str() {
            "none" => Ok(LabelColumn::None),
            "last" => Ok(LabelColumn::Last),
            idx => idx.parse().map(LabelColumn::Index).map_err(|_| {
                CliError::InvalidConfig(format!(
                    "--labels-col must be an index, `last` or `none` (got {idx:?})"
                ))
            }),
        }
    }

    fn init(&self) -> Init {
        match self.init {
            InitArg::Kmeanspp => Init::KMeansPlusPlus,
            InitArg::Random => Init::RandomSamples,
        }
    }

    fn fit_config(&self) -> Result<FitConfig, CliError> {
        let k_tilde = match self.algorithm {
            Algorithm::KMeans => 1,
            Algorithm::Fcm => self.c,
            Algorithm::SimRefcmfs | Algorithm::Refcmfs => self.k_tilde.ok_or_else(|| {
                CliError::InvalidConfig(format!(
                    "--k-tilde is required for {}",
                    self.algorithm.name()
                ))
            })?,
        };
        Ok(FitConfig {
            cluster_count: self.c,
            fuzzifier: self.r,
            k_tilde,
            tolerance: self.tol,
            max_iter: self.max_iter,
            init: self.init(),
            rng_seed: self.seed,
        })
    }
}

/// Loads and normalizes the dataset named in `config`.
pub fn load_dataset(config: &RunConfig) -> Result<LabeledDataset, CliError> {
    let label_column = config.label_column()?;
    let mut ds = load_csv(&config.data, config.header, label_column).map_err(CliError::Dataset)?;
    let mode = match config.normalize {
        NormalizeArg::None => Normalization::None,
        NormalizeArg::Minmax => Normalization::MinMaxPerFeature,
        NormalizeArg::Zscore => Normalization::ZScorePerFeature,
    };
    ds.data = normalize(&ds.data, mode);
    Ok(ds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: Algorithm,
    pub config: RunConfig,
    pub n: usize,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nmi: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub final_objective: f64,
    pub objective_trace: Vec<f64>,
    pub warnings: Vec<String>,
    pub diagnostics: Diagnostics,
    /// Rows of the final membership decided by the zero-distance rule.
    pub final_degenerate_rows: usize,
    pub wall_time_seconds: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The JSON document with the timing field zeroed, for comparisons.
    pub fn to_json_without_timing(&self) -> String {
        let mut copy = self.clone();
        copy.wall_time_seconds = 0.0;
        copy.to_json()
    }
}

/// Runs `config` on an already loaded dataset.
pub fn run_on(ds: &LabeledDataset, config: &RunConfig) -> Result<(RunReport, FitResult), CliError> {
    let fit_config = fit_config_checked(ds, config)?;
    let warnings = if config.algorithm.uses_k_tilde() {
        validate_config(&fit_config, &ds.data).warnings
    } else {
        Vec::new()
    };

    let start = Instant::now();
    let result = match config.algorithm {
        Algorithm::Refcmfs => refcmfs::fit(&ds.data, &fit_config)?,
        other => {
            let variant = match other {
                Algorithm::KMeans => Baseline::KMeans,
                Algorithm::Fcm => Baseline::Fcm {
                    fuzzifier: config.r,
                },
                _ => Baseline::SimRefcmfs {
                    fuzzifier: config.r,
                    k_tilde: fit_config.k_tilde,
                },
            };
            let mut bc = BaselineConfig::new(variant, config.c);
            bc.tolerance = config.tol;
            bc.max_iter = config.max_iter;
            bc.init = fit_config.init.clone();
            bc.rng_seed = config.seed;
            fit_baseline(&ds.data, &bc)?
        }
    };
    let wall_time_seconds = start.elapsed().as_secs_f64();

    let (acc, nmi_value) = match &ds.labels {
        Some(truth) => (
            Some(accuracy(&result.labels, truth)?),
            Some(nmi(&result.labels, truth)?),
        ),
        None => (None, None),
    };
    let report = RunReport {
        algorithm: config.algorithm,
        config: config.clone(),
        n: ds.data.n(),
        d: ds.data.dim(),
        acc,
        nmi: nmi_value,
        iterations: result.iterations,
        converged: result.converged,
        final_objective: result.final_objective(),
        objective_trace: result.objective_trace.clone(),
        warnings,
        diagnostics: result.diagnostics.clone(),
        final_degenerate_rows: result.membership.degenerate_count(),
        wall_time_seconds,
    };
    Ok((report, result))
}

fn fit_config_checked(ds: &LabeledDataset, config: &RunConfig) -> Result<FitConfig, CliError> {
    let fit_config = config.fit_config()?;
    let report = validate_config(&fit_config, &ds.data);
    if !report.is_valid() {
        return Err(CliError::InvalidConfig(report.violations.join("; ")));
    }
    Ok(fit_config)
}

/// Loads the dataset and runs `config` once.
pub fn run(config: &RunConfig) -> Result<(RunReport, FitResult), CliError> {
    let ds = load_dataset(config)?;
    run_on(&ds, config)
}

pub fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}
