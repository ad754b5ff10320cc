//! Robust sparse fuzzy C-means clustering.
//!
//! The model minimizes `Σ_i Σ_k ‖x_i − b_k‖₂ · α_ik^r` with every membership
//! row on the simplex and exactly `k_tilde` nonzero entries per row. See
//! [`refcmfs`] for the algorithm, [`baselines`] for K-Means, FCM and the
//! squared-loss sparse variant, [`metrics`] for ACC and NMI and [`data_io`]
//! for CSV ingestion and synthetic data.

pub mod baselines;
pub mod data_io;
pub mod error;
pub mod metrics;
pub mod model;
pub mod refcmfs;

pub use error::{ClusterError, Result};
pub use model::{
    validate_config, CentroidMatrix, DataMatrix, Diagnostics, FitConfig, FitResult, Init,
    MembershipMatrix, ReseedEvent, ValidationReport,
};
