//! Piecewise local-linear surrogate models for black-box predictors.
//!
//! The central object is a [`PlliModel`]: the range of a black-box predictor
//! is cut into `H` intervals by dynamic programming over the sorted
//! predictions, the inverse image of each interval is split into `W`
//! feature-space regions with seeded k-means, and each region carries its own
//! least-squares local model. With `W = 1` and constant local models the same
//! machinery solves optimal 1-D clustering exactly (see [`cluster1d`]).
//!
//! The crate is `no_std`-compatible (requires `alloc`); the companion CLI
//! crate carries all file IO.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod cluster1d;
pub mod config;
pub mod dataset;
pub mod dp;
pub mod error;
pub mod kmeans;
pub mod local_models;
pub mod metrics;
pub mod segment_cost;

pub use cluster1d::{brute_force_1d, check_midpoint_property, cluster_1d, Clustering1D};
pub use config::{FitConfig, Loss, ModelFamily};
pub use dataset::{sort_by_target, validate_dataset, Dataset, SortedDataset};
pub use dp::{
    compute_value_index, fit_plli, predict, IntervalModel, PlliModel, ValueIndexTables,
};
pub use error::{Error, Result};
pub use kmeans::{kmeans, nearest_centroid, KmeansResult};
pub use local_models::{
    feature_importance, fit_constant, fit_linear, predict_local, FitResult, LocalModel,
};
pub use metrics::{
    coverage, evaluate, fit_eq_plli, representatives, EvalReport, Representative,
    RepresentativeReport,
};
pub use segment_cost::{build_prefix_oracle, segment_cost, CostRecord, PrefixOracle};

pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// Squared Euclidean distance between two points of equal dimension.
pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
