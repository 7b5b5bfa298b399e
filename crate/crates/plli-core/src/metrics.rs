//! Equal-quantile baseline, fidelity/accuracy metrics, the coverage
//! statistic, and representative-point extraction.

use alloc::vec::Vec;

use crate::config::FitConfig;
use crate::dataset::{sort_by_target, Dataset};
use crate::dp::{build_model_from_ranges, predict, PlliModel};
use crate::error::{Error, Result};
use crate::local_models::feature_importance;
use crate::segment_cost::segment_cost;
use crate::{dist_sq, sqrt};

/// Evaluation metrics of a surrogate on one dataset.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    /// Fidelity: mean squared difference to the black-box values.
    pub mse_f: f64,
    /// Accuracy vs ground-truth labels, when labels are supplied.
    pub mse_p: Option<f64>,
    /// Coefficient of determination vs labels; absent when the label
    /// variance is zero.
    pub r2: Option<f64>,
    pub n_eval: usize,
}

/// Equal-quantile baseline: split the sorted predictions at `floor(n*r/H)`
/// and fit each quantile exactly like the optimal path does.
pub fn fit_eq_plli(ds: Dataset, cfg: &FitConfig) -> Result<PlliModel> {
    cfg.validate()?;
    let n = ds.n();
    let h = cfg.num_intervals;
    if n < h {
        return Err(Error::InsufficientData { needed: h, got: n });
    }
    let sd = sort_by_target(ds);
    let mut ranges = Vec::with_capacity(h);
    for r in 0..h {
        let lo = n * r / h;
        let hi = n * (r + 1) / h - 1;
        ranges.push((lo, hi));
    }
    let mut total_cost = 0.0;
    for &(lo, hi) in &ranges {
        total_cost += segment_cost(&sd, lo, hi, cfg)?.cost;
    }
    build_model_from_ranges(&sd, cfg, &ranges, total_cost / n as f64)
}

/// MSE-f (always) plus MSE-p and R^2 when labels are given. Rows are routed
/// to intervals by their recorded black-box value.
pub fn evaluate(model: &PlliModel, ds: &Dataset, labels: Option<&[f64]>) -> Result<EvalReport> {
    if ds.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: ds.dim(),
        });
    }
    if let Some(labels) = labels {
        if labels.len() != ds.n() {
            return Err(Error::DimensionMismatch {
                expected: ds.n(),
                got: labels.len(),
            });
        }
    }
    let n = ds.n();
    let mut sse_f = 0.0;
    let mut predictions = Vec::with_capacity(n);
    for i in 0..n {
        let f = ds.target()[i];
        let (pred, _) = predict(model, ds.row(i), Some(f))?;
        sse_f += (pred - f) * (pred - f);
        predictions.push(pred);
    }
    let mse_f = sse_f / n as f64;
    let (mse_p, r2) = match labels {
        None => (None, None),
        Some(labels) => {
            let sse_p: f64 = predictions
                .iter()
                .zip(labels)
                .map(|(p, y)| (p - y) * (p - y))
                .sum();
            let mean_y = labels.iter().sum::<f64>() / n as f64;
            let ss_tot: f64 = labels.iter().map(|y| (y - mean_y) * (y - mean_y)).sum();
            let r2 = if ss_tot > 0.0 {
                Some(1.0 - sse_p / ss_tot)
            } else {
                None
            };
            (Some(sse_p / n as f64), r2)
        }
    };
    Ok(EvalReport {
        mse_f,
        mse_p,
        r2,
        n_eval: n,
    })
}

/// Average nearest-neighbor Euclidean distance over a point set.
pub fn coverage(points: &[Vec<f64>]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints);
    }
    let mut total = 0.0;
    for (i, p) in points.iter().enumerate() {
        let nearest = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, q)| dist_sq(p, q))
            .fold(f64::INFINITY, f64::min);
        total += sqrt(nearest);
    }
    Ok(total / points.len() as f64)
}

/// One representative per region: its centroid plus the nearest training row.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Representative {
    pub region_id: usize,
    pub centroid: Vec<f64>,
    pub nearest_row_id: usize,
    /// Black-box value recorded for the nearest row.
    pub f_value: f64,
    pub importances: Vec<f64>,
}

/// Representatives plus the three coverage statistics (features,
/// predictions, importances); coverages are absent for single-region models.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RepresentativeReport {
    pub representatives: Vec<Representative>,
    pub coverage_features: Option<f64>,
    pub coverage_predictions: Option<f64>,
    pub coverage_importances: Option<f64>,
}

/// Extract per-region representative points from the training data.
pub fn representatives(model: &PlliModel, ds: &Dataset) -> Result<RepresentativeReport> {
    if ds.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: ds.dim(),
        });
    }
    // Route every training row to its region.
    let mut region_of_row = Vec::with_capacity(ds.n());
    for i in 0..ds.n() {
        let (_, rid) = predict(model, ds.row(i), Some(ds.target()[i]))?;
        region_of_row.push(rid);
    }
    let mut reps = Vec::new();
    for (rid, iv, u) in model.region_ids() {
        let interval = &model.intervals[iv];
        let centroid = &interval.centroids[u];
        // Nearest row within the region; fall back to the global nearest if
        // no row routed here (possible on non-training data).
        let candidates: Vec<usize> = (0..ds.n())
            .filter(|&i| region_of_row[i] == rid)
            .collect();
        let pool: Vec<usize> = if candidates.is_empty() {
            (0..ds.n()).collect()
        } else {
            candidates
        };
        let nearest = pool
            .into_iter()
            .min_by(|&a, &b| {
                dist_sq(ds.row(a), centroid).total_cmp(&dist_sq(ds.row(b), centroid))
            })
            .expect("dataset is non-empty");
        reps.push(Representative {
            region_id: rid,
            centroid: centroid.clone(),
            nearest_row_id: ds.row_ids()[nearest],
            f_value: ds.target()[nearest],
            importances: feature_importance(&interval.models[u], &interval.feature_stddevs[u]),
        });
    }
    let (coverage_features, coverage_predictions, coverage_importances) = if reps.len() >= 2 {
        let centroids: Vec<Vec<f64>> = reps.iter().map(|r| r.centroid.clone()).collect();
        let fvals: Vec<Vec<f64>> = reps.iter().map(|r| alloc::vec![r.f_value]).collect();
        let imps: Vec<Vec<f64>> = reps.iter().map(|r| r.importances.clone()).collect();
        (
            Some(coverage(&centroids)?),
            Some(coverage(&fvals)?),
            Some(coverage(&imps)?),
        )
    } else {
        (None, None, None)
    };
    Ok(RepresentativeReport {
        representatives: reps,
        coverage_features,
        coverage_predictions,
        coverage_importances,
    })
}
