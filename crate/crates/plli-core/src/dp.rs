//! Dynamic program over ordered partitions of the sorted predictions: value
//! and index tables (exact and stride-subsampled), partition reconstruction,
//! and end-to-end surrogate fitting.

use alloc::vec;
use alloc::vec::Vec;

use crate::config::{FitConfig, Loss, ModelFamily};
use crate::dataset::{sort_by_target, Dataset, SortedDataset};
use crate::error::{Error, Result};
use crate::kmeans::nearest_centroid;
use crate::local_models::{predict_local, LocalModel};
use crate::segment_cost::{build_prefix_oracle, segment_cost, CostCache};
use crate::sqrt;

/// One range interval of a fitted surrogate: its slice of the prediction
/// range, the feature-space centroids and the local model per region.
///
/// `f_low`/`f_high` of `None` mean the interval extends to -inf / +inf.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntervalModel {
    pub f_low: Option<f64>,
    pub f_high: Option<f64>,
    pub centroids: Vec<Vec<f64>>,
    pub models: Vec<LocalModel>,
    /// Per-region standard deviation of each feature over the training rows
    /// assigned to the region; feeds importance scores.
    pub feature_stddevs: Vec<Vec<f64>>,
}

/// A fitted piecewise local-linear surrogate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlliModel {
    /// `H - 1` strictly increasing cut points on the prediction range.
    pub boundaries: Vec<f64>,
    pub intervals: Vec<IntervalModel>,
    pub config: FitConfig,
    /// Mean per-point training loss, `V[n][H] / n`.
    pub training_risk: f64,
}

impl PlliModel {
    /// Total number of regions across all intervals.
    pub fn region_count(&self) -> usize {
        self.intervals.iter().map(|iv| iv.centroids.len()).sum()
    }

    /// Feature dimension.
    pub fn dim(&self) -> usize {
        self.intervals[0].centroids[0].len()
    }

    /// Iterate `(region_id, interval_index, local_index)` over all regions.
    pub fn region_ids(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.intervals
            .iter()
            .enumerate()
            .flat_map(|(iv, m)| (0..m.centroids.len()).map(move |u| (iv, u)))
            .enumerate()
            .map(|(rid, (iv, u))| (rid, iv, u))
    }

    /// Interval index whose half-open range `(f_low, f_high]` contains `f`,
    /// with the outermost intervals extended to infinity.
    pub fn interval_of(&self, f: f64) -> usize {
        for (i, &b) in self.boundaries.iter().enumerate() {
            if f <= b {
                return i;
            }
        }
        self.intervals.len() - 1
    }
}

/// Value and index tables of the interval DP.
///
/// `value(p, q)` is the minimal unnormalized cost of splitting the first `p`
/// sorted points into `q` intervals; `split(p, q)` the prefix length chosen
/// for the first `q - 1` intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueIndexTables {
    n: usize,
    h: usize,
    values: Vec<Vec<f64>>,   // indexed [q][p]
    splits: Vec<Vec<usize>>, // indexed [q][p]
}

impl ValueIndexTables {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_intervals(&self) -> usize {
        self.h
    }

    pub fn value(&self, p: usize, q: usize) -> f64 {
        self.values[q][p]
    }

    pub fn split(&self, p: usize, q: usize) -> usize {
        self.splits[q][p]
    }
}

pub(crate) const UNSET: usize = usize::MAX;

/// Minimize `prev[s] + cost(s, p - 1)` over `s` by divide and conquer,
/// exploiting monotonicity of the optimal split in `p`. Valid for segment
/// costs satisfying the concave Monge condition, which within-segment SSE
/// and sum-of-absolute-deviations on sorted values do.
fn fill_row_divide_conquer<C: FnMut(usize, usize) -> f64>(
    prev: &[f64],
    row: &mut [f64],
    splits: &mut [usize],
    q: usize,
    cost: &mut C,
    p_lo: usize,
    p_hi: usize,
    c_lo: usize,
    c_hi: usize,
) {
    if p_lo > p_hi {
        return;
    }
    let p = p_lo + (p_hi - p_lo) / 2;
    let lo = c_lo.max(q - 1);
    let hi = c_hi.min(p - 1);
    let mut best = UNSET;
    let mut best_cost = f64::INFINITY;
    for s in lo..=hi {
        let c = prev[s] + cost(s, p - 1);
        if c < best_cost {
            best_cost = c;
            best = s;
        }
    }
    row[p] = best_cost;
    splits[p] = best;
    if p > p_lo {
        fill_row_divide_conquer(prev, row, splits, q, cost, p_lo, p - 1, c_lo, best);
    }
    if p < p_hi {
        fill_row_divide_conquer(prev, row, splits, q, cost, p + 1, p_hi, best, c_hi);
    }
}

fn dc_row<C: FnMut(usize, usize) -> f64>(
    prev: &[f64],
    row: &mut [f64],
    splits: &mut [usize],
    q: usize,
    cost: &mut C,
    n: usize,
) {
    fill_row_divide_conquer(prev, row, splits, q, cost, q, n, q - 1, n - 1);
}

/// Scan all stride-grid candidates for one `(p, q)` cell; ties go to the
/// smallest split index.
fn scan_cell<C: FnMut(usize, usize) -> Result<f64>>(
    prev: &[f64],
    p: usize,
    q: usize,
    stride: usize,
    cost: &mut C,
) -> Result<(f64, usize)> {
    let lo = q - 1;
    let hi = p - 1;
    let mut best = UNSET;
    let mut best_cost = f64::INFINITY;
    let mut any = false;
    // Candidate prefix lengths 1, 1+stride, 1+2*stride, ... per the
    // approximate table fill; stride 1 covers every split.
    let mut s = 1;
    while s <= hi {
        if s >= lo {
            any = true;
            let c = prev[s] + cost(s, p - 1)?;
            if c < best_cost {
                best_cost = c;
                best = s;
            }
        }
        s += stride;
    }
    if !any {
        // No grid candidate leaves every interval non-empty; fall back to
        // the tightest feasible split.
        let c = prev[lo] + cost(lo, p - 1)?;
        best_cost = c;
        best = lo;
    }
    Ok((best_cost, best))
}

pub(crate) struct DpRows {
    pub(crate) values: Vec<Vec<f64>>,
    pub(crate) splits: Vec<Vec<usize>>,
}

/// Fill rows 1..=kmax of the DP. `cost(i, j)` is the inclusive 0-based
/// segment cost; `use_divide_conquer` enables the monotone fast path.
pub(crate) fn solve_segmented<C: FnMut(usize, usize) -> Result<f64>>(
    n: usize,
    kmax: usize,
    mut cost: C,
    stride: usize,
    use_divide_conquer: bool,
) -> Result<DpRows> {
    let mut values: Vec<Vec<f64>> = vec![vec![0.0; n + 1]; kmax + 1];
    let mut splits: Vec<Vec<usize>> = vec![vec![UNSET; n + 1]; kmax + 1];

    for p in 1..=n {
        values[1][p] = if p == 1 { 0.0 } else { cost(0, p - 1)? };
        splits[1][p] = 0;
    }
    for q in 2..=kmax {
        let (done, rest) = values.split_at_mut(q);
        let prev = &done[q - 1];
        let row = &mut rest[0];
        let splits_row = &mut splits[q];
        // p < q: fewer points than intervals; zero cost by convention, each
        // point its own interval.
        for p in 1..q.min(n + 1) {
            row[p] = 0.0;
            splits_row[p] = p - 1;
        }
        if n < q {
            continue;
        }
        if use_divide_conquer && stride == 1 {
            let mut infallible = |i: usize, j: usize| cost(i, j).expect("prefix cost cannot fail");
            dc_row(prev, row, splits_row, q, &mut infallible, n);
        } else {
            for p in q..=n {
                let (v, s) = scan_cell(prev, p, q, stride, &mut cost)?;
                row[p] = v;
                splits_row[p] = s;
            }
        }
    }
    Ok(DpRows { values, splits })
}

fn is_constant_fast_path(cfg: &FitConfig) -> bool {
    cfg.regions_per_interval == 1 && cfg.model_family == ModelFamily::Constant
}

/// Sum of absolute deviations from the lower median of `sorted[i..=j]`,
/// in O(1) from a prefix sum over the sorted sequence.
pub(crate) fn median_cost(sorted: &[f64], prefix: &crate::segment_cost::PrefixOracle, i: usize, j: usize) -> f64 {
    let mid = i + (j - i) / 2; // lower median
    let med = sorted[mid];
    let upper = prefix.sum(mid, j) - (j - mid + 1) as f64 * med;
    let lower = (mid - i + 1) as f64 * med - prefix.sum(i, mid);
    (upper + lower).max(0.0)
}

/// Algorithm-1-style table fill (exact for stride 1, subsampled otherwise).
pub fn compute_value_index(sd: &SortedDataset, cfg: &FitConfig) -> Result<ValueIndexTables> {
    cfg.validate()?;
    let n = sd.n();
    let h = cfg.num_intervals;
    if n < h {
        return Err(Error::InsufficientData { needed: h, got: n });
    }
    let rows = if is_constant_fast_path(cfg) {
        let targets: Vec<f64> = (0..n).map(|r| sd.target_at(r)).collect();
        let oracle = build_prefix_oracle(&targets);
        match cfg.loss {
            Loss::Squared => solve_segmented(
                n,
                h,
                |i, j| Ok(oracle.query(i, j)),
                cfg.stride,
                true,
            )?,
            Loss::Absolute => solve_segmented(
                n,
                h,
                |i, j| Ok(median_cost(&targets, &oracle, i, j)),
                cfg.stride,
                true,
            )?,
        }
    } else {
        let mut cache = CostCache::new(n);
        solve_segmented(
            n,
            h,
            |i, j| cache.get_or_compute(sd, i, j, cfg),
            cfg.stride,
            false,
        )?
    };
    Ok(ValueIndexTables {
        n,
        h,
        values: rows.values,
        splits: rows.splits,
    })
}

/// Population standard deviation per feature over a set of rows.
fn feature_stddev(rows: &[&[f64]], d: usize) -> Vec<f64> {
    let m = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for row in rows {
        for (s, &v) in mean.iter_mut().zip(*row) {
            *s += v;
        }
    }
    for s in &mut mean {
        *s /= m;
    }
    let mut var = vec![0.0; d];
    for row in rows {
        for ((s, &v), &mu) in var.iter_mut().zip(*row).zip(&mean) {
            *s += (v - mu) * (v - mu);
        }
    }
    var.iter().map(|&v| sqrt(v / m)).collect()
}

/// Build the interval records for contiguous rank ranges `[lo, hi]`.
pub(crate) fn build_model_from_ranges(
    sd: &SortedDataset,
    cfg: &FitConfig,
    ranges: &[(usize, usize)],
    training_risk: f64,
) -> Result<PlliModel> {
    let d = sd.dim();
    let mut boundaries = Vec::with_capacity(ranges.len().saturating_sub(1));
    for w in ranges.windows(2) {
        let left_max = sd.target_at(w[0].1);
        let right_min = sd.target_at(w[1].0);
        boundaries.push(0.5 * (left_max + right_min));
    }
    let mut intervals = Vec::with_capacity(ranges.len());
    for (r, &(lo, hi)) in ranges.iter().enumerate() {
        let rec = segment_cost(sd, lo, hi, cfg)?;
        let rows: Vec<&[f64]> = (lo..=hi).map(|rank| sd.row_at(rank)).collect();
        let mut stddevs = Vec::with_capacity(rec.centroids.len());
        for u in 0..rec.centroids.len() {
            let members: Vec<&[f64]> = rows
                .iter()
                .filter(|row| nearest_centroid(row, &rec.centroids).unwrap() == u)
                .copied()
                .collect();
            if members.is_empty() {
                stddevs.push(vec![0.0; d]);
            } else {
                stddevs.push(feature_stddev(&members, d));
            }
        }
        intervals.push(IntervalModel {
            f_low: if r == 0 {
                None
            } else {
                Some(boundaries[r - 1])
            },
            f_high: if r == ranges.len() - 1 {
                None
            } else {
                Some(boundaries[r])
            },
            centroids: rec.centroids,
            models: rec.models,
            feature_stddevs: stddevs,
        });
    }
    Ok(PlliModel {
        boundaries,
        intervals,
        config: cfg.clone(),
        training_risk,
    })
}

/// Walk the index table backwards and materialize the fitted surrogate.
pub fn reconstruct_partition(
    tables: &ValueIndexTables,
    sd: &SortedDataset,
    cfg: &FitConfig,
) -> Result<PlliModel> {
    let n = tables.n;
    let h = tables.h;
    if sd.n() != n || cfg.num_intervals != h {
        return Err(Error::InconsistentTables);
    }
    let mut ranges: Vec<(usize, usize)> = Vec::with_capacity(h);
    let mut upper = n; // number of points still to assign
    for q in (2..=h).rev() {
        let s = tables.split(upper, q);
        if s == UNSET || s < q - 1 || s >= upper {
            return Err(Error::InconsistentTables);
        }
        ranges.push((s, upper - 1));
        upper = s;
    }
    if upper == 0 {
        return Err(Error::InconsistentTables);
    }
    ranges.push((0, upper - 1));
    ranges.reverse();
    let training_risk = tables.value(n, h) / n as f64;
    build_model_from_ranges(sd, cfg, &ranges, training_risk)
}

/// Sort, fill the tables, reconstruct. Deterministic end to end.
pub fn fit_plli(ds: Dataset, cfg: &FitConfig) -> Result<PlliModel> {
    let sd = sort_by_target(ds);
    let tables = compute_value_index(&sd, cfg)?;
    reconstruct_partition(&tables, &sd, cfg)
}

/// Evaluate the surrogate at `x`.
///
/// With `f_value` the region comes from the interval containing the
/// black-box value; without it the globally nearest centroid is used so
/// feature-only inputs can be scored.
pub fn predict(model: &PlliModel, x: &[f64], f_value: Option<f64>) -> Result<(f64, usize)> {
    let d = model.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    let (interval_idx, local_idx) = match f_value {
        Some(f) => {
            let iv = model.interval_of(f);
            let u = nearest_centroid(x, &model.intervals[iv].centroids)?;
            (iv, u)
        }
        None => {
            let mut best = (0usize, 0usize);
            let mut best_d = f64::INFINITY;
            for (iv, interval) in model.intervals.iter().enumerate() {
                for (u, c) in interval.centroids.iter().enumerate() {
                    let dist = crate::dist_sq(x, c);
                    if dist < best_d {
                        best_d = dist;
                        best = (iv, u);
                    }
                }
            }
            best
        }
    };
    let region_id: usize = model.intervals[..interval_idx]
        .iter()
        .map(|iv| iv.centroids.len())
        .sum::<usize>()
        + local_idx;
    let prediction = predict_local(&model.intervals[interval_idx].models[local_idx], x)?;
    Ok((prediction, region_id))
}
