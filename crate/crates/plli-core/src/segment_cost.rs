//! Cost of covering one sorted-index segment with `W` k-means regions, each
//! carrying its optimally fitted local model, plus the O(1) prefix-sum fast
//! path for the `W = 1` constant/squared case.

use alloc::vec;
use alloc::vec::Vec;

use crate::config::{FitConfig, ModelFamily};
use crate::dataset::SortedDataset;
use crate::error::{Error, Result};
use crate::kmeans::{kmeans, splitmix64};
use crate::local_models::{fit_constant, fit_linear, LocalModel};

/// Cost and fitted sub-models for one candidate segment.
#[derive(Debug, Clone, PartialEq)]
pub struct CostRecord {
    /// Sum over sub-regions of their fit costs.
    pub cost: f64,
    pub centroids: Vec<Vec<f64>>,
    pub models: Vec<LocalModel>,
    /// Number of regions actually produced; below `W` when the segment has
    /// fewer distinct points than requested clusters.
    pub effective_w: usize,
}

/// Contiguous view of sorted ranks `lo..=hi`.
#[derive(Debug, Clone, Copy)]
pub struct SegmentView<'a> {
    sd: &'a SortedDataset,
    lo: usize,
    hi: usize,
}

impl<'a> SegmentView<'a> {
    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees lo <= hi
    }

    pub fn targets(&self) -> impl Iterator<Item = f64> + 'a {
        let sd = self.sd;
        (self.lo..=self.hi).map(move |r| sd.target_at(r))
    }

    pub fn rows(&self) -> impl Iterator<Item = &'a [f64]> + 'a {
        let sd = self.sd;
        (self.lo..=self.hi).map(move |r| sd.row_at(r))
    }
}

/// Borrow sorted ranks `i..=j` without copying.
pub fn segment_slice(sd: &SortedDataset, i: usize, j: usize) -> Result<SegmentView<'_>> {
    let n = sd.n();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, len: n });
    }
    if i > j {
        return Err(Error::InvertedRange { lo: i, hi: j });
    }
    Ok(SegmentView { sd, lo: i, hi: j })
}

/// Per-segment k-means seed: independent across segments, reproducible for
/// a fixed config.
fn segment_seed(seed: u64, i: usize, j: usize) -> u64 {
    let mut state = seed;
    let a = splitmix64(&mut state);
    state ^= (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    state ^= (j as u64).rotate_left(32);
    a ^ splitmix64(&mut state)
}

/// Cost of covering sorted ranks `i..=j` with `W` regions (Eq-style double
/// sum: k-means split, then the best local model per cluster).
pub fn segment_cost(sd: &SortedDataset, i: usize, j: usize, cfg: &FitConfig) -> Result<CostRecord> {
    let view = segment_slice(sd, i, j)?;
    let rows: Vec<&[f64]> = view.rows().collect();
    let targets: Vec<f64> = view.targets().collect();
    let w = cfg.regions_per_interval;

    let (centroids, assignment) = if w == 1 {
        let d = sd.dim();
        let mut mean = vec![0.0; d];
        for row in &rows {
            for (m, &v) in mean.iter_mut().zip(*row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= rows.len() as f64;
        }
        (vec![mean], vec![0usize; rows.len()])
    } else {
        let km = kmeans(&rows, w, segment_seed(cfg.seed, i, j));
        (km.centroids, km.assignment)
    };

    let effective_w = centroids.len();
    let mut cost = 0.0;
    let mut models = Vec::with_capacity(effective_w);
    for cluster in 0..effective_w {
        let member_rows: Vec<&[f64]> = rows
            .iter()
            .zip(&assignment)
            .filter(|&(_, &a)| a == cluster)
            .map(|(r, _)| *r)
            .collect();
        let member_targets: Vec<f64> = targets
            .iter()
            .zip(&assignment)
            .filter(|&(_, &a)| a == cluster)
            .map(|(t, _)| *t)
            .collect();
        let fit = match cfg.model_family {
            ModelFamily::Constant => fit_constant(&member_targets, cfg.loss)?,
            ModelFamily::Linear => fit_linear(
                &member_rows,
                &member_targets,
                cfg.ridge_epsilon,
                cfg.clip_range,
            )?,
        };
        cost += fit.cost;
        models.push(fit.model);
    }
    Ok(CostRecord {
        cost,
        centroids,
        models,
        effective_w,
    })
}

/// Prefix sums of `y` and `y^2` giving O(1) within-segment SSE queries.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixOracle {
    prefix_sum: Vec<f64>,
    prefix_sumsq: Vec<f64>,
}

/// Kahan-compensated running sums keep queries accurate at n = 1e5.
fn compensated_prefix(values: impl Iterator<Item = f64>, out: &mut Vec<f64>) {
    let mut sum = 0.0;
    let mut comp = 0.0;
    out.push(0.0);
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        out.push(sum);
    }
}

impl PrefixOracle {
    /// SSE of the best constant fit on `values[i..=j]`, clamped at zero.
    pub fn query(&self, i: usize, j: usize) -> f64 {
        let count = (j - i + 1) as f64;
        let sum = self.prefix_sum[j + 1] - self.prefix_sum[i];
        let sumsq = self.prefix_sumsq[j + 1] - self.prefix_sumsq[i];
        (sumsq - sum * sum / count).max(0.0)
    }

    /// Segment mean of `values[i..=j]`.
    pub fn mean(&self, i: usize, j: usize) -> f64 {
        (self.prefix_sum[j + 1] - self.prefix_sum[i]) / (j - i + 1) as f64
    }

    /// Plain segment sum of `values[i..=j]`.
    pub fn sum(&self, i: usize, j: usize) -> f64 {
        self.prefix_sum[j + 1] - self.prefix_sum[i]
    }
}

/// Build the O(1) constant/squared cost oracle in one pass.
pub fn build_prefix_oracle(values: &[f64]) -> PrefixOracle {
    let mut prefix_sum = Vec::with_capacity(values.len() + 1);
    let mut prefix_sumsq = Vec::with_capacity(values.len() + 1);
    compensated_prefix(values.iter().copied(), &mut prefix_sum);
    compensated_prefix(values.iter().map(|v| v * v), &mut prefix_sumsq);
    PrefixOracle {
        prefix_sum,
        prefix_sumsq,
    }
}

/// Triangular memo of segment costs keyed on `(i, j)`; the DP asks for the
/// same segment under several interval counts.
pub(crate) struct CostCache {
    n: usize,
    costs: Vec<f64>, // NaN = unset
}

impl CostCache {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            n,
            costs: vec![f64::NAN; n * (n + 1) / 2],
        }
    }

    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j && j < self.n);
        j * (j + 1) / 2 + i
    }

    pub(crate) fn get_or_compute(
        &mut self,
        sd: &SortedDataset,
        i: usize,
        j: usize,
        cfg: &FitConfig,
    ) -> Result<f64> {
        let idx = self.index(i, j);
        if self.costs[idx].is_nan() {
            self.costs[idx] = segment_cost(sd, i, j, cfg)?.cost;
        }
        Ok(self.costs[idx])
    }
}
