//! Provably optimal 1-D clustering: the `H = K, W = 1, constant-model`
//! specialization of the interval DP, its exhaustive oracle, and the
//! midpoint ordering check satisfied by optimal squared-loss clusterings.

use alloc::vec::Vec;

use crate::config::Loss;
use crate::dp::{median_cost, solve_segmented, UNSET};
use crate::error::{Error, Result};
use crate::local_models::fit_constant;
use crate::segment_cost::build_prefix_oracle;

/// A contiguous partition of the sorted value sequence into `K` clusters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Clustering1D {
    /// `K - 1` split positions into the sorted sequence: `boundaries[t]` is
    /// the index of the first element of cluster `t + 1`.
    pub boundaries: Vec<usize>,
    /// Per-cluster center: mean (squared loss) or lower median (absolute).
    pub centers: Vec<f64>,
    pub total_cost: f64,
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
}

fn center_of(segment: &[f64], loss: Loss) -> f64 {
    match loss {
        Loss::Squared => segment.iter().sum::<f64>() / segment.len() as f64,
        Loss::Absolute => segment[(segment.len() - 1) / 2],
    }
}

fn clustering_from_ranges(sorted: &[f64], ranges: &[(usize, usize)], loss: Loss, total_cost: f64) -> Clustering1D {
    Clustering1D {
        boundaries: ranges.iter().skip(1).map(|&(lo, _)| lo).collect(),
        centers: ranges
            .iter()
            .map(|&(lo, hi)| center_of(&sorted[lo..=hi], loss))
            .collect(),
        total_cost,
    }
}

/// Globally optimal contiguous clustering of `values` into `k` clusters.
///
/// Values are sorted internally; boundaries and centers refer to the sorted
/// sequence.
pub fn cluster_1d(values: &[f64], k: usize, loss: Loss) -> Result<Clustering1D> {
    let n = values.len();
    if k == 0 || k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let sorted = sorted_copy(values);
    let oracle = build_prefix_oracle(&sorted);
    let rows = match loss {
        Loss::Squared => solve_segmented(n, k, |i, j| Ok(oracle.query(i, j)), 1, true)?,
        Loss::Absolute => {
            solve_segmented(n, k, |i, j| Ok(median_cost(&sorted, &oracle, i, j)), 1, true)?
        }
    };
    // Walk the split table backwards.
    let mut ranges: Vec<(usize, usize)> = Vec::with_capacity(k);
    let mut upper = n;
    for q in (2..=k).rev() {
        let s = rows.splits[q][upper];
        debug_assert!(s != UNSET && s >= q - 1 && s < upper);
        ranges.push((s, upper - 1));
        upper = s;
    }
    ranges.push((0, upper - 1));
    ranges.reverse();
    Ok(clustering_from_ranges(
        &sorted,
        &ranges,
        loss,
        rows.values[k][n],
    ))
}

const ORACLE_LIMIT: usize = 20;

/// Exhaustive scan over all contiguous `k`-partitions. Test oracle; costs
/// are accumulated through the plain constant fits, independent of the
/// prefix-sum path the DP uses.
pub fn brute_force_1d(values: &[f64], k: usize, loss: Loss) -> Result<Clustering1D> {
    let n = values.len();
    if k == 0 || k > n {
        return Err(Error::KTooLarge { k, n });
    }
    if n > ORACLE_LIMIT {
        return Err(Error::TooLargeForOracle {
            n,
            limit: ORACLE_LIMIT,
        });
    }
    let sorted = sorted_copy(values);
    let mut best: Option<(f64, Vec<(usize, usize)>)> = None;
    let mut splits = Vec::with_capacity(k - 1);
    enumerate_splits(&sorted, k, loss, 1, &mut splits, &mut best);
    let (cost, ranges) = best.expect("at least one partition exists");
    Ok(clustering_from_ranges(&sorted, &ranges, loss, cost))
}

fn enumerate_splits(
    sorted: &[f64],
    k: usize,
    loss: Loss,
    next_min: usize,
    splits: &mut Vec<usize>,
    best: &mut Option<(f64, Vec<(usize, usize)>)>,
) {
    let n = sorted.len();
    if splits.len() == k - 1 {
        let mut ranges = Vec::with_capacity(k);
        let mut lo = 0;
        for &s in splits.iter() {
            ranges.push((lo, s - 1));
            lo = s;
        }
        ranges.push((lo, n - 1));
        let cost: f64 = ranges
            .iter()
            .map(|&(lo, hi)| fit_constant(&sorted[lo..=hi], loss).unwrap().cost)
            .sum();
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            *best = Some((cost, ranges));
        }
        return;
    }
    let remaining = k - 1 - splits.len();
    for s in next_min..=n - remaining {
        splits.push(s);
        enumerate_splits(sorted, k, loss, s + 1, splits, best);
        splits.pop();
    }
}

/// Check the ordering property of optimal squared-loss clusterings: every
/// point sits on its own cluster's side of the midpoint between adjacent
/// cluster centers (boundary equality allowed).
pub fn check_midpoint_property(c: &Clustering1D, values: &[f64]) -> bool {
    let sorted = sorted_copy(values);
    let mut lo = 0;
    let mut ranges = Vec::with_capacity(c.centers.len());
    for &b in &c.boundaries {
        ranges.push((lo, b - 1));
        lo = b;
    }
    ranges.push((lo, sorted.len() - 1));
    for t in 0..ranges.len().saturating_sub(1) {
        let mid = 0.5 * (c.centers[t] + c.centers[t + 1]);
        let left_max = sorted[ranges[t].1];
        let right_min = sorted[ranges[t + 1].0];
        const EPS: f64 = 1e-9;
        if left_max > mid + EPS || right_min < mid - EPS {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmeans::splitmix64;
    use alloc::vec;

    fn uniform(state: &mut u64) -> f64 {
        (splitmix64(state) >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn two_cluster_example() {
        let c = cluster_1d(&[1.0, 2.0, 10.0, 11.0, 12.0], 2, Loss::Squared).unwrap();
        assert_eq!(c.boundaries, vec![2]);
        assert!((c.centers[0] - 1.5).abs() < 1e-12);
        assert!((c.centers[1] - 11.0).abs() < 1e-12);
        assert!((c.total_cost - 2.5).abs() < 1e-12);
    }

    #[test]
    fn k_equals_n_is_free() {
        let c = cluster_1d(&[4.0, 1.0, 9.0], 3, Loss::Squared).unwrap();
        assert_eq!(c.total_cost, 0.0);
        assert_eq!(c.centers, vec![1.0, 4.0, 9.0]);
    }

    #[test]
    fn constant_sequence_is_free() {
        let c = cluster_1d(&[5.0; 7], 3, Loss::Squared).unwrap();
        assert_eq!(c.total_cost, 0.0);
    }

    #[test]
    fn k_too_large() {
        assert!(matches!(
            cluster_1d(&[1.0], 2, Loss::Squared),
            Err(Error::KTooLarge { .. })
        ));
    }

    #[test]
    fn brute_force_examples() {
        let c = brute_force_1d(&[1.0, 2.0], 2, Loss::Squared).unwrap();
        assert_eq!(c.total_cost, 0.0);
        assert_eq!(c.boundaries, vec![1]);

        // Two candidate splits by hand: {0}|{1,100} costs 4900.5,
        // {0,1}|{100} costs 0.5.
        let c = brute_force_1d(&[0.0, 1.0, 100.0], 2, Loss::Squared).unwrap();
        assert_eq!(c.boundaries, vec![2]);
        assert!((c.total_cost - 0.5).abs() < 1e-12);
    }

    #[test]
    fn oracle_size_limit() {
        let values: Vec<f64> = (0..21).map(|i| i as f64).collect();
        assert!(matches!(
            brute_force_1d(&values, 3, Loss::Squared),
            Err(Error::TooLargeForOracle { .. })
        ));
    }

    #[test]
    fn dp_matches_oracle_randomized() {
        let mut state = 404u64;
        for trial in 0..200u64 {
            let n = 2 + (splitmix64(&mut state) % 11) as usize;
            let k = (2 + (trial % 3) as usize).min(n);
            let loss = if trial % 2 == 0 { Loss::Squared } else { Loss::Absolute };
            let values: Vec<f64> = (0..n).map(|_| uniform(&mut state)).collect();
            let dp = cluster_1d(&values, k, loss).unwrap();
            let brute = brute_force_1d(&values, k, loss).unwrap();
            assert!(
                (dp.total_cost - brute.total_cost).abs() < 1e-9,
                "n={n} k={k} {loss:?}: dp {} vs brute {}",
                dp.total_cost,
                brute.total_cost
            );
        }
    }

    #[test]
    fn midpoint_property_holds_for_optima() {
        let mut state = 808u64;
        for trial in 0..200u64 {
            let n = 3 + (splitmix64(&mut state) % 30) as usize;
            let k = (2 + (trial % 4) as usize).min(n);
            let values: Vec<f64> = (0..n).map(|_| uniform(&mut state)).collect();
            let c = cluster_1d(&values, k, Loss::Squared).unwrap();
            assert!(check_midpoint_property(&c, &values));
        }
    }

    #[test]
    fn midpoint_property_detects_violation() {
        // Hand-built bad clustering {1,9}|{10}: value 9 > midpoint 7.5.
        let c = Clustering1D {
            boundaries: vec![2],
            centers: vec![5.0, 10.0],
            total_cost: 32.0,
        };
        assert!(!check_midpoint_property(&c, &[1.0, 9.0, 10.0]));
    }

    #[test]
    fn midpoint_property_vacuous_for_single_cluster() {
        let c = cluster_1d(&[3.0, 4.0], 1, Loss::Squared).unwrap();
        assert!(check_midpoint_property(&c, &[3.0, 4.0]));
    }

    #[test]
    fn scale_equivariance() {
        let mut state = 99u64;
        let values: Vec<f64> = (0..25).map(|_| uniform(&mut state)).collect();
        let base = cluster_1d(&values, 4, Loss::Squared).unwrap();
        let alpha = 3.5;
        let beta = -2.0;
        let scaled_vals: Vec<f64> = values.iter().map(|v| alpha * v + beta).collect();
        let scaled = cluster_1d(&scaled_vals, 4, Loss::Squared).unwrap();
        assert_eq!(base.boundaries, scaled.boundaries);
        assert!((scaled.total_cost - alpha * alpha * base.total_cost).abs() < 1e-9);
    }

    #[test]
    fn absolute_loss_uses_medians() {
        let c = cluster_1d(&[0.0, 0.0, 10.0, 50.0, 50.0, 50.0], 2, Loss::Absolute).unwrap();
        let brute = brute_force_1d(&[0.0, 0.0, 10.0, 50.0, 50.0, 50.0], 2, Loss::Absolute).unwrap();
        assert!((c.total_cost - brute.total_cost).abs() < 1e-9);
    }
}
