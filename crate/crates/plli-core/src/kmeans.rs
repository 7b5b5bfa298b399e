//! Deterministic seeded k-means (k-means++ initialization plus Lloyd
//! iterations). Repeated calls with the same data and seed are bit-identical,
//! which the dynamic program relies on when it re-evaluates a segment.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::dist_sq;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansResult {
    /// One centroid per non-empty cluster; `centroids.len()` is the
    /// effective k after degenerate-input reduction.
    pub centroids: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
    pub inertia: f64,
}

const MAX_ITER: usize = 100;

pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// ChaCha stream keyed on (seed, m, k) only, not on data content.
fn make_rng(seed: u64, m: usize, k: usize) -> ChaCha8Rng {
    let mut state = seed ^ 0xd6e8_feb8_6659_fd93;
    let mut key = [0u8; 32];
    state ^= m as u64;
    let a = splitmix64(&mut state);
    state ^= (k as u64).rotate_left(32);
    let b = splitmix64(&mut state);
    let c = splitmix64(&mut state);
    let d = splitmix64(&mut state);
    key[..8].copy_from_slice(&a.to_le_bytes());
    key[8..16].copy_from_slice(&b.to_le_bytes());
    key[16..24].copy_from_slice(&c.to_le_bytes());
    key[24..32].copy_from_slice(&d.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn uniform_unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Number of distinct points, capped at `limit` (only `min(distinct, k)` is
/// ever needed, and the early exit keeps this linear in the common case).
fn count_distinct_capped(points: &[&[f64]], limit: usize) -> usize {
    let mut distinct: Vec<&[f64]> = Vec::new();
    for p in points {
        if !distinct.iter().any(|q| q == p) {
            distinct.push(p);
            if distinct.len() >= limit {
                break;
            }
        }
    }
    distinct.len()
}

/// Index of the nearest centroid by Euclidean distance; ties go to the
/// lowest index.
pub fn nearest_centroid(x: &[f64], centroids: &[Vec<f64>]) -> Result<usize> {
    if centroids.is_empty() {
        return Err(Error::EmptyCentroidList);
    }
    let mut best = 0;
    let mut best_d = dist_sq(x, &centroids[0]);
    for (i, c) in centroids.iter().enumerate().skip(1) {
        let d = dist_sq(x, c);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    Ok(best)
}

/// Seeded k-means. `k` is silently reduced to the number of distinct points.
pub fn kmeans(points: &[&[f64]], k: usize, seed: u64) -> KmeansResult {
    kmeans_traced(points, k, seed).0
}

/// Same as [`kmeans`] but also returns the inertia measured after each
/// assignment step, for monotonicity checks.
pub(crate) fn kmeans_traced(
    points: &[&[f64]],
    k: usize,
    seed: u64,
) -> (KmeansResult, Vec<(f64, bool)>) {
    let m = points.len();
    assert!(m >= 1 && k >= 1);
    let d = points[0].len();
    let effective_k = count_distinct_capped(points, k);
    let mut rng = make_rng(seed, m, k);

    // k-means++ seeding.
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(effective_k);
    let first = (rng.next_u64() % m as u64) as usize;
    centroids.push(points[first].to_vec());
    let mut nearest_d: Vec<f64> = points
        .iter()
        .map(|p| dist_sq(p, &centroids[0]))
        .collect();
    while centroids.len() < effective_k {
        let total: f64 = nearest_d.iter().sum();
        let chosen = if total > 0.0 {
            let mut r = uniform_unit(&mut rng) * total;
            let mut idx = 0;
            for (i, &w) in nearest_d.iter().enumerate() {
                idx = i;
                if r < w {
                    break;
                }
                r -= w;
            }
            idx
        } else {
            // All mass on chosen points; effective_k <= distinct rules this
            // out, but fall back to the first uncovered point.
            (0..m).find(|&i| nearest_d[i] > 0.0).unwrap_or(0)
        };
        centroids.push(points[chosen].to_vec());
        let last = centroids.last().unwrap();
        for (nd, p) in nearest_d.iter_mut().zip(points) {
            let dd = dist_sq(p, last);
            if dd < *nd {
                *nd = dd;
            }
        }
    }

    // Lloyd iterations until the assignment reaches a fixpoint.
    let mut assignment = vec![0usize; m];
    let mut inertia_history = Vec::new();
    let mut sums = vec![0.0; centroids.len() * d];
    let mut counts = vec![0usize; centroids.len()];
    for _ in 0..MAX_ITER {
        let mut changed = false;
        let mut inertia_now = 0.0;
        for (i, p) in points.iter().enumerate() {
            let mut a = 0;
            let mut a_d = dist_sq(p, &centroids[0]);
            for (c_idx, c) in centroids.iter().enumerate().skip(1) {
                let dd = dist_sq(p, c);
                if dd < a_d {
                    a = c_idx;
                    a_d = dd;
                }
            }
            if assignment[i] != a {
                assignment[i] = a;
                changed = true;
            }
            inertia_now += a_d;
        }
        let repaired = repair_empty_clusters(points, &centroids, &mut assignment);
        if repaired {
            // A repair moved points, so the pre-repair sum is stale.
            inertia_now = points
                .iter()
                .zip(&assignment)
                .map(|(p, &a)| dist_sq(p, &centroids[a]))
                .sum();
        }
        inertia_history.push((inertia_now, repaired));
        sums.iter_mut().for_each(|s| *s = 0.0);
        counts.iter_mut().for_each(|c| *c = 0);
        for (i, p) in points.iter().enumerate() {
            let a = assignment[i];
            counts[a] += 1;
            for (s, &v) in sums[a * d..(a + 1) * d].iter_mut().zip(*p) {
                *s += v;
            }
        }
        for (a, c) in centroids.iter_mut().enumerate() {
            for (j, cv) in c.iter_mut().enumerate() {
                *cv = sums[a * d + j] / counts[a] as f64;
            }
        }
        if !changed {
            break;
        }
    }

    let inertia = points
        .iter()
        .zip(&assignment)
        .map(|(p, &a)| dist_sq(p, &centroids[a]))
        .sum();
    (
        KmeansResult {
            centroids,
            assignment,
            inertia,
        },
        inertia_history,
    )
}

/// Move the point farthest from its centroid into each empty cluster,
/// scanning clusters in index order. Returns whether any move happened.
fn repair_empty_clusters(points: &[&[f64]], centroids: &[Vec<f64>], assignment: &mut [usize]) -> bool {
    let k = centroids.len();
    let mut counts = vec![0usize; k];
    let mut repaired = false;
    for &a in assignment.iter() {
        counts[a] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let mut victim = None;
        let mut victim_d = -1.0;
        for (i, p) in points.iter().enumerate() {
            if counts[assignment[i]] <= 1 {
                continue;
            }
            let d = dist_sq(p, &centroids[assignment[i]]);
            if d > victim_d {
                victim_d = d;
                victim = Some(i);
            }
        }
        if let Some(i) = victim {
            counts[assignment[i]] -= 1;
            assignment[i] = empty;
            counts[empty] += 1;
            repaired = true;
        }
    }
    repaired
}
