//! Closed-form per-region model fits: means/medians for constant models and
//! ridge-guarded least squares for linear ones.

use alloc::vec;
use alloc::vec::Vec;

use crate::config::{Loss, ModelFamily};
use crate::error::{Error, Result};

/// A single region's model: `b . x + c`, optionally clipped.
///
/// Constant models carry an empty coefficient vector and ignore the input
/// features entirely.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalModel {
    pub kind: ModelFamily,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub clip: Option<(f64, f64)>,
}

impl LocalModel {
    pub fn constant(c: f64) -> Self {
        Self {
            kind: ModelFamily::Constant,
            coefficients: Vec::new(),
            intercept: c,
            clip: None,
        }
    }
}

/// A fitted model together with its unnormalized training cost.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: LocalModel,
    /// Sum of per-point losses; zero iff the model interpolates exactly.
    pub cost: f64,
}

fn clip_value(v: f64, clip: Option<(f64, f64)>) -> f64 {
    match clip {
        Some((lo, hi)) => v.clamp(lo, hi),
        None => v,
    }
}

/// Best constant under the loss: mean for squared, lower median for absolute.
pub fn fit_constant(values: &[f64], loss: Loss) -> Result<FitResult> {
    if values.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let (c, cost) = match loss {
        Loss::Squared => {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let cost = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
            (mean, cost)
        }
        Loss::Absolute => {
            let mut sorted = values.to_vec();
            sorted.sort_by(f64::total_cmp);
            let median = sorted[(sorted.len() - 1) / 2];
            let cost = values.iter().map(|v| (v - median).abs()).sum::<f64>();
            (median, cost)
        }
    };
    Ok(FitResult {
        model: LocalModel::constant(c),
        cost: cost.max(0.0),
    })
}

/// Solve `a * x = rhs` in place by Gaussian elimination with partial
/// pivoting. Returns `None` when a pivot falls below `1e-12` or the solution
/// is non-finite.
fn solve_dense(a: &mut [f64], rhs: &mut [f64], dim: usize) -> Option<Vec<f64>> {
    for col in 0..dim {
        let mut pivot_row = col;
        for r in col + 1..dim {
            if a[r * dim + col].abs() > a[pivot_row * dim + col].abs() {
                pivot_row = r;
            }
        }
        if a[pivot_row * dim + col].abs() < 1e-12 {
            return None;
        }
        if pivot_row != col {
            for c in 0..dim {
                a.swap(col * dim + c, pivot_row * dim + c);
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = a[col * dim + col];
        for r in col + 1..dim {
            let factor = a[r * dim + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for c in col..dim {
                a[r * dim + c] -= factor * a[col * dim + c];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; dim];
    for col in (0..dim).rev() {
        let mut v = rhs[col];
        for c in col + 1..dim {
            v -= a[col * dim + c] * x[c];
        }
        x[col] = v / a[col * dim + col];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Least squares on `[X | 1]` under squared loss.
///
/// Rank-deficient or underdetermined systems fall back to a ridge-regularized
/// solve with `ridge_epsilon` on the diagonal. The reported cost applies
/// clipping when `clip` is set.
pub fn fit_linear(
    rows: &[&[f64]],
    y: &[f64],
    ridge_epsilon: f64,
    clip: Option<(f64, f64)>,
) -> Result<FitResult> {
    let m = rows.len();
    if m == 0 || m != y.len() {
        return Err(Error::EmptyRegion);
    }
    let d = rows[0].len();
    let dim = d + 1;

    // Normal equations on the augmented design [X | 1].
    let mut gram = vec![0.0; dim * dim];
    let mut rhs = vec![0.0; dim];
    for (row, &yi) in rows.iter().zip(y) {
        for i in 0..d {
            for j in i..d {
                gram[i * dim + j] += row[i] * row[j];
            }
            gram[i * dim + d] += row[i];
            rhs[i] += row[i] * yi;
        }
        gram[d * dim + d] += 1.0;
        rhs[d] += yi;
    }
    for i in 0..dim {
        for j in 0..i {
            gram[i * dim + j] = gram[j * dim + i];
        }
    }

    let solution = if m >= dim {
        let mut a = gram.clone();
        let mut b = rhs.clone();
        solve_dense(&mut a, &mut b, dim)
    } else {
        None
    };
    let solution = match solution {
        Some(x) => x,
        None => {
            let mut a = gram;
            for i in 0..dim {
                a[i * dim + i] += ridge_epsilon;
            }
            let mut b = rhs;
            solve_dense(&mut a, &mut b, dim).ok_or(Error::NumericalFailure)?
        }
    };

    let model = LocalModel {
        kind: ModelFamily::Linear,
        coefficients: solution[..d].to_vec(),
        intercept: solution[d],
        clip,
    };
    let mut cost = 0.0;
    for (row, &yi) in rows.iter().zip(y) {
        let pred = predict_local(&model, row)?;
        cost += (pred - yi) * (pred - yi);
    }
    if !cost.is_finite() {
        return Err(Error::NumericalFailure);
    }
    Ok(FitResult {
        model,
        cost: cost.max(0.0),
    })
}

/// Evaluate a local model at `x`, applying clipping if configured.
pub fn predict_local(model: &LocalModel, x: &[f64]) -> Result<f64> {
    let raw = match model.kind {
        ModelFamily::Constant => model.intercept,
        ModelFamily::Linear => {
            if x.len() != model.coefficients.len() {
                return Err(Error::DimensionMismatch {
                    expected: model.coefficients.len(),
                    got: x.len(),
                });
            }
            model
                .coefficients
                .iter()
                .zip(x)
                .map(|(b, xi)| b * xi)
                .sum::<f64>()
                + model.intercept
        }
    };
    Ok(clip_value(raw, model.clip))
}

/// Region-wise importance `|b_j| * sigma_j`; constant models score zero
/// everywhere. Scaling by the within-region feature spread makes scores
/// comparable across differently scaled features.
pub fn feature_importance(model: &LocalModel, region_feature_stddev: &[f64]) -> Vec<f64> {
    match model.kind {
        ModelFamily::Constant => vec![0.0; region_feature_stddev.len()],
        ModelFamily::Linear => model
            .coefficients
            .iter()
            .zip(region_feature_stddev)
            .map(|(b, s)| b.abs() * s)
            .collect(),
    }
}
