use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// An in-memory table of features plus the black-box prediction per row.
///
/// This is the sole input to every fitting routine: the black box itself is
/// never consulted, only its recorded values.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    d: usize,
    features: Vec<f64>, // row-major n x d
    target: Vec<f64>,
    column_names: Vec<String>,
    row_ids: Vec<usize>,
}

impl Dataset {
    /// Build a dataset from row-major features and per-row black-box values.
    ///
    /// Row ids default to the row index when `row_ids` is `None`.
    pub fn new(
        features: Vec<f64>,
        target: Vec<f64>,
        column_names: Vec<String>,
        row_ids: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = target.len();
        let d = column_names.len();
        if n == 0 || d == 0 {
            return Err(Error::EmptyTable);
        }
        if features.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                got: features.len(),
            });
        }
        for (idx, v) in features.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    row: idx / d,
                    col: idx % d,
                });
            }
        }
        for (row, v) in target.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { row, col: d });
            }
        }
        let row_ids = row_ids.unwrap_or_else(|| (0..n).collect());
        if row_ids.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: row_ids.len(),
            });
        }
        let mut seen = row_ids.clone();
        seen.sort_unstable();
        for w in seen.windows(2) {
            if w[0] == w[1] {
                let pos = row_ids.iter().position(|&id| id == w[0]).unwrap();
                return Err(Error::DuplicateRowId(pos));
            }
        }
        Ok(Self {
            n,
            d,
            features,
            target,
            column_names,
            row_ids,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }
}

/// A dataset together with a permutation sorting rows by ascending target.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedDataset {
    base: Dataset,
    order: Vec<usize>,
}

impl SortedDataset {
    pub fn base(&self) -> &Dataset {
        &self.base
    }

    /// Permutation: `order()[rank]` is the original row index at `rank`.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn n(&self) -> usize {
        self.base.n
    }

    pub fn dim(&self) -> usize {
        self.base.d
    }

    /// Target value at sorted rank `i` (non-decreasing in `i`).
    pub fn target_at(&self, rank: usize) -> f64 {
        self.base.target[self.order[rank]]
    }

    /// Feature row at sorted rank `i`.
    pub fn row_at(&self, rank: usize) -> &[f64] {
        self.base.row(self.order[rank])
    }
}

/// Validate a raw numeric table and split off the target column.
///
/// `rows` are full table rows matching `header`; all non-target columns
/// become features in their original order.
pub fn validate_dataset(header: &[String], rows: &[Vec<f64>], target_column: &str) -> Result<Dataset> {
    if rows.is_empty() || header.len() < 2 {
        return Err(Error::EmptyTable);
    }
    let target_idx = header
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| Error::MissingTargetColumn(target_column.to_string()))?;
    let d = header.len() - 1;
    let mut features = Vec::with_capacity(rows.len() * d);
    let mut target = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(Error::DimensionMismatch {
                expected: header.len(),
                got: row.len(),
            });
        }
        for (c, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { row: r, col: c });
            }
            if c == target_idx {
                target.push(v);
            } else {
                features.push(v);
            }
        }
    }
    let column_names = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target_idx)
        .map(|(_, h)| h.clone())
        .collect();
    Dataset::new(features, target, column_names, None)
}

/// Stable ascending sort on the target; ties keep original row order.
pub fn sort_by_target(ds: Dataset) -> SortedDataset {
    let mut order: Vec<usize> = (0..ds.n).collect();
    order.sort_by(|&a, &b| ds.target[a].total_cmp(&ds.target[b]));
    SortedDataset { base: ds, order }
}
