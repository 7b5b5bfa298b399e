use std::path::Path;

use plli_core::Dataset;

use crate::errors::{CliError, CliResult};

/// A parsed CSV: header names plus fully numeric rows.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_table(path: &Path, delimiter: u8) -> CliResult<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(CliError::Validation(format!(
                "row {} has {} fields, header has {}",
                line + 1,
                record.len(),
                header.len()
            )));
        }
        let mut row = Vec::with_capacity(header.len());
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                CliError::Validation(format!(
                    "row {}, column '{}': cannot parse '{}' as a number",
                    line + 1,
                    header[col],
                    field
                ))
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Validation(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(Table { header, rows })
}

pub fn column_index(header: &[String], name: &str) -> CliResult<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::Validation(format!("column '{name}' not found in input")))
}

/// Extract one column by name.
pub fn column_values(table: &Table, name: &str) -> CliResult<Vec<f64>> {
    let idx = column_index(&table.header, name)?;
    Ok(table.rows.iter().map(|r| r[idx]).collect())
}

/// Build a dataset using every column except `target_col` as a feature, in
/// header order.
pub fn dataset_from_table(table: &Table, target_col: &str) -> CliResult<Dataset> {
    let target_idx = column_index(&table.header, target_col)?;
    let feature_names: Vec<String> = table
        .header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target_idx)
        .map(|(_, h)| h.clone())
        .collect();
    build_dataset(table, &feature_names, target_col)
}

/// Build a dataset with the feature columns in exactly the order given,
/// matched by name — CSV column order is irrelevant.
pub fn build_dataset(table: &Table, feature_names: &[String], target_col: &str) -> CliResult<Dataset> {
    let target_idx = column_index(&table.header, target_col)?;
    let mut feature_idx = Vec::with_capacity(feature_names.len());
    for name in feature_names {
        let idx = column_index(&table.header, name)?;
        if idx == target_idx {
            return Err(CliError::Validation(format!(
                "column '{name}' is both a feature and the target"
            )));
        }
        feature_idx.push(idx);
    }
    let mut features = Vec::with_capacity(table.rows.len() * feature_idx.len());
    let mut target = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        for &idx in &feature_idx {
            features.push(row[idx]);
        }
        target.push(row[target_idx]);
    }
    Ok(Dataset::new(
        features,
        target,
        feature_names.to_vec(),
        None,
    )?)
}
