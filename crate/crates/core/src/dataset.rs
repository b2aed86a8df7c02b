//! Tabular datasets: CSV loading, validation and min-max scaling.
//!
//! Features are stored row-major. Labels are opaque strings mapped to dense
//! integer ids in order of first appearance; they are only ever used by the
//! evaluation harness, never by fitness.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which CSV column, if any, holds class labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelColumn {
    None,
    Last,
    Named(String),
}

impl LabelColumn {
    /// Parses a CLI label spec: `last`, `none`, or a header name.
    pub fn parse(spec: &str) -> Self {
        match spec {
            "last" => LabelColumn::Last,
            "none" | "" => LabelColumn::None,
            name => LabelColumn::Named(name.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n: usize,
    d: usize,
    feature_names: Vec<String>,
    labels: Option<Vec<usize>>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from row-major features, validating every invariant.
    pub fn new(
        features: Vec<f64>,
        n: usize,
        d: usize,
        feature_names: Vec<String>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 instances, got {n}"
            )));
        }
        if d < 1 {
            return Err(Error::InvalidDataset("need at least 1 feature".into()));
        }
        if features.len() != n * d {
            return Err(Error::InvalidDataset(format!(
                "feature buffer has {} values, expected {n}x{d}",
                features.len()
            )));
        }
        if feature_names.len() != d {
            return Err(Error::InvalidDataset(format!(
                "{} feature names for {d} features",
                feature_names.len()
            )));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            let (row, column) = (pos / d, pos % d);
            return Err(Error::NonFinite {
                row: row + 1,
                column: column + 1,
                name: feature_names[column].clone(),
                value: features[pos].to_string(),
            });
        }
        let (labels, class_names) = match labels {
            None => (None, Vec::new()),
            Some(raw) => {
                if raw.len() != n {
                    return Err(Error::InvalidDataset(format!(
                        "{} labels for {n} instances",
                        raw.len()
                    )));
                }
                let (ids, names) = intern_labels(&raw);
                if names.len() < 2 {
                    return Err(Error::InvalidDataset(
                        "labels must contain at least 2 distinct classes".into(),
                    ));
                }
                (Some(ids), names)
            }
        };
        Ok(Dataset {
            features,
            n,
            d,
            feature_names,
            labels,
            class_names,
        })
    }

    /// Convenience constructor from nested rows with generated feature names.
    pub fn from_rows(rows: &[Vec<f64>], labels: Option<Vec<String>>) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::Ragged {
                row: i + 1,
                expected: d,
                found: r.len(),
            });
        }
        let names = (0..d).map(|j| format!("X{j}")).collect();
        Dataset::new(rows.concat(), n, d, names, labels)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.d)
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Label strings per instance, as originally read.
    pub fn label_strings(&self) -> Option<Vec<String>> {
        self.labels
            .as_ref()
            .map(|ids| ids.iter().map(|&c| self.class_names[c].clone()).collect())
    }

    /// Keeps only the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Result<Dataset> {
        let mut features = Vec::with_capacity(rows.len() * self.d);
        for &i in rows {
            features.extend_from_slice(self.row(i));
        }
        let labels = self
            .labels
            .as_ref()
            .map(|ids| rows.iter().map(|&i| self.class_names[ids[i]].clone()).collect());
        Dataset::new(features, rows.len(), self.d, self.feature_names.clone(), labels)
    }

    /// Fits per-column min/max on this dataset and applies it.
    pub fn scale_min_max(&self) -> (Dataset, Scaling) {
        let scaling = Scaling::fit(self);
        (scaling.apply_unchecked(self), scaling)
    }

    /// Writes the dataset as CSV; labels, when present, go in a trailing
    /// `label_header` column. Values use shortest round-trip formatting.
    pub fn write_csv(&self, path: &Path, label_header: &str) -> Result<()> {
        let mut header = self.feature_names.clone();
        let labels = self.label_strings();
        if labels.is_some() {
            header.push(label_header.to_string());
        }
        let rows = self.rows().enumerate().map(|(i, row)| {
            let mut fields: Vec<String> = row.iter().map(f64::to_string).collect();
            if let Some(l) = &labels {
                fields.push(l[i].clone());
            }
            fields
        });
        write_table(path, &header, rows)
    }
}

fn intern_labels(raw: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut names: Vec<String> = Vec::new();
    let ids = raw
        .iter()
        .map(|s| match names.iter().position(|n| n == s) {
            Some(id) => id,
            None => {
                names.push(s.clone());
                names.len() - 1
            }
        })
        .collect();
    (ids, names)
}

/// Per-feature linear scaling parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Scaling {
    pub fn fit(ds: &Dataset) -> Self {
        let mut min = vec![f64::INFINITY; ds.d];
        let mut max = vec![f64::NEG_INFINITY; ds.d];
        for row in ds.rows() {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Scaling { min, max }
    }

    pub fn scale_value(&self, j: usize, v: f64) -> f64 {
        let span = self.max[j] - self.min[j];
        if span > 0.0 {
            (v - self.min[j]) / span
        } else {
            0.0
        }
    }

    /// Applies stored parameters to new data. Values outside the fitted range
    /// are mapped linearly, not clamped.
    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        if ds.d != self.min.len() {
            return Err(Error::InvalidDataset(format!(
                "scaling fitted on {} features, dataset has {}",
                self.min.len(),
                ds.d
            )));
        }
        let scaled = self.apply_unchecked(ds);
        if let Some(pos) = scaled.features.iter().position(|v| !v.is_finite()) {
            let (row, column) = (pos / ds.d, pos % ds.d);
            return Err(Error::NonFinite {
                row: row + 1,
                column: column + 1,
                name: ds.feature_names[column].clone(),
                value: scaled.features[pos].to_string(),
            });
        }
        Ok(scaled)
    }

    fn apply_unchecked(&self, ds: &Dataset) -> Dataset {
        let d = ds.d;
        let features = ds
            .features
            .iter()
            .enumerate()
            .map(|(pos, &v)| self.scale_value(pos % d, v))
            .collect();
        Dataset {
            features,
            ..ds.clone()
        }
    }
}

/// Reads a CSV file with a header row.
pub fn load_csv(path: &Path, label: &LabelColumn) -> Result<Dataset> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&bytes, label)
}

/// Parses CSV bytes; see [`load_csv`].
pub fn parse_csv(bytes: &[u8], label: &LabelColumn) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::Empty("no header row".into()));
    }
    let width = header.len();
    let label_idx = match label {
        LabelColumn::None => None,
        LabelColumn::Last => Some(width - 1),
        LabelColumn::Named(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingLabel(name.clone()))?,
        ),
    };
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != label_idx)
        .map(|(_, h)| h.clone())
        .collect();
    let d = feature_names.len();

    let mut features = Vec::new();
    let mut labels = label_idx.map(|_| Vec::new());
    let mut n = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        // Data rows are numbered from 1, the header being row 0.
        let row = i + 1;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != width {
            return Err(Error::Ragged {
                row,
                expected: width,
                found: record.len(),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            if Some(j) == label_idx {
                labels.as_mut().unwrap().push(cell.to_string());
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: j + 1,
                name: header[j].clone(),
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    row,
                    column: j + 1,
                    name: header[j].clone(),
                    value: cell.to_string(),
                });
            }
            features.push(value);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Empty("no data rows".into()));
    }
    Dataset::new(features, n, d, feature_names, labels)
}

pub(crate) fn write_table<I>(path: &Path, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(&row)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}
