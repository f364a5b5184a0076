//! Annotation file ingestion and serialization.
//!
//! Annotations are delimited text (comma-separated, UTF-8, header row). The
//! column layout is supplied as a name map so any producer's schema can be
//! adapted without rewriting files; unmapped optional columns simply leave
//! the corresponding fields absent.

use crate::attributes::AttributeKind;
use crate::records::{AnnotatedRecord, Split};
use std::path::Path;
use thiserror::Error;

/// Column-name map for annotation files. `None` marks a column as absent
/// from the file; the `id` column is always required.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub id: String,
    pub split: Option<String>,
    pub manual: [Option<String>; 3],
    pub predicted: [Option<String>; 3],
    pub is_predicted: Option<String>,
    pub ita: Option<String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            id: "id".into(),
            split: Some("split".into()),
            manual: [
                Some("gender_manual".into()),
                Some("age_manual".into()),
                Some("fitzpatrick_manual".into()),
            ],
            predicted: [
                Some("gender_predicted".into()),
                Some("age_predicted".into()),
                Some("fitzpatrick_predicted".into()),
            ],
            is_predicted: Some("is_predicted".into()),
            ita: Some("ita".into()),
        }
    }
}

impl ColumnMap {
    /// Applies `name=column` overrides. Recognized names: `id`, `split`,
    /// `is_predicted`, `ita`, and `<attribute>_manual` / `<attribute>_predicted`.
    /// An empty column name unmaps the field.
    pub fn with_overrides(mut self, overrides: &[(String, String)]) -> Result<Self, IngestError> {
        for (key, col) in overrides {
            let col_opt = if col.is_empty() { None } else { Some(col.clone()) };
            match key.as_str() {
                "id" => {
                    self.id = col_opt.ok_or_else(|| IngestError::BadColumnOverride(key.clone()))?
                }
                "split" => self.split = col_opt,
                "is_predicted" => self.is_predicted = col_opt,
                "ita" => self.ita = col_opt,
                other => {
                    let (attr_name, field) = other
                        .rsplit_once('_')
                        .ok_or_else(|| IngestError::BadColumnOverride(key.clone()))?;
                    let attr = AttributeKind::from_label(attr_name)
                        .ok_or_else(|| IngestError::BadColumnOverride(key.clone()))?;
                    let slot = attr.stream_id() as usize;
                    match field {
                        "manual" => self.manual[slot] = col_opt,
                        "predicted" => self.predicted[slot] = col_opt,
                        _ => return Err(IngestError::BadColumnOverride(key.clone())),
                    }
                }
            }
        }
        Ok(self)
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("missing column {0:?} in header")]
    MissingColumn(String),
    #[error("row {row}: unknown {column} value {value:?}")]
    UnknownModality {
        row: usize,
        column: String,
        value: String,
    },
    #[error("malformed row at line {0}")]
    MalformedRow(usize),
    #[error("unrecognized column override {0:?}")]
    BadColumnOverride(String),
}

fn resolve(header: &csv::StringRecord, name: &str) -> Result<usize, IngestError> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
}

fn resolve_opt(
    header: &csv::StringRecord,
    name: &Option<String>,
) -> Result<Option<usize>, IngestError> {
    name.as_ref().map(|n| resolve(header, n)).transpose()
}

/// Loads annotation records from a CSV file.
///
/// Modality strings resolve case-insensitively against the taxonomy; empty
/// cells become absent optionals. Rows are numbered from 1 (header excluded)
/// in error messages.
pub fn load_annotations(
    path: impl AsRef<Path>,
    schema: &ColumnMap,
) -> Result<Vec<AnnotatedRecord>, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_annotations(file, schema)
}

/// Parses annotation records from any CSV source.
pub fn read_annotations(
    source: impl std::io::Read,
    schema: &ColumnMap,
) -> Result<Vec<AnnotatedRecord>, IngestError> {
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_reader(source);
    let header = reader
        .headers()
        .map_err(|_| IngestError::MalformedRow(0))?
        .clone();

    let id_idx = resolve(&header, &schema.id)?;
    let split_idx = resolve_opt(&header, &schema.split)?;
    let mut manual_idx = [None; 3];
    let mut predicted_idx = [None; 3];
    for attr in AttributeKind::ALL {
        let slot = attr.stream_id() as usize;
        manual_idx[slot] = resolve_opt(&header, &schema.manual[slot])?;
        predicted_idx[slot] = resolve_opt(&header, &schema.predicted[slot])?;
    }
    let flag_idx = resolve_opt(&header, &schema.is_predicted)?;
    let ita_idx = resolve_opt(&header, &schema.ita)?;

    let mut records = Vec::new();
    for (row_num, row) in reader.records().enumerate() {
        let row_num = row_num + 1;
        let row = row.map_err(|_| IngestError::MalformedRow(row_num))?;
        let get = |idx: usize| row.get(idx).map(str::trim).unwrap_or("");

        let id = get(id_idx);
        if id.is_empty() {
            return Err(IngestError::MalformedRow(row_num));
        }
        let split = match split_idx {
            Some(idx) => {
                let cell = get(idx);
                if cell.is_empty() {
                    Split::Unlabeled
                } else {
                    Split::parse(cell).ok_or_else(|| IngestError::UnknownModality {
                        row: row_num,
                        column: schema.split.clone().unwrap_or_default(),
                        value: cell.to_string(),
                    })?
                }
            }
            None => Split::Test,
        };

        let mut record = AnnotatedRecord::new(id, split);
        for attr in AttributeKind::ALL {
            let slot = attr.stream_id() as usize;
            for (idx, target) in [
                (manual_idx[slot], true),
                (predicted_idx[slot], false),
            ] {
                let Some(idx) = idx else { continue };
                let cell = get(idx);
                if cell.is_empty() {
                    continue;
                }
                let modality =
                    attr.parse_modality(cell)
                        .ok_or_else(|| IngestError::UnknownModality {
                            row: row_num,
                            column: if target {
                                schema.manual[slot].clone().unwrap_or_default()
                            } else {
                                schema.predicted[slot].clone().unwrap_or_default()
                            },
                            value: cell.to_string(),
                        })?;
                let pair = record.label_pair_mut(attr);
                if target {
                    pair.manual = Some(modality);
                } else {
                    pair.predicted = Some(modality);
                }
            }
        }
        if let Some(idx) = flag_idx {
            let cell = get(idx);
            if !cell.is_empty() {
                let flag = match cell.to_ascii_lowercase().as_str() {
                    "1" | "true" | "yes" => true,
                    "0" | "false" | "no" => false,
                    _ => {
                        return Err(IngestError::UnknownModality {
                            row: row_num,
                            column: schema.is_predicted.clone().unwrap_or_default(),
                            value: cell.to_string(),
                        })
                    }
                };
                record.is_predicted = [flag; 3];
            }
        }
        if let Some(idx) = ita_idx {
            let cell = get(idx);
            if !cell.is_empty() {
                record.ita_degrees =
                    Some(cell.parse().map_err(|_| IngestError::MalformedRow(row_num))?);
            }
        }
        records.push(record);
    }
    Ok(records)
}

/// Writes records back out under the given schema. Round-trips with
/// [`load_annotations`].
pub fn save_annotations(
    records: &[AnnotatedRecord],
    path: impl AsRef<Path>,
    schema: &ColumnMap,
) -> Result<(), IngestError> {
    let path = path.as_ref();
    let io_err = |e: std::io::Error| IngestError::Io {
        path: path.display().to_string(),
        source: e,
    };
    let mut columns: Vec<String> = vec![schema.id.clone()];
    let mut writers: Vec<Box<dyn Fn(&AnnotatedRecord) -> String>> =
        vec![Box::new(|r: &AnnotatedRecord| r.id.clone())];
    if let Some(name) = &schema.split {
        columns.push(name.clone());
        writers.push(Box::new(|r| r.split.label().to_string()));
    }
    for attr in AttributeKind::ALL {
        let slot = attr.stream_id() as usize;
        if let Some(name) = &schema.manual[slot] {
            columns.push(name.clone());
            writers.push(Box::new(move |r| {
                r.label_pair(attr)
                    .manual
                    .map(|m| attr.modality_name(m).to_string())
                    .unwrap_or_default()
            }));
        }
        if let Some(name) = &schema.predicted[slot] {
            columns.push(name.clone());
            writers.push(Box::new(move |r| {
                r.label_pair(attr)
                    .predicted
                    .map(|m| attr.modality_name(m).to_string())
                    .unwrap_or_default()
            }));
        }
    }
    if let Some(name) = &schema.is_predicted {
        columns.push(name.clone());
        writers.push(Box::new(|r| {
            u8::from(r.is_predicted.iter().any(|&f| f)).to_string()
        }));
    }
    if let Some(name) = &schema.ita {
        columns.push(name.clone());
        writers.push(Box::new(|r| {
            r.ita_degrees.map(|v| v.to_string()).unwrap_or_default()
        }));
    }

    let mut writer = csv::Writer::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => IngestError::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e.to_string()),
        },
        _ => IngestError::MalformedRow(0),
    })?;
    writer
        .write_record(&columns)
        .map_err(|e| io_err(std::io::Error::other(e.to_string())))?;
    for record in records {
        let row: Vec<String> = writers.iter().map(|w| w(record)).collect();
        writer
            .write_record(&row)
            .map_err(|e| io_err(std::io::Error::other(e.to_string())))?;
    }
    writer
        .flush()
        .map_err(|e| io_err(std::io::Error::other(e.to_string())))?;
    Ok(())
}

/// Parses records from an in-memory CSV string with the same machinery as
/// file ingestion.
pub fn parse_annotations(
    csv_text: &str,
    schema: &ColumnMap,
) -> Result<Vec<AnnotatedRecord>, IngestError> {
    read_annotations(csv_text.as_bytes(), schema)
}
