//! Annotated records, one-vs-all binarization, and seeded subsampling.

use crate::attributes::AttributeKind;
use crate::seed::stream_rng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
    Unlabeled,
}

impl Split {
    pub fn parse(s: &str) -> Option<Split> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Some(Split::Train),
            "validation" | "val" => Some(Split::Validation),
            "test" => Some(Split::Test),
            "unlabeled" | "none" => Some(Split::Unlabeled),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
            Split::Unlabeled => "unlabeled",
        }
    }
}

/// Per-attribute pair of manual and predicted modality indices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelPair {
    pub manual: Option<usize>,
    pub predicted: Option<usize>,
}

/// One image's annotations across the three sensitive attributes.
///
/// `is_predicted[a]` marks that the audit consumes the predicted label for
/// attribute `a`; records with the flag cleared are treated as manually
/// annotated ground truth and are never perturbed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedRecord {
    pub id: String,
    pub split: Split,
    pub labels: [LabelPair; 3],
    pub is_predicted: [bool; 3],
    pub ita_degrees: Option<f64>,
}

impl AnnotatedRecord {
    pub fn new(id: impl Into<String>, split: Split) -> Self {
        AnnotatedRecord {
            id: id.into(),
            split,
            labels: [LabelPair::default(); 3],
            is_predicted: [false; 3],
            ita_degrees: None,
        }
    }

    pub fn label_pair(&self, attr: AttributeKind) -> LabelPair {
        self.labels[attr.stream_id() as usize]
    }

    pub fn label_pair_mut(&mut self, attr: AttributeKind) -> &mut LabelPair {
        &mut self.labels[attr.stream_id() as usize]
    }

    pub fn predicted_flag(&self, attr: AttributeKind) -> bool {
        self.is_predicted[attr.stream_id() as usize]
    }

    pub fn set_predicted_flag(&mut self, attr: AttributeKind, value: bool) {
        self.is_predicted[attr.stream_id() as usize] = value;
    }

    /// The label the audit consumes: predicted when the attribute is
    /// flagged as predicted, manual otherwise.
    pub fn audit_label(&self, attr: AttributeKind) -> Option<usize> {
        let pair = self.label_pair(attr);
        if self.predicted_flag(attr) {
            pair.predicted
        } else {
            pair.manual
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RecordError {
    #[error("record {0} is missing the requested {1} label")]
    MissingLabel(String, AttributeKind),
    #[error("requested sample of {requested} from {available} records")]
    SampleTooLarge { requested: usize, available: usize },
    #[error("modality index {index} out of range for {attribute}")]
    ModalityOutOfRange {
        attribute: AttributeKind,
        index: usize,
    },
}

/// One-vs-all indicator view of an attribute over a record sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarizedView {
    pub attribute: AttributeKind,
    pub target_modality: usize,
    pub values: Vec<u8>,
}

impl BinarizedView {
    pub fn ones(&self) -> usize {
        self.values.iter().map(|&v| v as usize).sum()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Binarizes `attribute` against `target_modality`, reading predicted or
/// manual labels as requested. Every record must carry the requested label.
pub fn binarize(
    records: &[AnnotatedRecord],
    attribute: AttributeKind,
    target_modality: usize,
    use_predicted: bool,
) -> Result<BinarizedView, RecordError> {
    if target_modality >= attribute.cardinality() {
        return Err(RecordError::ModalityOutOfRange {
            attribute,
            index: target_modality,
        });
    }
    let mut values = Vec::with_capacity(records.len());
    for rec in records {
        let pair = rec.label_pair(attribute);
        let label = if use_predicted { pair.predicted } else { pair.manual };
        let label = label.ok_or_else(|| RecordError::MissingLabel(rec.id.clone(), attribute))?;
        values.push(u8::from(label == target_modality));
    }
    Ok(BinarizedView {
        attribute,
        target_modality,
        values,
    })
}

/// Binarizes the labels the audit consumes (predicted where flagged,
/// manual otherwise).
pub fn binarize_audit_labels(
    records: &[AnnotatedRecord],
    attribute: AttributeKind,
    target_modality: usize,
) -> Result<BinarizedView, RecordError> {
    if target_modality >= attribute.cardinality() {
        return Err(RecordError::ModalityOutOfRange {
            attribute,
            index: target_modality,
        });
    }
    let mut values = Vec::with_capacity(records.len());
    for rec in records {
        let label = rec
            .audit_label(attribute)
            .ok_or_else(|| RecordError::MissingLabel(rec.id.clone(), attribute))?;
        values.push(u8::from(label == target_modality));
    }
    Ok(BinarizedView {
        attribute,
        target_modality,
        values,
    })
}

/// Uniform sample of `n` records without replacement, preserving input
/// order among the selected records. Deterministic for a fixed seed.
pub fn subsample(
    records: &[AnnotatedRecord],
    n: usize,
    seed: u64,
) -> Result<Vec<AnnotatedRecord>, RecordError> {
    if n > records.len() {
        return Err(RecordError::SampleTooLarge {
            requested: n,
            available: records.len(),
        });
    }
    if n == records.len() {
        return Ok(records.to_vec());
    }
    let mut rng = stream_rng(seed, &[records.len() as u64, n as u64]);
    let mut indices: Vec<usize> = (0..records.len()).collect();
    // Partial Fisher-Yates: the first n slots end up a uniform sample.
    for i in 0..n {
        let j = rng.gen_range(i..indices.len());
        indices.swap(i, j);
    }
    indices.truncate(n);
    indices.sort_unstable();
    Ok(indices.into_iter().map(|i| records[i].clone()).collect())
}
