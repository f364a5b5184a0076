//! Classifier reliability rates estimated on the validation split.
//!
//! Three families of rates drive the error-aware perturbations, all in
//! one-vs-all terms for an attribute modality m:
//!   - accuracy: probability the predicted indicator of m equals the true
//!     indicator,
//!   - precision: probability the true indicator is 1 given the predicted
//!     indicator is 1,
//!   - conditional accuracy: accuracy of the tested modality's indicator
//!     among records whose true conditioning label (e.g. gender) is fixed.
//!
//! Rates with empty support are absent rather than defaulted: a silent
//! accuracy-of-1 assumption would fabricate confidence.

use crate::attributes::AttributeKind;
use crate::records::AnnotatedRecord;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rate: f64,
    pub support: u64,
}

impl RateEstimate {
    fn from_counts(hits: u64, total: u64) -> Option<RateEstimate> {
        (total > 0).then(|| RateEstimate {
            rate: hits as f64 / total as f64,
            support: total,
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ReliabilityError {
    #[error("no support to estimate {rate} for {attribute} modality {modality}")]
    EmptySupport {
        rate: &'static str,
        attribute: AttributeKind,
        modality: usize,
    },
    #[error("adjacent accuracy requires an ordered attribute, got {0}")]
    UnorderedAttribute(AttributeKind),
    #[error("rate out of [0,1]: {0}")]
    InvalidRate(f64),
    #[error("failed to read reliability file {path}: {message}")]
    Io { path: String, message: String },
}

/// Per-modality rate vectors for one attribute, indexed by modality.
type RateVec = Vec<Option<RateEstimate>>;

/// Reliability rates for the error-aware protocol. Serializable so paper
/// fixtures (e.g. a known gender accuracy) can be loaded instead of
/// estimated.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityTable {
    /// accuracy[attribute][modality]
    accuracy: BTreeMap<AttributeKind, RateVec>,
    /// precision[attribute][modality]
    precision: BTreeMap<AttributeKind, RateVec>,
    /// conditional_accuracy[tested][conditioning][tested modality][conditioning modality]
    conditional_accuracy:
        BTreeMap<AttributeKind, BTreeMap<AttributeKind, Vec<RateVec>>>,
}

impl ReliabilityTable {
    pub fn accuracy(
        &self,
        attribute: AttributeKind,
        modality: usize,
    ) -> Result<f64, ReliabilityError> {
        self.accuracy
            .get(&attribute)
            .and_then(|v| v.get(modality).copied().flatten())
            .map(|e| e.rate)
            .ok_or(ReliabilityError::EmptySupport {
                rate: "accuracy",
                attribute,
                modality,
            })
    }

    pub fn precision(
        &self,
        attribute: AttributeKind,
        modality: usize,
    ) -> Result<f64, ReliabilityError> {
        self.precision
            .get(&attribute)
            .and_then(|v| v.get(modality).copied().flatten())
            .map(|e| e.rate)
            .ok_or(ReliabilityError::EmptySupport {
                rate: "precision",
                attribute,
                modality,
            })
    }

    pub fn conditional_accuracy(
        &self,
        tested: AttributeKind,
        tested_modality: usize,
        conditioning: AttributeKind,
        conditioning_modality: usize,
    ) -> Result<f64, ReliabilityError> {
        self.conditional_accuracy
            .get(&tested)
            .and_then(|by_cond| by_cond.get(&conditioning))
            .and_then(|grid| grid.get(tested_modality))
            .and_then(|row| row.get(conditioning_modality).copied().flatten())
            .map(|e| e.rate)
            .ok_or(ReliabilityError::EmptySupport {
                rate: "conditional accuracy",
                attribute: tested,
                modality: tested_modality,
            })
    }

    pub fn accuracy_estimate(
        &self,
        attribute: AttributeKind,
        modality: usize,
    ) -> Option<RateEstimate> {
        self.accuracy
            .get(&attribute)
            .and_then(|v| v.get(modality).copied().flatten())
    }

    pub fn precision_estimate(
        &self,
        attribute: AttributeKind,
        modality: usize,
    ) -> Option<RateEstimate> {
        self.precision
            .get(&attribute)
            .and_then(|v| v.get(modality).copied().flatten())
    }

    pub fn conditional_estimate(
        &self,
        tested: AttributeKind,
        tested_modality: usize,
        conditioning: AttributeKind,
        conditioning_modality: usize,
    ) -> Option<RateEstimate> {
        self.conditional_accuracy
            .get(&tested)
            .and_then(|by_cond| by_cond.get(&conditioning))
            .and_then(|grid| grid.get(tested_modality))
            .and_then(|row| row.get(conditioning_modality).copied().flatten())
    }

    /// Builder used by fixtures and tests.
    pub fn set_accuracy(
        &mut self,
        attribute: AttributeKind,
        modality: usize,
        rate: f64,
        support: u64,
    ) -> Result<(), ReliabilityError> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(ReliabilityError::InvalidRate(rate));
        }
        self.accuracy
            .entry(attribute)
            .or_insert_with(|| vec![None; attribute.cardinality()])[modality] =
            Some(RateEstimate { rate, support });
        Ok(())
    }

    pub fn set_precision(
        &mut self,
        attribute: AttributeKind,
        modality: usize,
        rate: f64,
        support: u64,
    ) -> Result<(), ReliabilityError> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(ReliabilityError::InvalidRate(rate));
        }
        self.precision
            .entry(attribute)
            .or_insert_with(|| vec![None; attribute.cardinality()])[modality] =
            Some(RateEstimate { rate, support });
        Ok(())
    }

    pub fn set_conditional_accuracy(
        &mut self,
        tested: AttributeKind,
        tested_modality: usize,
        conditioning: AttributeKind,
        conditioning_modality: usize,
        rate: f64,
        support: u64,
    ) -> Result<(), ReliabilityError> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(ReliabilityError::InvalidRate(rate));
        }
        let grid = self
            .conditional_accuracy
            .entry(tested)
            .or_default()
            .entry(conditioning)
            .or_insert_with(|| {
                vec![vec![None; conditioning.cardinality()]; tested.cardinality()]
            });
        grid[tested_modality][conditioning_modality] = Some(RateEstimate { rate, support });
        Ok(())
    }

    /// Table with every rate set to 1; useful as a no-correction baseline.
    pub fn perfect(conditioning: AttributeKind) -> Self {
        let mut table = ReliabilityTable::default();
        for attr in AttributeKind::ALL {
            for m in 0..attr.cardinality() {
                table.set_accuracy(attr, m, 1.0, 1).unwrap();
                table.set_precision(attr, m, 1.0, 1).unwrap();
                if attr != conditioning {
                    for g in 0..conditioning.cardinality() {
                        table
                            .set_conditional_accuracy(attr, m, conditioning, g, 1.0, 1)
                            .unwrap();
                    }
                }
            }
        }
        table
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ReliabilityError> {
        let path = path.as_ref();
        let io = |message: String| ReliabilityError::Io {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| io(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| io(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ReliabilityError> {
        let path = path.as_ref();
        let io = |message: String| ReliabilityError::Io {
            path: path.display().to_string(),
            message,
        };
        let text = serde_json::to_string_pretty(self).map_err(|e| io(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| io(e.to_string()))
    }
}

fn has_both_labels(record: &AnnotatedRecord, attr: AttributeKind) -> bool {
    let pair = record.label_pair(attr);
    pair.manual.is_some() && pair.predicted.is_some()
}

/// Estimates all reliability rates from records carrying both manual and
/// predicted labels (normally the validation split). Conditional accuracies
/// are estimated with gender as the conditioning attribute, matching the
/// representation audit.
pub fn estimate_reliability(validation_records: &[AnnotatedRecord]) -> ReliabilityTable {
    let mut table = ReliabilityTable::default();
    let conditioning = AttributeKind::Gender;

    for attr in AttributeKind::ALL {
        let labeled: Vec<(usize, usize)> = validation_records
            .iter()
            .filter(|r| has_both_labels(r, attr))
            .map(|r| {
                let pair = r.label_pair(attr);
                (pair.manual.unwrap(), pair.predicted.unwrap())
            })
            .collect();
        for m in 0..attr.cardinality() {
            let total = labeled.len() as u64;
            let hits = labeled
                .iter()
                .filter(|&&(manual, pred)| (manual == m) == (pred == m))
                .count() as u64;
            if let Some(e) = RateEstimate::from_counts(hits, total) {
                table.accuracy.entry(attr).or_insert_with(|| {
                    vec![None; attr.cardinality()]
                })[m] = Some(e);
            }
            let predicted_m: Vec<_> =
                labeled.iter().filter(|&&(_, pred)| pred == m).collect();
            let prec_hits = predicted_m
                .iter()
                .filter(|&&&(manual, _)| manual == m)
                .count() as u64;
            if let Some(e) = RateEstimate::from_counts(prec_hits, predicted_m.len() as u64) {
                table.precision.entry(attr).or_insert_with(|| {
                    vec![None; attr.cardinality()]
                })[m] = Some(e);
            }
        }

        if attr == conditioning {
            continue;
        }
        // conditional accuracy: condition on the TRUE (manual) gender
        for g in 0..conditioning.cardinality() {
            let cohort: Vec<(usize, usize)> = validation_records
                .iter()
                .filter(|r| {
                    has_both_labels(r, attr)
                        && r.label_pair(conditioning).manual == Some(g)
                })
                .map(|r| {
                    let pair = r.label_pair(attr);
                    (pair.manual.unwrap(), pair.predicted.unwrap())
                })
                .collect();
            for m in 0..attr.cardinality() {
                let hits = cohort
                    .iter()
                    .filter(|&&(manual, pred)| (manual == m) == (pred == m))
                    .count() as u64;
                if let Some(e) = RateEstimate::from_counts(hits, cohort.len() as u64) {
                    table
                        .set_conditional_accuracy(attr, m, conditioning, g, e.rate, e.support)
                        .unwrap();
                }
            }
        }
    }
    table
}

/// Fraction of records whose predicted modality is within one class of the
/// manual modality; only meaningful for ordered attributes.
pub fn adjacent_accuracy(
    validation_records: &[AnnotatedRecord],
    attribute: AttributeKind,
) -> Result<f64, ReliabilityError> {
    if !attribute.is_ordered() {
        return Err(ReliabilityError::UnorderedAttribute(attribute));
    }
    let labeled: Vec<(usize, usize)> = validation_records
        .iter()
        .filter(|r| has_both_labels(r, attribute))
        .map(|r| {
            let pair = r.label_pair(attribute);
            (pair.manual.unwrap(), pair.predicted.unwrap())
        })
        .collect();
    if labeled.is_empty() {
        return Err(ReliabilityError::EmptySupport {
            rate: "adjacent accuracy",
            attribute,
            modality: 0,
        });
    }
    let hits = labeled
        .iter()
        .filter(|&&(manual, pred)| manual.abs_diff(pred) <= 1)
        .count();
    Ok(hits as f64 / labeled.len() as f64)
}
