//! Reference (expected) categorical distributions for the parity tests.
//!
//! Defaults ship with the tool: an even gender split, and world-population
//! estimates for the age brackets and Fitzpatrick classes. Users can supply
//! their own via a JSON config keyed by attribute.

use crate::attributes::AttributeKind;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

const PROBABILITY_SUM_TOL: f64 = 1e-9;

/// Expected categorical distribution an attribute is tested against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDistribution {
    pub attribute: AttributeKind,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum ReferenceError {
    #[error("{attribute} reference needs {expected} probabilities, got {actual}")]
    WrongCardinality {
        attribute: AttributeKind,
        expected: usize,
        actual: usize,
    },
    #[error("{attribute} reference probabilities must be >= 0 and sum to 1 (sum = {sum})")]
    NotADistribution { attribute: AttributeKind, sum: f64 },
    #[error("no reference distribution for {0}")]
    MissingAttribute(AttributeKind),
    #[error("failed to read reference file {path}: {message}")]
    Io { path: String, message: String },
}

impl ReferenceDistribution {
    pub fn new(attribute: AttributeKind, probabilities: Vec<f64>) -> Result<Self, ReferenceError> {
        if probabilities.len() != attribute.cardinality() {
            return Err(ReferenceError::WrongCardinality {
                attribute,
                expected: attribute.cardinality(),
                actual: probabilities.len(),
            });
        }
        let sum: f64 = probabilities.iter().sum();
        if probabilities.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(ReferenceError::NotADistribution { attribute, sum });
        }
        Ok(ReferenceDistribution {
            attribute,
            probabilities,
        })
    }

    /// Builds a distribution from nonnegative weights (e.g. percentage
    /// tables, which often carry rounding slack) by normalizing their sum
    /// to 1.
    pub fn from_weights(attribute: AttributeKind, weights: Vec<f64>) -> Result<Self, ReferenceError> {
        if weights.len() != attribute.cardinality() {
            return Err(ReferenceError::WrongCardinality {
                attribute,
                expected: attribute.cardinality(),
                actual: weights.len(),
            });
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || sum <= 0.0 {
            return Err(ReferenceError::NotADistribution { attribute, sum });
        }
        ReferenceDistribution::new(attribute, weights.iter().map(|&w| w / sum).collect())
    }

    pub fn probability(&self, modality: usize) -> f64 {
        self.probabilities[modality]
    }
}

/// The full set of reference distributions used by an audit run.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSet {
    by_attribute: BTreeMap<AttributeKind, ReferenceDistribution>,
}

impl ReferenceSet {
    /// Built-in defaults: gender 50/50; age brackets 2/12/17/17/15/13/11/8/7
    /// (published percentages, which carry rounding slack and are
    /// normalized here); Fitzpatrick classes 4/15/50/19/12 %.
    pub fn builtin() -> Self {
        let mut by_attribute = BTreeMap::new();
        by_attribute.insert(
            AttributeKind::Gender,
            ReferenceDistribution::new(AttributeKind::Gender, vec![0.5, 0.5]).unwrap(),
        );
        by_attribute.insert(
            AttributeKind::Age,
            ReferenceDistribution::from_weights(
                AttributeKind::Age,
                vec![2.0, 12.0, 17.0, 17.0, 15.0, 13.0, 11.0, 8.0, 7.0],
            )
            .unwrap(),
        );
        by_attribute.insert(
            AttributeKind::Fitzpatrick,
            ReferenceDistribution::from_weights(
                AttributeKind::Fitzpatrick,
                vec![4.0, 15.0, 50.0, 19.0, 12.0],
            )
            .unwrap(),
        );
        ReferenceSet { by_attribute }
    }

    pub fn empty() -> Self {
        ReferenceSet {
            by_attribute: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, dist: ReferenceDistribution) {
        self.by_attribute.insert(dist.attribute, dist);
    }

    pub fn get(&self, attribute: AttributeKind) -> Result<&ReferenceDistribution, ReferenceError> {
        self.by_attribute
            .get(&attribute)
            .ok_or(ReferenceError::MissingAttribute(attribute))
    }

    /// Loads a JSON object of the form
    /// `{"gender": [0.5, 0.5], "age": [...], "fitzpatrick": [...]}`.
    /// Values are weights (percentages are fine) and are normalized;
    /// attributes missing from the file fall back to the built-in defaults.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ReferenceError> {
        let path = path.as_ref();
        let io = |message: String| ReferenceError::Io {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| io(e.to_string()))?;
        let raw: BTreeMap<String, Vec<f64>> =
            serde_json::from_str(&text).map_err(|e| io(e.to_string()))?;
        let mut set = ReferenceSet::builtin();
        for (key, weights) in raw {
            let attribute = AttributeKind::from_label(&key)
                .ok_or_else(|| io(format!("unknown attribute {key:?}")))?;
            set.insert(
                ReferenceDistribution::from_weights(attribute, weights)
                    .map_err(|e| io(e.to_string()))?,
            );
        }
        Ok(set)
    }
}
