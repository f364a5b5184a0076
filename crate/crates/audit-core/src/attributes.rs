//! Sensitive-attribute taxonomies.
//!
//! Gender is stored as a binary taxonomy matching the annotation data this
//! tool consumes; that encoding reflects the annotators' reading of the
//! images and is a known limitation, not an endorsement of a binary notion
//! of gender. Fitzpatrick phototypes III and IV are merged into a single
//! class because non-expert annotators cannot reliably distinguish them.

use serde::{Deserialize, Serialize};
use std::fmt;

/// The three audited attributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Gender,
    Age,
    Fitzpatrick,
}

pub const GENDER_MODALITIES: &[&str] = &["Men", "Women"];
pub const AGE_MODALITIES: &[&str] = &[
    "0-2", "3-9", "10-19", "20-29", "30-39", "40-49", "50-59", "60-69", "70+",
];
pub const FITZPATRICK_MODALITIES: &[&str] = &["I", "II", "III-IV", "V", "VI"];

impl AttributeKind {
    pub const ALL: [AttributeKind; 3] = [
        AttributeKind::Gender,
        AttributeKind::Age,
        AttributeKind::Fitzpatrick,
    ];

    /// Number of modalities.
    pub fn cardinality(self) -> usize {
        self.modality_names().len()
    }

    pub fn modality_names(self) -> &'static [&'static str] {
        match self {
            AttributeKind::Gender => GENDER_MODALITIES,
            AttributeKind::Age => AGE_MODALITIES,
            AttributeKind::Fitzpatrick => FITZPATRICK_MODALITIES,
        }
    }

    pub fn modality_name(self, index: usize) -> &'static str {
        self.modality_names()[index]
    }

    /// Whether the modalities carry a natural order (age brackets,
    /// Fitzpatrick phototypes).
    pub fn is_ordered(self) -> bool {
        matches!(self, AttributeKind::Age | AttributeKind::Fitzpatrick)
    }

    /// Resolves a modality label case-insensitively against the taxonomy.
    pub fn parse_modality(self, value: &str) -> Option<usize> {
        let v = value.trim();
        self.modality_names()
            .iter()
            .position(|name| name.eq_ignore_ascii_case(v))
    }

    /// Stable numeric id used in seed derivation.
    pub(crate) fn stream_id(self) -> u64 {
        match self {
            AttributeKind::Gender => 0,
            AttributeKind::Age => 1,
            AttributeKind::Fitzpatrick => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AttributeKind::Gender => "gender",
            AttributeKind::Age => "age",
            AttributeKind::Fitzpatrick => "fitzpatrick",
        }
    }

    pub fn from_label(s: &str) -> Option<AttributeKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gender" => Some(AttributeKind::Gender),
            "age" => Some(AttributeKind::Age),
            "fitzpatrick" | "fitz" => Some(AttributeKind::Fitzpatrick),
            _ => None,
        }
    }
}

impl fmt::Display for AttributeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinalities_match_taxonomy() {
        assert_eq!(AttributeKind::Gender.cardinality(), 2);
        assert_eq!(AttributeKind::Age.cardinality(), 9);
        assert_eq!(AttributeKind::Fitzpatrick.cardinality(), 5);
    }

    #[test]
    fn modality_parsing_is_case_insensitive() {
        assert_eq!(AttributeKind::Fitzpatrick.parse_modality("iii-iv"), Some(2));
        assert_eq!(AttributeKind::Gender.parse_modality("MEN"), Some(0));
        assert_eq!(AttributeKind::Age.parse_modality(" 70+ "), Some(8));
        assert_eq!(AttributeKind::Fitzpatrick.parse_modality("VII"), None);
    }

    #[test]
    fn only_age_and_fitzpatrick_are_ordered() {
        assert!(!AttributeKind::Gender.is_ordered());
        assert!(AttributeKind::Age.is_ordered());
        assert!(AttributeKind::Fitzpatrick.is_ordered());
    }
}
