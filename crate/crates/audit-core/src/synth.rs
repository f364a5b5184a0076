//! Synthetic dataset generation for validating the audit corrections:
//! known true-label distributions, optional gender-conditional skews to
//! plant representation bias, and confusion-matrix prediction noise.

use crate::attributes::AttributeKind;
use crate::records::{AnnotatedRecord, Split};
use crate::seed::stream_rng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const PROBABILITY_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
}

/// Per-attribute generation settings. `confusion[t][p]` is the probability
/// of predicting modality `p` when the true modality is `t`; omitted means
/// the identity (perfect predictions).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub marginal: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub given_gender: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confusion: Option<Vec<Vec<f64>>>,
}

/// Specification of a synthetic annotated dataset.
///
/// Records flagged manual (a `fraction_manual` share, chosen uniformly) are
/// placed in the validation split with their predicted labels still
/// recorded, so the same dataset supports reliability estimation and
/// provides the uniform-resampling pools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub gender: AttributeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age: Option<AttributeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitzpatrick: Option<AttributeSpec>,
    pub fraction_manual: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn load_json(text: &str) -> Result<Self, SynthError> {
        let spec: SynthSpec = serde_json::from_str(text)
            .map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n == 0 {
            return Err(SynthError::InvalidSpec("n must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.fraction_manual) {
            return Err(SynthError::InvalidSpec(format!(
                "fraction_manual must lie in [0,1], got {}",
                self.fraction_manual
            )));
        }
        for (attr, spec) in self.attribute_specs() {
            validate_distribution(&spec.marginal, attr.cardinality(), attr.label())?;
            if let Some(cond) = &spec.given_gender {
                if cond.len() != AttributeKind::Gender.cardinality() {
                    return Err(SynthError::InvalidSpec(format!(
                        "{} gender-conditional block needs one row per gender",
                        attr.label()
                    )));
                }
                for row in cond {
                    validate_distribution(row, attr.cardinality(), attr.label())?;
                }
            }
            if let Some(confusion) = &spec.confusion {
                if confusion.len() != attr.cardinality() {
                    return Err(SynthError::InvalidSpec(format!(
                        "{} confusion matrix needs one row per modality",
                        attr.label()
                    )));
                }
                for row in confusion {
                    validate_distribution(row, attr.cardinality(), attr.label())?;
                }
            }
        }
        if self.gender.given_gender.is_some() {
            return Err(SynthError::InvalidSpec(
                "gender cannot be conditioned on itself".into(),
            ));
        }
        Ok(())
    }

    fn attribute_specs(&self) -> Vec<(AttributeKind, &AttributeSpec)> {
        let mut specs = vec![(AttributeKind::Gender, &self.gender)];
        if let Some(age) = &self.age {
            specs.push((AttributeKind::Age, age));
        }
        if let Some(fitz) = &self.fitzpatrick {
            specs.push((AttributeKind::Fitzpatrick, fitz));
        }
        specs
    }
}

fn validate_distribution(p: &[f64], cardinality: usize, what: &str) -> Result<(), SynthError> {
    if p.len() != cardinality {
        return Err(SynthError::InvalidSpec(format!(
            "{what} distribution needs {cardinality} entries, got {}",
            p.len()
        )));
    }
    let sum: f64 = p.iter().sum();
    if p.iter().any(|&x| x < 0.0) || (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(SynthError::InvalidSpec(format!(
            "{what} probabilities must be >= 0 and sum to 1 (sum = {sum})"
        )));
    }
    Ok(())
}

fn draw_categorical<R: Rng>(p: &[f64], rng: &mut R) -> usize {
    let mut target = rng.gen_range(0.0..1.0);
    for (i, &prob) in p.iter().enumerate() {
        if target < prob {
            return i;
        }
        target -= prob;
    }
    p.len() - 1
}

/// Generates the dataset described by `spec`. Deterministic per seed.
pub fn synth_generate(spec: &SynthSpec) -> Result<Vec<AnnotatedRecord>, SynthError> {
    spec.validate()?;
    let mut rng = stream_rng(spec.seed, &[spec.n as u64]);

    // choose exactly round(fraction_manual * n) manual records
    let n_manual = (spec.fraction_manual * spec.n as f64).round() as usize;
    let mut manual_flags = vec![false; spec.n];
    let mut indices: Vec<usize> = (0..spec.n).collect();
    for i in 0..n_manual.min(spec.n) {
        let j = rng.gen_range(i..indices.len());
        indices.swap(i, j);
        manual_flags[indices[i]] = true;
    }

    let mut records = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let manual_record = manual_flags[i];
        let split = if manual_record {
            Split::Validation
        } else {
            Split::Test
        };
        let mut record = AnnotatedRecord::new(format!("synth{i:07}"), split);

        let gender_true = draw_categorical(&spec.gender.marginal, &mut rng);
        for (attr, attr_spec) in spec.attribute_specs() {
            let truth = if attr == AttributeKind::Gender {
                gender_true
            } else {
                match &attr_spec.given_gender {
                    Some(cond) => draw_categorical(&cond[gender_true], &mut rng),
                    None => draw_categorical(&attr_spec.marginal, &mut rng),
                }
            };
            let predicted = match &attr_spec.confusion {
                Some(confusion) => draw_categorical(&confusion[truth], &mut rng),
                None => truth,
            };
            let pair = record.label_pair_mut(attr);
            pair.manual = Some(truth);
            pair.predicted = Some(predicted);
            record.set_predicted_flag(attr, !manual_record);
        }
        records.push(record);
    }
    Ok(records)
}

/// Symmetric confusion matrix: `accuracy` on the diagonal, the remaining
/// mass spread evenly over the other modalities.
pub fn symmetric_confusion(cardinality: usize, accuracy: f64) -> Vec<Vec<f64>> {
    let off = if cardinality > 1 {
        (1.0 - accuracy) / (cardinality - 1) as f64
    } else {
        0.0
    };
    (0..cardinality)
        .map(|t| {
            (0..cardinality)
                .map(|p| if p == t { accuracy } else { off })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_spec(n: usize, seed: u64) -> SynthSpec {
        SynthSpec {
            n,
            gender: AttributeSpec {
                marginal: vec![0.5, 0.5],
                given_gender: None,
                confusion: None,
            },
            age: None,
            fitzpatrick: Some(AttributeSpec {
                marginal: vec![0.04, 0.15, 0.50, 0.19, 0.12],
                given_gender: None,
                confusion: None,
            }),
            fraction_manual: 0.0,
            seed,
        }
    }

    #[test]
    fn identity_confusion_predicts_truth() {
        let records = synth_generate(&base_spec(500, 1)).unwrap();
        for r in &records {
            for attr in [AttributeKind::Gender, AttributeKind::Fitzpatrick] {
                let pair = r.label_pair(attr);
                assert_eq!(pair.manual, pair.predicted);
            }
        }
    }

    #[test]
    fn fraction_manual_one_marks_everything_manual() {
        let mut spec = base_spec(200, 2);
        spec.fraction_manual = 1.0;
        let records = synth_generate(&spec).unwrap();
        assert!(records.iter().all(|r| !r.predicted_flag(AttributeKind::Gender)));
        assert!(records.iter().all(|r| r.split == Split::Validation));
        // predicted labels are still recorded
        assert!(records
            .iter()
            .all(|r| r.label_pair(AttributeKind::Gender).predicted.is_some()));
    }

    #[test]
    fn marginal_frequencies_concentrate() {
        let expected = [0.04, 0.15, 0.50, 0.19, 0.12];
        let records = synth_generate(&base_spec(100_000, 3)).unwrap();
        let mut counts = [0usize; 5];
        for r in &records {
            counts[r.label_pair(AttributeKind::Fitzpatrick).manual.unwrap()] += 1;
        }
        for (m, &c) in counts.iter().enumerate() {
            let freq = c as f64 / records.len() as f64;
            assert!(
                (freq - expected[m]).abs() < 0.01,
                "class {m}: {freq} vs {}",
                expected[m]
            );
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = synth_generate(&base_spec(300, 9)).unwrap();
        let b = synth_generate(&base_spec(300, 9)).unwrap();
        assert_eq!(a, b);
        let c = synth_generate(&base_spec(300, 10)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn confusion_noise_hits_target_rate() {
        let mut spec = base_spec(50_000, 4);
        spec.fitzpatrick.as_mut().unwrap().confusion = Some(symmetric_confusion(5, 0.85));
        let records = synth_generate(&spec).unwrap();
        let correct = records
            .iter()
            .filter(|r| {
                let p = r.label_pair(AttributeKind::Fitzpatrick);
                p.manual == p.predicted
            })
            .count() as f64;
        let rate = correct / records.len() as f64;
        assert!((rate - 0.85).abs() < 0.01, "accuracy {rate}");
    }

    #[test]
    fn gender_conditionals_inject_bias() {
        let mut spec = base_spec(40_000, 5);
        spec.fitzpatrick.as_mut().unwrap().given_gender = Some(vec![
            vec![0.04, 0.15, 0.50, 0.19, 0.12],
            vec![0.10, 0.15, 0.50, 0.19, 0.06],
        ]);
        let records = synth_generate(&spec).unwrap();
        let rate = |gender: usize, class: usize| {
            let cohort: Vec<_> = records
                .iter()
                .filter(|r| r.label_pair(AttributeKind::Gender).manual == Some(gender))
                .collect();
            cohort
                .iter()
                .filter(|r| r.label_pair(AttributeKind::Fitzpatrick).manual == Some(class))
                .count() as f64
                / cohort.len() as f64
        };
        assert!((rate(0, 0) - 0.04).abs() < 0.01);
        assert!((rate(1, 0) - 0.10).abs() < 0.01);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = base_spec(10, 1);
        spec.fraction_manual = 1.5;
        assert!(matches!(
            synth_generate(&spec),
            Err(SynthError::InvalidSpec(_))
        ));
        let mut spec = base_spec(10, 1);
        spec.gender.marginal = vec![0.7, 0.7];
        assert!(synth_generate(&spec).is_err());
        let mut spec = base_spec(10, 1);
        spec.fitzpatrick.as_mut().unwrap().confusion = Some(vec![vec![1.0; 5]; 5]);
        assert!(synth_generate(&spec).is_err());
    }
}
