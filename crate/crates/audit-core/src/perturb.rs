//! Error-aware perturbations: stochastic label replacements calibrated by
//! the classifier's estimated reliability, re-injecting the prediction
//! uncertainty before each test simulation.

use crate::attributes::AttributeKind;
use crate::records::BinarizedView;
use crate::reliability::{ReliabilityError, ReliabilityTable};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PerturbError {
    #[error("no manually annotated records with {conditioning} modality {modality} to sample from")]
    EmptyManualPool {
        conditioning: AttributeKind,
        modality: usize,
    },
    #[error(transparent)]
    Reliability(#[from] ReliabilityError),
}

/// Parity perturbation: each indicator is independently replaced, with
/// probability 1 − accuracy, by a Bernoulli(reference_p) draw.
pub fn perturb_parity<R: Rng>(
    labels: &BinarizedView,
    accuracy: f64,
    reference_p: f64,
    rng: &mut R,
) -> BinarizedView {
    debug_assert!((0.0..=1.0).contains(&accuracy));
    debug_assert!((0.0..=1.0).contains(&reference_p));
    let replace_p = 1.0 - accuracy;
    let values = labels
        .values
        .iter()
        .map(|&v| {
            if replace_p > 0.0 && rng.gen_bool(replace_p) {
                u8::from(rng.gen_bool(reference_p))
            } else {
                v
            }
        })
        .collect();
    BinarizedView {
        attribute: labels.attribute,
        target_modality: labels.target_modality,
        values,
    }
}

/// Working copy of the fields the representation perturbation may touch.
/// `predicted == false` rows are manual ground truth and are never modified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkingRecord {
    pub conditioning_value: usize,
    pub tested_value: usize,
    pub predicted: bool,
}

/// Uniform-resampling pools: for each conditioning modality, the tested
/// attribute values of the manually annotated records.
#[derive(Debug, Clone)]
pub struct ManualPools {
    pools: Vec<Vec<usize>>,
}

impl ManualPools {
    /// Builds the pools from working records and checks none is empty.
    pub fn build(
        records: &[WorkingRecord],
        conditioning: AttributeKind,
    ) -> Result<Self, PerturbError> {
        let mut pools = vec![Vec::new(); conditioning.cardinality()];
        for rec in records.iter().filter(|r| !r.predicted) {
            pools[rec.conditioning_value].push(rec.tested_value);
        }
        for (modality, pool) in pools.iter().enumerate() {
            if pool.is_empty() {
                return Err(PerturbError::EmptyManualPool {
                    conditioning,
                    modality,
                });
            }
        }
        Ok(ManualPools { pools })
    }

    fn draw<R: Rng>(&self, modality: usize, rng: &mut R) -> usize {
        let pool = &self.pools[modality];
        pool[rng.gen_range(0..pool.len())]
    }
}

/// Representation perturbation, applied in input order to each predicted
/// record:
///   1. flip the working conditioning label with probability
///      1 − precision[conditioning][current label];
///   2. with probability 1 − conditional_accuracy[tested modality | working
///      label after the flip], replace the tested value by a uniform draw
///      from the manual pool of the same working label.
///
/// The conditioning attribute is binary (gender), so the flip maps the
/// label to its complement.
#[allow(clippy::too_many_arguments)]
pub fn perturb_representation<R: Rng>(
    records: &mut [WorkingRecord],
    tested: AttributeKind,
    tested_modality: usize,
    conditioning: AttributeKind,
    reliability: &ReliabilityTable,
    pools: &ManualPools,
    rng: &mut R,
) -> Result<(), PerturbError> {
    debug_assert_eq!(conditioning.cardinality(), 2);
    for rec in records.iter_mut().filter(|r| r.predicted) {
        let precision = reliability.precision(conditioning, rec.conditioning_value)?;
        if precision < 1.0 && rng.gen_bool(1.0 - precision) {
            rec.conditioning_value = 1 - rec.conditioning_value;
        }
        let cond_acc = reliability.conditional_accuracy(
            tested,
            tested_modality,
            conditioning,
            rec.conditioning_value,
        )?;
        if cond_acc < 1.0 && rng.gen_bool(1.0 - cond_acc) {
            rec.tested_value = pools.draw(rec.conditioning_value, rng);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream_rng;

    fn view(values: Vec<u8>) -> BinarizedView {
        BinarizedView {
            attribute: AttributeKind::Gender,
            target_modality: 0,
            values,
        }
    }

    #[test]
    fn parity_with_full_accuracy_is_identity() {
        let v = view(vec![1, 0, 1, 1, 0]);
        let mut rng = stream_rng(1, &[]);
        assert_eq!(perturb_parity(&v, 1.0, 0.5, &mut rng), v);
    }

    #[test]
    fn parity_zero_accuracy_zero_reference_gives_all_zeros() {
        let v = view(vec![1; 50]);
        let mut rng = stream_rng(2, &[]);
        let out = perturb_parity(&v, 0.0, 0.0, &mut rng);
        assert!(out.values.iter().all(|&x| x == 0));
    }

    #[test]
    fn parity_replacement_mean_concentrates() {
        // all-ones input, accuracy 0.9, reference 0.5: expected mean 0.95
        let n = 100_000;
        let v = view(vec![1; n]);
        let mut rng = stream_rng(3, &[]);
        let out = perturb_parity(&v, 0.9, 0.5, &mut rng);
        let mean = out.values.iter().map(|&x| x as f64).sum::<f64>() / n as f64;
        assert!((0.945..=0.955).contains(&mean), "mean = {mean}");
    }

    fn perfect_table() -> ReliabilityTable {
        ReliabilityTable::perfect(AttributeKind::Gender)
    }

    #[test]
    fn representation_with_all_rates_one_is_identity() {
        let mut records = vec![
            WorkingRecord {
                conditioning_value: 0,
                tested_value: 2,
                predicted: true,
            },
            WorkingRecord {
                conditioning_value: 1,
                tested_value: 4,
                predicted: false,
            },
            WorkingRecord {
                conditioning_value: 0,
                tested_value: 1,
                predicted: false,
            },
        ];
        let original = records.clone();
        let pools = ManualPools::build(&records, AttributeKind::Gender).unwrap();
        let mut rng = stream_rng(4, &[]);
        perturb_representation(
            &mut records,
            AttributeKind::Fitzpatrick,
            2,
            AttributeKind::Gender,
            &perfect_table(),
            &pools,
            &mut rng,
        )
        .unwrap();
        assert_eq!(records, original);
    }

    #[test]
    fn forced_resample_draws_the_only_pool_value() {
        // precision 1 (no flips), conditional accuracy 0 (always resample),
        // single-value pools
        let mut table = perfect_table();
        for g in 0..2 {
            table
                .set_conditional_accuracy(
                    AttributeKind::Fitzpatrick,
                    2,
                    AttributeKind::Gender,
                    g,
                    0.0,
                    10,
                )
                .unwrap();
        }
        let mut records = vec![
            WorkingRecord {
                conditioning_value: 0,
                tested_value: 4,
                predicted: true,
            },
            WorkingRecord {
                conditioning_value: 1,
                tested_value: 4,
                predicted: true,
            },
            // manual pool: value 1 for men, value 3 for women
            WorkingRecord {
                conditioning_value: 0,
                tested_value: 1,
                predicted: false,
            },
            WorkingRecord {
                conditioning_value: 1,
                tested_value: 3,
                predicted: false,
            },
        ];
        let pools = ManualPools::build(&records, AttributeKind::Gender).unwrap();
        let mut rng = stream_rng(5, &[]);
        perturb_representation(
            &mut records,
            AttributeKind::Fitzpatrick,
            2,
            AttributeKind::Gender,
            &table,
            &pools,
            &mut rng,
        )
        .unwrap();
        assert_eq!(records[0].tested_value, 1);
        assert_eq!(records[1].tested_value, 3);
        // manual records untouched
        assert_eq!(records[2].tested_value, 1);
        assert_eq!(records[3].tested_value, 3);
    }

    #[test]
    fn flip_rate_concentrates_at_one_minus_precision() {
        let mut table = perfect_table();
        table
            .set_precision(AttributeKind::Gender, 0, 0.9, 1000)
            .unwrap();
        let n = 100_000;
        let mut records: Vec<WorkingRecord> = (0..n)
            .map(|_| WorkingRecord {
                conditioning_value: 0,
                tested_value: 0,
                predicted: true,
            })
            .collect();
        records.push(WorkingRecord {
            conditioning_value: 0,
            tested_value: 0,
            predicted: false,
        });
        records.push(WorkingRecord {
            conditioning_value: 1,
            tested_value: 0,
            predicted: false,
        });
        let pools = ManualPools::build(&records, AttributeKind::Gender).unwrap();
        let mut rng = stream_rng(6, &[]);
        perturb_representation(
            &mut records,
            AttributeKind::Fitzpatrick,
            0,
            AttributeKind::Gender,
            &table,
            &pools,
            &mut rng,
        )
        .unwrap();
        let flipped = records[..n]
            .iter()
            .filter(|r| r.conditioning_value == 1)
            .count() as f64;
        assert!(
            (0.095..=0.105).contains(&(flipped / n as f64)),
            "flip rate {}",
            flipped / n as f64
        );
    }

    #[test]
    fn manual_records_are_never_modified() {
        let mut table = perfect_table();
        for g in 0..2 {
            table.set_precision(AttributeKind::Gender, g, 0.5, 10).unwrap();
            for m in 0..5 {
                table
                    .set_conditional_accuracy(
                        AttributeKind::Fitzpatrick,
                        m,
                        AttributeKind::Gender,
                        g,
                        0.5,
                        10,
                    )
                    .unwrap();
            }
        }
        let manual: Vec<WorkingRecord> = (0..100)
            .map(|i| WorkingRecord {
                conditioning_value: i % 2,
                tested_value: i % 5,
                predicted: false,
            })
            .collect();
        let mut records = manual.clone();
        let pools = ManualPools::build(&records, AttributeKind::Gender).unwrap();
        let mut rng = stream_rng(7, &[]);
        perturb_representation(
            &mut records,
            AttributeKind::Fitzpatrick,
            1,
            AttributeKind::Gender,
            &table,
            &pools,
            &mut rng,
        )
        .unwrap();
        assert_eq!(records, manual);
    }

    #[test]
    fn empty_pool_is_an_error() {
        let records = vec![WorkingRecord {
            conditioning_value: 0,
            tested_value: 0,
            predicted: false,
        }];
        assert_eq!(
            ManualPools::build(&records, AttributeKind::Gender).unwrap_err(),
            PerturbError::EmptyManualPool {
                conditioning: AttributeKind::Gender,
                modality: 1
            }
        );
    }
}
