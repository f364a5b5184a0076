//! The audit protocol: parity tests against a reference distribution and
//! equal-representation tests between gender subgroups, each run as many
//! perturbation simulations whose per-test p-values are aggregated by the
//! median, then mapped to a three-way decision.
//!
//! Simulations draw from seeds derived per (hypothesis, simulation, stage),
//! so runs are reproducible bit-for-bit and independent of thread count.
//! The naive (no-correction) mode runs the same loop with the perturbation
//! step skipped; with all reliability rates equal to 1 the two modes
//! produce identical p-values under the same seeds.

use crate::attributes::AttributeKind;
use crate::exec;
use crate::perturb::{
    perturb_parity, perturb_representation, ManualPools, PerturbError, WorkingRecord,
};
use crate::records::{binarize_audit_labels, AnnotatedRecord, RecordError};
use crate::reference::{ReferenceDistribution, ReferenceError};
use crate::reliability::{ReliabilityError, ReliabilityTable};
use crate::seed::{derive_seed, stream_rng};
use crate::stats::{
    chi2_one_sample, chi2_two_sample, mean_test_one_sample, mean_test_two_sample,
    wasserstein_perm_test, StatError,
};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

// seed-stream tags
const TAG_PARITY: u64 = 100;
const TAG_REPRESENTATION: u64 = 101;
const STREAM_PERTURB: u64 = 0;
const STREAM_REFERENCE: u64 = 1;
const STREAM_WASSERSTEIN: u64 = 2;

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("invalid audit config: {0}")]
    InvalidConfig(String),
    #[error("conditioning subgroup {0} is empty")]
    EmptySubgroup(usize),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Stat(#[from] StatError),
    #[error(transparent)]
    Reliability(#[from] ReliabilityError),
    #[error(transparent)]
    Perturb(#[from] PerturbError),
    #[error(transparent)]
    Reference(#[from] ReferenceError),
}

/// Which of the three base tests participate in the audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestSelection {
    pub chi2: bool,
    pub mean: bool,
    pub wasserstein: bool,
}

impl Default for TestSelection {
    fn default() -> Self {
        TestSelection {
            chi2: true,
            mean: true,
            wasserstein: true,
        }
    }
}

/// Whether perturbation corrections are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditMode {
    ErrorAware,
    Naive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    /// Number of perturbation simulations; odd so the median is unique.
    pub n_simulations: usize,
    pub alpha: f64,
    pub seed: u64,
    pub wasserstein_order: f64,
    pub n_permutations: usize,
    pub tests: TestSelection,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            n_simulations: 101,
            alpha: 0.05,
            seed: 0,
            wasserstein_order: 1.0,
            n_permutations: 999,
            tests: TestSelection::default(),
        }
    }
}

impl AuditConfig {
    pub fn validate(&self) -> Result<(), AuditError> {
        if self.n_simulations == 0 || self.n_simulations % 2 == 0 {
            return Err(AuditError::InvalidConfig(format!(
                "n_simulations must be odd and >= 1, got {}",
                self.n_simulations
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(AuditError::InvalidConfig(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if self.n_permutations == 0 {
            return Err(AuditError::InvalidConfig(
                "n_permutations must be >= 1".into(),
            ));
        }
        if !(self.wasserstein_order >= 1.0) {
            return Err(AuditError::InvalidConfig(format!(
                "wasserstein_order must be >= 1, got {}",
                self.wasserstein_order
            )));
        }
        if !self.tests.chi2 && !self.tests.mean && !self.tests.wasserstein {
            return Err(AuditError::InvalidConfig("no tests enabled".into()));
        }
        Ok(())
    }
}

/// Three-way audit decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Accept,
    Weak,
    Reject,
}

impl Decision {
    pub fn glyph(self) -> &'static str {
        match self {
            Decision::Accept => "✓",
            Decision::Weak => "✓2/3",
            Decision::Reject => "×",
        }
    }
}

/// Maps rejection counts to decisions: 0 → Accept, 1 → Weak, ≥2 → Reject.
pub fn aggregate_decision(median_p_values: &[f64], alpha: f64) -> Decision {
    match median_p_values.iter().filter(|&&p| p < alpha).count() {
        0 => Decision::Accept,
        1 => Decision::Weak,
        _ => Decision::Reject,
    }
}

/// Median p-value per test over the simulations; absent when the test is
/// disabled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedianPValues {
    pub chi2: Option<f64>,
    pub mean: Option<f64>,
    pub wasserstein: Option<f64>,
}

impl MedianPValues {
    pub fn present(&self) -> Vec<f64> {
        [self.chi2, self.mean, self.wasserstein]
            .into_iter()
            .flatten()
            .collect()
    }
}

/// One hypothesis's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditCell {
    pub attribute: AttributeKind,
    pub modality: usize,
    pub conditioning: Option<AttributeKind>,
    pub sample_size: usize,
    pub mode: AuditMode,
    pub median_p: MedianPValues,
    pub decision: Decision,
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values[values.len() / 2]
}

fn bernoulli_sample<R: Rng>(p: f64, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|_| if p > 0.0 && rng.gen_bool(p) { 1.0 } else { 0.0 })
        .collect()
}

struct SimPValues {
    chi2: Option<f64>,
    mean: Option<f64>,
    wasserstein: Option<f64>,
}

fn aggregate_cell(
    per_sim: Vec<Result<SimPValues, AuditError>>,
    attribute: AttributeKind,
    modality: usize,
    conditioning: Option<AttributeKind>,
    sample_size: usize,
    mode: AuditMode,
    alpha: f64,
) -> Result<AuditCell, AuditError> {
    let mut chi2 = Vec::new();
    let mut mean = Vec::new();
    let mut wasserstein = Vec::new();
    for sim in per_sim {
        let sim = sim?;
        if let Some(p) = sim.chi2 {
            chi2.push(p);
        }
        if let Some(p) = sim.mean {
            mean.push(p);
        }
        if let Some(p) = sim.wasserstein {
            wasserstein.push(p);
        }
    }
    let median_p = MedianPValues {
        chi2: (!chi2.is_empty()).then(|| median(chi2)),
        mean: (!mean.is_empty()).then(|| median(mean)),
        wasserstein: (!wasserstein.is_empty()).then(|| median(wasserstein)),
    };
    let decision = aggregate_decision(&median_p.present(), alpha);
    Ok(AuditCell {
        attribute,
        modality,
        conditioning,
        sample_size,
        mode,
        median_p,
        decision,
    })
}

/// Parity test for one modality of `attribute` (one-vs-all), comparing the
/// audited labels against the reference probability for that modality.
pub fn parity_cell(
    records: &[AnnotatedRecord],
    attribute: AttributeKind,
    modality: usize,
    reference: &ReferenceDistribution,
    reliability: &ReliabilityTable,
    config: &AuditConfig,
    mode: AuditMode,
) -> Result<AuditCell, AuditError> {
    config.validate()?;
    let view = binarize_audit_labels(records, attribute, modality)?;
    if view.is_empty() {
        return Err(AuditError::Stat(StatError::EmptySample));
    }
    let p_ref = reference.probability(modality);
    let accuracy = match mode {
        AuditMode::ErrorAware => Some(reliability.accuracy(attribute, modality)?),
        AuditMode::Naive => None,
    };
    let n = view.len();
    let stream = [TAG_PARITY, attribute.stream_id(), modality as u64];

    let per_sim = exec::map_indexed(config.n_simulations, |sim| {
        let sim_u = sim as u64;
        let values = match accuracy {
            Some(acc) => {
                let mut rng = stream_rng(
                    config.seed,
                    &[stream[0], stream[1], stream[2], sim_u, STREAM_PERTURB],
                );
                perturb_parity(&view, acc, p_ref, &mut rng).values
            }
            None => view.values.clone(),
        };
        let ones = values.iter().map(|&v| v as usize).sum::<usize>();

        let chi2 = if config.tests.chi2 {
            Some(chi2_one_sample(&[ones, n - ones], &[p_ref, 1.0 - p_ref])?.p_value)
        } else {
            None
        };
        let mean = if config.tests.mean {
            Some(mean_test_one_sample(&values, p_ref)?.p_value)
        } else {
            None
        };
        let wasserstein = if config.tests.wasserstein {
            let mut ref_rng = stream_rng(
                config.seed,
                &[stream[0], stream[1], stream[2], sim_u, STREAM_REFERENCE],
            );
            let reference_sample = bernoulli_sample(p_ref, n, &mut ref_rng);
            let sample: Vec<f64> = values.iter().map(|&v| v as f64).collect();
            let perm_seed = derive_seed(
                config.seed,
                &[stream[0], stream[1], stream[2], sim_u, STREAM_WASSERSTEIN],
            );
            Some(
                wasserstein_perm_test(
                    &sample,
                    &reference_sample,
                    config.wasserstein_order,
                    config.n_permutations,
                    perm_seed,
                )?
                .p_value,
            )
        } else {
            None
        };
        Ok(SimPValues {
            chi2,
            mean,
            wasserstein,
        })
    });
    aggregate_cell(
        per_sim,
        attribute,
        modality,
        None,
        n,
        mode,
        config.alpha,
    )
}

/// Parity audit across every modality of `attribute`.
pub fn run_parity_audit(
    records: &[AnnotatedRecord],
    attribute: AttributeKind,
    reference: &ReferenceDistribution,
    reliability: &ReliabilityTable,
    config: &AuditConfig,
    mode: AuditMode,
) -> Result<Vec<AuditCell>, AuditError> {
    (0..attribute.cardinality())
        .map(|m| parity_cell(records, attribute, m, reference, reliability, config, mode))
        .collect()
}

fn working_records(
    records: &[AnnotatedRecord],
    tested: AttributeKind,
    conditioning: AttributeKind,
) -> Result<Vec<WorkingRecord>, AuditError> {
    records
        .iter()
        .map(|r| {
            let conditioning_value = r
                .audit_label(conditioning)
                .ok_or_else(|| RecordError::MissingLabel(r.id.clone(), conditioning))?;
            let tested_value = r
                .audit_label(tested)
                .ok_or_else(|| RecordError::MissingLabel(r.id.clone(), tested))?;
            Ok(WorkingRecord {
                conditioning_value,
                tested_value,
                predicted: r.predicted_flag(tested) || r.predicted_flag(conditioning),
            })
        })
        .collect()
}

/// Equal-representation test for one tested modality, split by the binary
/// conditioning attribute (gender).
pub fn representation_cell(
    records: &[AnnotatedRecord],
    tested: AttributeKind,
    tested_modality: usize,
    conditioning: AttributeKind,
    reliability: &ReliabilityTable,
    config: &AuditConfig,
    mode: AuditMode,
) -> Result<AuditCell, AuditError> {
    config.validate()?;
    if tested_modality >= tested.cardinality() {
        return Err(AuditError::Record(RecordError::ModalityOutOfRange {
            attribute: tested,
            index: tested_modality,
        }));
    }
    let base = working_records(records, tested, conditioning)?;
    if base.is_empty() {
        return Err(AuditError::Stat(StatError::EmptySample));
    }
    let pools = match mode {
        AuditMode::ErrorAware => Some(ManualPools::build(&base, conditioning)?),
        AuditMode::Naive => None,
    };
    let stream = [
        TAG_REPRESENTATION,
        tested.stream_id(),
        tested_modality as u64,
    ];

    let per_sim = exec::map_indexed(config.n_simulations, |sim| {
        let sim_u = sim as u64;
        let mut work = base.clone();
        if let Some(pools) = &pools {
            let mut rng = stream_rng(
                config.seed,
                &[stream[0], stream[1], stream[2], sim_u, STREAM_PERTURB],
            );
            perturb_representation(
                &mut work,
                tested,
                tested_modality,
                conditioning,
                reliability,
                pools,
                &mut rng,
            )?;
        }
        let mut groups: [Vec<u8>; 2] = [Vec::new(), Vec::new()];
        for rec in &work {
            groups[rec.conditioning_value]
                .push(u8::from(rec.tested_value == tested_modality));
        }
        for (g, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(AuditError::EmptySubgroup(g));
            }
        }

        let count = |g: &[u8]| {
            let ones = g.iter().map(|&v| v as usize).sum::<usize>();
            [ones, g.len() - ones]
        };
        let chi2 = if config.tests.chi2 {
            Some(chi2_two_sample(&count(&groups[0]), &count(&groups[1]))?.p_value)
        } else {
            None
        };
        let mean = if config.tests.mean {
            Some(mean_test_two_sample(&groups[0], &groups[1])?.p_value)
        } else {
            None
        };
        let wasserstein = if config.tests.wasserstein {
            let a: Vec<f64> = groups[0].iter().map(|&v| v as f64).collect();
            let b: Vec<f64> = groups[1].iter().map(|&v| v as f64).collect();
            let perm_seed = derive_seed(
                config.seed,
                &[stream[0], stream[1], stream[2], sim_u, STREAM_WASSERSTEIN],
            );
            Some(
                wasserstein_perm_test(
                    &a,
                    &b,
                    config.wasserstein_order,
                    config.n_permutations,
                    perm_seed,
                )?
                .p_value,
            )
        } else {
            None
        };
        Ok(SimPValues {
            chi2,
            mean,
            wasserstein,
        })
    });
    aggregate_cell(
        per_sim,
        tested,
        tested_modality,
        Some(conditioning),
        base.len(),
        mode,
        config.alpha,
    )
}

/// Equal-representation audit across every modality of `tested`,
/// conditioned on gender.
pub fn run_representation_audit(
    records: &[AnnotatedRecord],
    tested: AttributeKind,
    conditioning: AttributeKind,
    reliability: &ReliabilityTable,
    config: &AuditConfig,
    mode: AuditMode,
) -> Result<Vec<AuditCell>, AuditError> {
    (0..tested.cardinality())
        .map(|m| {
            representation_cell(records, tested, m, conditioning, reliability, config, mode)
        })
        .collect()
}
