//! Full audit runs: the hypothesis grid over attributes and sample sizes,
//! plus descriptive diversity metrics, assembled into a report.

use crate::attributes::AttributeKind;
use crate::audit::{
    run_parity_audit, run_representation_audit, AuditCell, AuditConfig, AuditError, AuditMode,
};
use crate::diversity::{
    conditional_entropy, diversity_loss, geometric_diversity, DataMatrix, FrequencyVector,
    LogBase,
};
use crate::records::{subsample, AnnotatedRecord};
use crate::reference::ReferenceSet;
use crate::reliability::ReliabilityTable;
use crate::report::{AuditReport, CellLine, DiversityLine, HypothesisKind, ReportMeta};
use crate::seed::derive_seed;

const TAG_SUBSAMPLE: u64 = 102;

/// What a full audit run covers.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditPlan {
    pub dataset_id: String,
    /// Requested sample sizes; entries larger than the dataset are dropped.
    pub sizes: Vec<usize>,
    /// Also run the naive (no-correction) grid for side-by-side comparison.
    pub ablation: bool,
}

impl AuditPlan {
    pub fn default_sizes() -> Vec<usize> {
        vec![100, 500, 1000, 3000, 8000]
    }
}

fn cell_lines(kind: HypothesisKind, size: usize, cells: Vec<AuditCell>) -> Vec<CellLine> {
    cells
        .into_iter()
        .map(|cell| CellLine::from_cell(kind, size, &cell))
        .collect()
}

/// Records eligible for auditing: complete audit labels on all three
/// attributes.
pub fn audit_pool(records: &[AnnotatedRecord]) -> Vec<AnnotatedRecord> {
    records
        .iter()
        .filter(|r| {
            AttributeKind::ALL
                .iter()
                .all(|&attr| r.audit_label(attr).is_some())
        })
        .cloned()
        .collect()
}

fn diversity_lines(
    pool: &[AnnotatedRecord],
    references: &ReferenceSet,
) -> Result<Vec<DiversityLine>, AuditError> {
    let mut lines = Vec::new();
    for attr in AttributeKind::ALL {
        let mut counts = vec![0usize; attr.cardinality()];
        for r in pool {
            if let Some(m) = r.audit_label(attr) {
                counts[m] += 1;
            }
        }
        if counts.iter().sum::<usize>() == 0 {
            continue;
        }
        let observed = FrequencyVector::from_counts(&counts)
            .expect("nonzero total count yields a frequency vector");
        let reference = references.get(attr)?;
        let target = FrequencyVector::new(reference.probabilities.clone())
            .expect("reference distributions are validated on construction");
        let loss = diversity_loss(&target, &observed)
            .expect("reference distributions have a positive entry");
        let entropy = conditional_entropy(&observed, LogBase::Natural);
        // volume spanned by the frequency-weighted modality indicators:
        // columns sqrt(f_m) * e_m
        let k = attr.cardinality();
        let columns: Vec<Vec<f64>> = (0..k)
            .map(|m| {
                let mut col = vec![0.0; k];
                col[m] = observed.as_slice()[m].sqrt();
                col
            })
            .collect();
        let geometric =
            geometric_diversity(&DataMatrix::from_columns(columns).expect("k >= 1 columns"));
        lines.push(DiversityLine {
            attribute: attr,
            diversity_loss: loss,
            entropy_nats: entropy,
            geometric_diversity: geometric,
        });
    }
    Ok(lines)
}

/// Runs the complete audit grid: parity tests for gender, age, and
/// Fitzpatrick, and representation tests for age and Fitzpatrick
/// conditioned on gender, across every requested sample size.
pub fn run_full_audit(
    records: &[AnnotatedRecord],
    references: &ReferenceSet,
    reliability: &ReliabilityTable,
    config: &AuditConfig,
    plan: &AuditPlan,
) -> Result<AuditReport, AuditError> {
    config.validate()?;
    let pool = audit_pool(records);
    if pool.is_empty() {
        return Err(AuditError::Stat(crate::stats::StatError::EmptySample));
    }
    let mut sizes: Vec<usize> = plan.sizes.iter().copied().filter(|&s| s <= pool.len()).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.is_empty() {
        sizes.push(pool.len());
    }

    let modes: &[AuditMode] = if plan.ablation {
        &[AuditMode::ErrorAware, AuditMode::Naive]
    } else {
        &[AuditMode::ErrorAware]
    };

    let mut cells = Vec::new();
    for &size in &sizes {
        let sample = subsample(&pool, size, derive_seed(config.seed, &[TAG_SUBSAMPLE, size as u64]))?;
        for &mode in modes {
            for attr in AttributeKind::ALL {
                let reference = references.get(attr)?;
                let parity =
                    run_parity_audit(&sample, attr, reference, reliability, config, mode)?;
                cells.extend(cell_lines(HypothesisKind::Parity, size, parity));
            }
            for tested in [AttributeKind::Age, AttributeKind::Fitzpatrick] {
                let representation = run_representation_audit(
                    &sample,
                    tested,
                    AttributeKind::Gender,
                    reliability,
                    config,
                    mode,
                )?;
                cells.extend(cell_lines(HypothesisKind::Representation, size, representation));
            }
        }
    }

    let diversity = diversity_lines(&pool, references)?;
    let meta = ReportMeta {
        dataset: plan.dataset_id.clone(),
        seed: config.seed,
        alpha: config.alpha,
        n_simulations: config.n_simulations,
        n_permutations: config.n_permutations,
        wasserstein_order: config.wasserstein_order,
        sizes,
        ablation: plan.ablation,
        pool_size: pool.len(),
    };
    Ok(AuditReport::assemble(meta, reliability, diversity, cells))
}
