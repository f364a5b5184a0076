//! Demographic bias auditing for face-image datasets.
//!
//! The engine consumes (possibly machine-predicted) sensitive-attribute
//! annotations and tests them for demographic bias with a protocol that is
//! aware of the annotation model's error rates:
//!
//! - **parity tests** compare an attribute's observed distribution against
//!   a reference (even gender split, world age/skin-type tables);
//! - **equal-representation tests** compare an attribute's distribution
//!   across the binary gender subgroups;
//! - each hypothesis runs three base tests (chi-squared, CLT mean,
//!   Wasserstein permutation) over many perturbation simulations that
//!   re-inject the classifier's measured uncertainty, aggregates per-test
//!   median p-values, and maps the rejection count to ✓ / ✓2/3 / ×.
//!
//! Colorimetry utilities (sRGB → CIELAB, individual typology angle,
//! dominant-cluster skin summaries, surprising-score control charts),
//! descriptive diversity metrics, and a synthetic-data harness for
//! validating the corrections round out the crate.
//!
//! With the default `parallel` feature, simulations fan out over a rayon
//! pool; results are bit-identical to the sequential fallback because every
//! stochastic stage owns a derived seed.

pub mod attributes;
pub mod audit;
pub mod color;
pub mod diversity;
pub mod exec;
pub mod ingest;
pub mod kmeans;
pub mod perturb;
pub mod pipeline;
pub mod records;
pub mod reference;
pub mod reliability;
pub mod report;
pub mod seed;
pub mod skin;
pub mod stats;
pub mod synth;

pub use attributes::AttributeKind;
pub use audit::{
    aggregate_decision, parity_cell, representation_cell, run_parity_audit,
    run_representation_audit, AuditCell, AuditConfig, AuditError, AuditMode, Decision,
    MedianPValues, TestSelection,
};
pub use color::{ita, srgb_to_lab, LabColor};
pub use diversity::{
    conditional_entropy, diversity_loss, geometric_diversity, DataMatrix, FrequencyVector,
    LogBase,
};
pub use ingest::{load_annotations, save_annotations, ColumnMap, IngestError};
pub use kmeans::{kmeans_dominant_cluster, KmeansError};
pub use perturb::{perturb_parity, perturb_representation, ManualPools, WorkingRecord};
pub use pipeline::{audit_pool, run_full_audit, AuditPlan};
pub use records::{
    binarize, binarize_audit_labels, subsample, AnnotatedRecord, BinarizedView, LabelPair,
    RecordError, Split,
};
pub use reference::{ReferenceDistribution, ReferenceSet};
pub use reliability::{
    adjacent_accuracy, estimate_reliability, RateEstimate, ReliabilityError, ReliabilityTable,
};
pub use report::{AuditReport, HypothesisKind, ReportError};
pub use skin::{
    extract_skin_summary, smooth_pixels, surprising_scores, ItaObservation, MaskRaster,
    RgbRaster, SkinError, SkinParams, SkinSummary, SurprisingFlag,
};
pub use stats::{
    chi2_one_sample, chi2_two_sample, mean_test_one_sample, mean_test_two_sample,
    wasserstein_1d, wasserstein_perm_test, StatError, TestKind, TestResult,
};
pub use synth::{symmetric_confusion, synth_generate, AttributeSpec, SynthSpec, SynthError};
