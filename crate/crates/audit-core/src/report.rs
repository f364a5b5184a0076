//! Audit report formats.
//!
//! The machine format is line-delimited JSON: one `record`-tagged object
//! per line (metadata, reliability rates, diversity metrics, hypothesis
//! cells). It contains no wall-clock fields, so identical inputs and seeds
//! produce byte-identical files. The human format is a markdown table with
//! one decision glyph per (hypothesis, sample size), re-renderable from the
//! machine file without recomputing any statistic.

use crate::attributes::AttributeKind;
use crate::audit::{AuditCell, AuditMode, Decision, MedianPValues};
use crate::reliability::{RateEstimate, ReliabilityTable};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("line {0}: {1}")]
    Malformed(usize, String),
    #[error("report has no metadata line")]
    MissingMeta,
    #[error("duplicate hypothesis cell: {0}")]
    DuplicateCell(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub dataset: String,
    pub seed: u64,
    pub alpha: f64,
    pub n_simulations: usize,
    pub n_permutations: usize,
    pub wasserstein_order: f64,
    pub sizes: Vec<usize>,
    pub ablation: bool,
    pub pool_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisKind {
    Parity,
    Representation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellLine {
    pub kind: HypothesisKind,
    pub mode: AuditMode,
    pub attribute: AttributeKind,
    pub modality: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditioning: Option<AttributeKind>,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_chi2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_wasserstein: Option<f64>,
    pub decision: Decision,
}

impl CellLine {
    pub fn from_cell(kind: HypothesisKind, size: usize, cell: &AuditCell) -> Self {
        CellLine {
            kind,
            mode: cell.mode,
            attribute: cell.attribute,
            modality: cell.attribute.modality_name(cell.modality).to_string(),
            conditioning: cell.conditioning,
            size,
            p_chi2: cell.median_p.chi2,
            p_mean: cell.median_p.mean,
            p_wasserstein: cell.median_p.wasserstein,
            decision: cell.decision,
        }
    }

    pub fn median_p(&self) -> MedianPValues {
        MedianPValues {
            chi2: self.p_chi2,
            mean: self.p_mean,
            wasserstein: self.p_wasserstein,
        }
    }

    fn key(&self) -> String {
        format!(
            "{:?}|{:?}|{}|{}|{}",
            self.kind, self.mode, self.attribute, self.modality, self.size
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityLine {
    pub attribute: AttributeKind,
    pub diversity_loss: f64,
    pub entropy_nats: f64,
    pub geometric_diversity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityLine {
    pub attribute: AttributeKind,
    pub modality: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<RateEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<RateEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalLine {
    pub tested: AttributeKind,
    pub tested_modality: String,
    pub conditioning: AttributeKind,
    pub conditioning_modality: String,
    pub estimate: RateEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum ReportLine {
    Meta(ReportMeta),
    Reliability(ReliabilityLine),
    ConditionalAccuracy(ConditionalLine),
    Diversity(DiversityLine),
    Cell(CellLine),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub meta: ReportMeta,
    pub reliability: Vec<ReliabilityLine>,
    pub conditional: Vec<ConditionalLine>,
    pub diversity: Vec<DiversityLine>,
    pub cells: Vec<CellLine>,
}

impl AuditReport {
    pub fn assemble(
        meta: ReportMeta,
        reliability: &ReliabilityTable,
        diversity: Vec<DiversityLine>,
        cells: Vec<CellLine>,
    ) -> Self {
        let mut reliability_lines = Vec::new();
        let mut conditional_lines = Vec::new();
        for attr in AttributeKind::ALL {
            for m in 0..attr.cardinality() {
                let accuracy = reliability.accuracy_estimate(attr, m);
                let precision = reliability.precision_estimate(attr, m);
                if accuracy.is_some() || precision.is_some() {
                    reliability_lines.push(ReliabilityLine {
                        attribute: attr,
                        modality: attr.modality_name(m).to_string(),
                        accuracy,
                        precision,
                    });
                }
                if attr != AttributeKind::Gender {
                    for g in 0..AttributeKind::Gender.cardinality() {
                        if let Some(estimate) =
                            reliability.conditional_estimate(attr, m, AttributeKind::Gender, g)
                        {
                            conditional_lines.push(ConditionalLine {
                                tested: attr,
                                tested_modality: attr.modality_name(m).to_string(),
                                conditioning: AttributeKind::Gender,
                                conditioning_modality: AttributeKind::Gender
                                    .modality_name(g)
                                    .to_string(),
                                estimate,
                            });
                        }
                    }
                }
            }
        }
        AuditReport {
            meta,
            reliability: reliability_lines,
            conditional: conditional_lines,
            diversity,
            cells,
        }
    }

    /// Machine format: one JSON object per line, metadata first.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |line: &ReportLine| {
            out.push_str(&serde_json::to_string(line).expect("report lines serialize"));
            out.push('\n');
        };
        push(&ReportLine::Meta(self.meta.clone()));
        for line in &self.reliability {
            push(&ReportLine::Reliability(line.clone()));
        }
        for line in &self.conditional {
            push(&ReportLine::ConditionalAccuracy(line.clone()));
        }
        for line in &self.diversity {
            push(&ReportLine::Diversity(line.clone()));
        }
        for line in &self.cells {
            push(&ReportLine::Cell(line.clone()));
        }
        out
    }

    /// Parses the machine format, checking each hypothesis cell appears
    /// exactly once.
    pub fn from_jsonl(text: &str) -> Result<Self, ReportError> {
        let mut meta = None;
        let mut reliability = Vec::new();
        let mut conditional = Vec::new();
        let mut diversity = Vec::new();
        let mut cells: Vec<CellLine> = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() {
                continue;
            }
            let line: ReportLine = serde_json::from_str(raw)
                .map_err(|e| ReportError::Malformed(i + 1, e.to_string()))?;
            match line {
                ReportLine::Meta(m) => meta = Some(m),
                ReportLine::Reliability(l) => reliability.push(l),
                ReportLine::ConditionalAccuracy(l) => conditional.push(l),
                ReportLine::Diversity(l) => diversity.push(l),
                ReportLine::Cell(c) => {
                    if !seen.insert(c.key()) {
                        return Err(ReportError::DuplicateCell(c.key()));
                    }
                    cells.push(c);
                }
            }
        }
        Ok(AuditReport {
            meta: meta.ok_or(ReportError::MissingMeta)?,
            reliability,
            conditional,
            diversity,
            cells,
        })
    }

    /// Human-readable markdown rendering; a pure function of the parsed
    /// report.
    pub fn render_markdown(&self) -> String {
        let mut out = String::new();
        let meta = &self.meta;
        let _ = writeln!(out, "# Dataset audit: {}", meta.dataset);
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "- pool: {} records; seed {}; alpha {}; {} simulations; {} permutations; W order {}",
            meta.pool_size,
            meta.seed,
            meta.alpha,
            meta.n_simulations,
            meta.n_permutations,
            meta.wasserstein_order
        );
        let _ = writeln!(
            out,
            "- decisions: ✓ no test rejects, ✓2/3 exactly one rejects, × at least two reject"
        );

        for mode in [AuditMode::ErrorAware, AuditMode::Naive] {
            if mode == AuditMode::Naive && !meta.ablation {
                continue;
            }
            let mode_name = match mode {
                AuditMode::ErrorAware => "error-aware",
                AuditMode::Naive => "naive (no correction)",
            };
            for (kind, title) in [
                (HypothesisKind::Parity, "Parity vs reference"),
                (HypothesisKind::Representation, "Representation vs gender"),
            ] {
                let section: Vec<&CellLine> = self
                    .cells
                    .iter()
                    .filter(|c| c.kind == kind && c.mode == mode)
                    .collect();
                if section.is_empty() {
                    continue;
                }
                let _ = writeln!(out, "\n## {title} — {mode_name}\n");
                let _ = write!(out, "| Sensitive variable |");
                for size in &meta.sizes {
                    let _ = write!(out, " {size} |");
                }
                let _ = writeln!(out);
                let _ = write!(out, "|---|");
                for _ in &meta.sizes {
                    let _ = write!(out, "---|");
                }
                let _ = writeln!(out);
                let mut rows: Vec<(AttributeKind, String)> = section
                    .iter()
                    .map(|c| (c.attribute, c.modality.clone()))
                    .collect();
                rows.sort_by_key(|(attr, modality)| {
                    (
                        attr.stream_id(),
                        attr.parse_modality(modality).unwrap_or(usize::MAX),
                    )
                });
                rows.dedup();
                for (attr, modality) in rows {
                    let _ = write!(out, "| {attr} {modality} |");
                    for &size in &meta.sizes {
                        let glyph = section
                            .iter()
                            .find(|c| {
                                c.attribute == attr && c.modality == modality && c.size == size
                            })
                            .map(|c| c.decision.glyph())
                            .unwrap_or("–");
                        let _ = write!(out, " {glyph} |");
                    }
                    let _ = writeln!(out);
                }
            }
        }

        if !self.diversity.is_empty() {
            let _ = writeln!(out, "\n## Diversity metrics\n");
            let _ = writeln!(
                out,
                "| Attribute | Diversity loss | Entropy (nats) | Geometric diversity |"
            );
            let _ = writeln!(out, "|---|---|---|---|");
            for d in &self.diversity {
                let _ = writeln!(
                    out,
                    "| {} | {:.4} | {:.4} | {:.6} |",
                    d.attribute, d.diversity_loss, d.entropy_nats, d.geometric_diversity
                );
            }
        }

        if !self.reliability.is_empty() {
            let _ = writeln!(out, "\n## Reliability (validation split)\n");
            let _ = writeln!(out, "| Attribute | Modality | Accuracy | Precision |");
            let _ = writeln!(out, "|---|---|---|---|");
            for r in &self.reliability {
                let fmt = |e: &Option<RateEstimate>| match e {
                    Some(e) => format!("{:.4} (n={})", e.rate, e.support),
                    None => "–".to_string(),
                };
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} |",
                    r.attribute,
                    r.modality,
                    fmt(&r.accuracy),
                    fmt(&r.precision)
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> AuditReport {
        let meta = ReportMeta {
            dataset: "demo".into(),
            seed: 7,
            alpha: 0.05,
            n_simulations: 11,
            n_permutations: 99,
            wasserstein_order: 1.0,
            sizes: vec![100, 500],
            ablation: false,
            pool_size: 600,
        };
        let cells = vec![
            CellLine {
                kind: HypothesisKind::Parity,
                mode: AuditMode::ErrorAware,
                attribute: AttributeKind::Gender,
                modality: "Men".into(),
                conditioning: None,
                size: 100,
                p_chi2: Some(0.01),
                p_mean: Some(0.02),
                p_wasserstein: Some(0.2),
                decision: Decision::Reject,
            },
            CellLine {
                kind: HypothesisKind::Parity,
                mode: AuditMode::ErrorAware,
                attribute: AttributeKind::Gender,
                modality: "Men".into(),
                conditioning: None,
                size: 500,
                p_chi2: Some(0.5),
                p_mean: Some(0.4),
                p_wasserstein: Some(0.6),
                decision: Decision::Accept,
            },
        ];
        AuditReport {
            meta,
            reliability: vec![],
            conditional: vec![],
            diversity: vec![DiversityLine {
                attribute: AttributeKind::Gender,
                diversity_loss: 0.1,
                entropy_nats: 0.69,
                geometric_diversity: 0.49,
            }],
            cells,
        }
    }

    #[test]
    fn jsonl_round_trips() {
        let report = sample_report();
        let text = report.to_jsonl();
        let back = AuditReport::from_jsonl(&text).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn duplicate_cells_are_rejected() {
        let mut report = sample_report();
        report.cells.push(report.cells[0].clone());
        let text = report.to_jsonl();
        assert!(matches!(
            AuditReport::from_jsonl(&text),
            Err(ReportError::DuplicateCell(_))
        ));
    }

    #[test]
    fn markdown_contains_glyph_grid() {
        let md = sample_report().render_markdown();
        assert!(md.contains("| gender Men | × | ✓ |"), "{md}");
        assert!(md.contains("Diversity metrics"));
    }

    #[test]
    fn rendering_is_a_pure_function_of_the_machine_file() {
        let report = sample_report();
        let text = report.to_jsonl();
        let a = AuditReport::from_jsonl(&text).unwrap().render_markdown();
        let b = AuditReport::from_jsonl(&text).unwrap().render_markdown();
        assert_eq!(a, b);
        assert_eq!(a, report.render_markdown());
    }
}
