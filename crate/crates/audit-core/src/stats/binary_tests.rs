//! Chi-squared and CLT-based mean tests, in one-sample (against a reference)
//! and two-sample (between subgroups) forms. All p-values are two-sided.

use crate::stats::special::{chi2_sf, normal_two_sided_p};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Chi2,
    Mean,
    Wasserstein,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub test_kind: TestKind,
}

#[derive(Debug, Error, PartialEq)]
pub enum StatError {
    #[error("empty sample")]
    EmptySample,
    #[error("reference probability is zero for modality {0} with nonzero count")]
    ZeroExpected(usize),
    #[error("degenerate reference proportion {0}")]
    DegenerateReference(f64),
    #[error("Wasserstein order must be >= 1, got {0}")]
    InvalidOrder(f64),
    #[error("permutation count must be >= 1")]
    NoPermutations,
}

/// Pearson goodness-of-fit test of observed counts against reference
/// probabilities. Modalities with zero reference probability and zero count
/// are excluded; a nonzero count on a zero-probability modality is an error.
pub fn chi2_one_sample(counts: &[usize], reference: &[f64]) -> Result<TestResult, StatError> {
    assert_eq!(counts.len(), reference.len(), "modality count mismatch");
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(StatError::EmptySample);
    }
    let mut statistic = 0.0;
    let mut included = 0usize;
    for (modality, (&observed, &p)) in counts.iter().zip(reference.iter()).enumerate() {
        if p == 0.0 {
            if observed > 0 {
                return Err(StatError::ZeroExpected(modality));
            }
            continue;
        }
        let expected = n as f64 * p;
        let diff = observed as f64 - expected;
        statistic += diff * diff / expected;
        included += 1;
    }
    let df = included.saturating_sub(1);
    let p_value = if df == 0 { 1.0 } else { chi2_sf(statistic, df as f64) };
    Ok(TestResult {
        statistic,
        p_value,
        test_kind: TestKind::Chi2,
    })
}

/// Chi-squared homogeneity test on the 2×K contingency table formed by two
/// per-modality count vectors. Columns with zero pooled count are dropped.
pub fn chi2_two_sample(counts_a: &[usize], counts_b: &[usize]) -> Result<TestResult, StatError> {
    assert_eq!(counts_a.len(), counts_b.len(), "modality count mismatch");
    let n_a: usize = counts_a.iter().sum();
    let n_b: usize = counts_b.iter().sum();
    if n_a == 0 || n_b == 0 {
        return Err(StatError::EmptySample);
    }
    let total = (n_a + n_b) as f64;
    let mut statistic = 0.0;
    let mut kept_columns = 0usize;
    for (&a, &b) in counts_a.iter().zip(counts_b.iter()) {
        let pooled = a + b;
        if pooled == 0 {
            continue;
        }
        kept_columns += 1;
        let col = pooled as f64;
        for (observed, row_total) in [(a, n_a), (b, n_b)] {
            let expected = row_total as f64 * col / total;
            let diff = observed as f64 - expected;
            statistic += diff * diff / expected;
        }
    }
    let df = kept_columns.saturating_sub(1);
    let p_value = if df == 0 { 1.0 } else { chi2_sf(statistic, df as f64) };
    Ok(TestResult {
        statistic,
        p_value,
        test_kind: TestKind::Chi2,
    })
}

/// One-sample CLT z-test of a binary sample mean against `p0`.
pub fn mean_test_one_sample(values: &[u8], p0: f64) -> Result<TestResult, StatError> {
    if values.is_empty() {
        return Err(StatError::EmptySample);
    }
    if !(0.0 < p0 && p0 < 1.0) {
        return Err(StatError::DegenerateReference(p0));
    }
    let n = values.len() as f64;
    let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
    let z = (mean - p0) / (p0 * (1.0 - p0) / n).sqrt();
    Ok(TestResult {
        statistic: z,
        p_value: normal_two_sided_p(z),
        test_kind: TestKind::Mean,
    })
}

/// Two-proportion z-test with pooled variance. A degenerate pool (both
/// samples all zeros or all ones) means the empirical distributions are
/// identical, so the result is statistic 0, p = 1.
pub fn mean_test_two_sample(values_a: &[u8], values_b: &[u8]) -> Result<TestResult, StatError> {
    if values_a.is_empty() || values_b.is_empty() {
        return Err(StatError::EmptySample);
    }
    let n_a = values_a.len() as f64;
    let n_b = values_b.len() as f64;
    let ones_a = values_a.iter().map(|&v| v as f64).sum::<f64>();
    let ones_b = values_b.iter().map(|&v| v as f64).sum::<f64>();
    let pooled = (ones_a + ones_b) / (n_a + n_b);
    if pooled == 0.0 || pooled == 1.0 {
        return Ok(TestResult {
            statistic: 0.0,
            p_value: 1.0,
            test_kind: TestKind::Mean,
        });
    }
    let z = (ones_a / n_a - ones_b / n_b)
        / (pooled * (1.0 - pooled) * (1.0 / n_a + 1.0 / n_b)).sqrt();
    Ok(TestResult {
        statistic: z,
        p_value: normal_two_sided_p(z),
        test_kind: TestKind::Mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn chi2_one_sample_exact_fit() {
        let r = chi2_one_sample(&[50, 50], &[0.5, 0.5]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn chi2_one_sample_sixty_forty() {
        let r = chi2_one_sample(&[60, 40], &[0.5, 0.5]).unwrap();
        close(r.statistic, 4.0, 1e-12);
        close(r.p_value, 0.045_500_263_896_358_4, 1e-10);
    }

    #[test]
    fn chi2_one_sample_zero_expected() {
        assert_eq!(
            chi2_one_sample(&[5, 3], &[1.0, 0.0]).unwrap_err(),
            StatError::ZeroExpected(1)
        );
        // zero count on the zero-probability modality is fine
        let r = chi2_one_sample(&[8, 0], &[1.0, 0.0]).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn chi2_two_sample_identical_counts() {
        let r = chi2_two_sample(&[30, 20], &[30, 20]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn chi2_two_sample_hand_value() {
        // [[30,20],[20,30]]: margins 50/50, expected 25 in every cell
        let r = chi2_two_sample(&[30, 20], &[20, 30]).unwrap();
        close(r.statistic, 4.0, 1e-12);
        close(r.p_value, 0.045_500_263_896_358_4, 1e-10);
    }

    #[test]
    fn chi2_two_sample_empty_errors() {
        assert_eq!(
            chi2_two_sample(&[0, 0], &[3, 4]).unwrap_err(),
            StatError::EmptySample
        );
    }

    #[test]
    fn mean_one_sample_matches_hand_value() {
        let mut values = vec![1u8; 60];
        values.extend(vec![0u8; 40]);
        let r = mean_test_one_sample(&values, 0.5).unwrap();
        close(r.statistic, 2.0, 1e-12);
        close(r.p_value, 0.045_500_263_896_358_4, 1e-10);
    }

    #[test]
    fn mean_one_sample_two_sided_symmetry() {
        let mut low = vec![1u8; 40];
        low.extend(vec![0u8; 60]);
        let mut high = vec![1u8; 60];
        high.extend(vec![0u8; 40]);
        let p_low = mean_test_one_sample(&low, 0.5).unwrap().p_value;
        let p_high = mean_test_one_sample(&high, 0.5).unwrap().p_value;
        close(p_low, p_high, 1e-14);
    }

    #[test]
    fn mean_one_sample_rejects_degenerate_reference() {
        assert!(matches!(
            mean_test_one_sample(&[1, 0], 0.0),
            Err(StatError::DegenerateReference(_))
        ));
        assert!(matches!(
            mean_test_one_sample(&[1, 0], 1.0),
            Err(StatError::DegenerateReference(_))
        ));
    }

    #[test]
    fn mean_two_sample_hand_value() {
        let mut a = vec![1u8; 60];
        a.extend(vec![0u8; 40]);
        let mut b = vec![1u8; 40];
        b.extend(vec![0u8; 60]);
        let r = mean_test_two_sample(&a, &b).unwrap();
        close(r.statistic, 2.0 * std::f64::consts::SQRT_2, 1e-12);
        close(r.p_value, 0.004_677_734_981_063_2, 1e-9);
        // antisymmetry
        let swapped = mean_test_two_sample(&b, &a).unwrap();
        close(swapped.statistic, -r.statistic, 1e-14);
        close(swapped.p_value, r.p_value, 1e-14);
    }

    #[test]
    fn mean_two_sample_degenerate_pool() {
        let r = mean_test_two_sample(&[0, 0, 0], &[0, 0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let r = mean_test_two_sample(&[1, 1], &[1, 1, 1]).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn chi2_equals_squared_z_on_two_modalities() {
        for (ones, n, p0) in [(60usize, 100usize, 0.5), (13, 40, 0.3), (95, 200, 0.45)] {
            let counts = [ones, n - ones];
            let chi = chi2_one_sample(&counts, &[p0, 1.0 - p0]).unwrap();
            let mut values = vec![1u8; ones];
            values.extend(vec![0u8; n - ones]);
            let z = mean_test_one_sample(&values, p0).unwrap();
            close(chi.statistic, z.statistic * z.statistic, 1e-9);
            close(chi.p_value, z.p_value, 1e-9);
        }
    }

    #[test]
    fn chi2_two_sample_equals_squared_z_on_2x2() {
        for (a1, a0, b1, b0) in [(30usize, 20usize, 20usize, 30usize), (7, 13, 11, 29)] {
            let chi = chi2_two_sample(&[a1, a0], &[b1, b0]).unwrap();
            let mut va = vec![1u8; a1];
            va.extend(vec![0u8; a0]);
            let mut vb = vec![1u8; b1];
            vb.extend(vec![0u8; b0]);
            let z = mean_test_two_sample(&va, &vb).unwrap();
            close(chi.statistic, z.statistic * z.statistic, 1e-9);
            close(chi.p_value, z.p_value, 1e-9);
        }
    }
}
