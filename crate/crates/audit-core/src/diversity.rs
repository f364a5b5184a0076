//! Descriptive diversity measures reported alongside the hypothesis tests:
//! diversity loss against target frequencies, Shannon entropy of a
//! frequency vector, and the geometric (volume-based) diversity of a
//! variable-vector subset.

use thiserror::Error;

const PROBABILITY_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum DiversityError {
    #[error("frequency vector entries must be >= 0 and sum to 1 (sum = {0})")]
    NotAFrequencyVector(f64),
    #[error("target frequency vector has no positive entry")]
    AllZeroTarget,
    #[error("data matrix columns must share one dimension")]
    RaggedColumns,
    #[error("data matrix needs at least one column")]
    EmptyMatrix,
    #[error("frequency vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// A categorical frequency vector (entries ≥ 0, summing to 1).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyVector(Vec<f64>);

impl FrequencyVector {
    pub fn new(probabilities: Vec<f64>) -> Result<Self, DiversityError> {
        let sum: f64 = probabilities.iter().sum();
        if probabilities.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(DiversityError::NotAFrequencyVector(sum));
        }
        Ok(FrequencyVector(probabilities))
    }

    /// Empirical frequencies of modality indices over `cardinality` classes.
    pub fn from_counts(counts: &[usize]) -> Result<Self, DiversityError> {
        let total: usize = counts.iter().sum();
        if total == 0 {
            return Err(DiversityError::NotAFrequencyVector(0.0));
        }
        Ok(FrequencyVector(
            counts.iter().map(|&c| c as f64 / total as f64).collect(),
        ))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Log base for entropy; the choice only rescales the value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    Natural,
    Base2,
}

/// Diversity loss 1 − min over targeted groups of observed/target frequency.
///
/// 1 means at least one targeted group vanished; 0 means every group is at
/// or above its target. The raw formula value is returned without clamping.
pub fn diversity_loss(
    target: &FrequencyVector,
    observed: &FrequencyVector,
) -> Result<f64, DiversityError> {
    if target.0.len() != observed.0.len() {
        return Err(DiversityError::LengthMismatch(
            target.0.len(),
            observed.0.len(),
        ));
    }
    let min_ratio = target
        .0
        .iter()
        .zip(observed.0.iter())
        .filter(|(&t, _)| t > 0.0)
        .map(|(&t, &o)| o / t)
        .min_by(f64::total_cmp)
        .ok_or(DiversityError::AllZeroTarget)?;
    Ok(1.0 - min_ratio)
}

/// Shannon entropy −Σ f log f with 0·log 0 = 0.
pub fn conditional_entropy(frequencies: &FrequencyVector, base: LogBase) -> f64 {
    let nats: f64 = frequencies
        .0
        .iter()
        .filter(|&&f| f > 0.0)
        .map(|&f| -f * f.ln())
        .sum();
    match base {
        LogBase::Natural => nats,
        LogBase::Base2 => nats / std::f64::consts::LN_2,
    }
}

/// Data matrix with n variable vectors of dimension p as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    columns: Vec<Vec<f64>>,
    dimension: usize,
}

impl DataMatrix {
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self, DiversityError> {
        let dimension = columns.first().ok_or(DiversityError::EmptyMatrix)?.len();
        if columns.iter().any(|c| c.len() != dimension) {
            return Err(DiversityError::RaggedColumns);
        }
        Ok(DataMatrix { columns, dimension })
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }
}

/// Geometric diversity √det(DᵀD): the volume of the parallelotope spanned
/// by the columns of D.
///
/// Computed as the product of |r_ii| from a Householder QR of D, which
/// equals the square root of the product of the Gram matrix's squared
/// pivots; rank deficiency shows up as a zero pivot rather than a negative
/// round-off determinant. When n > p the exact value is 0.
pub fn geometric_diversity(matrix: &DataMatrix) -> f64 {
    let n = matrix.n_columns();
    let p = matrix.dimension();
    if n > p {
        return 0.0;
    }
    let mut cols: Vec<Vec<f64>> = matrix.columns.clone();
    let mut product = 1.0;
    for k in 0..n {
        // Householder reflection sending column k's tail to ±e_k.
        let norm: f64 = cols[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        product *= norm;
        let sign = if cols[k][k] >= 0.0 { 1.0 } else { -1.0 };
        let mut v: Vec<f64> = cols[k][k..].to_vec();
        v[0] += sign * norm;
        let v_norm_sq: f64 = v.iter().map(|x| x * x).sum();
        if v_norm_sq == 0.0 {
            continue;
        }
        for col in cols.iter_mut().skip(k + 1) {
            let dot: f64 = v.iter().zip(col[k..].iter()).map(|(a, b)| a * b).sum();
            let scale = 2.0 * dot / v_norm_sq;
            for (vi, ci) in v.iter().zip(col[k..].iter_mut()) {
                *ci -= scale * vi;
            }
        }
    }
    product
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() < tol, "{a} vs {b}");
    }

    #[test]
    fn diversity_loss_anchors() {
        let t = FrequencyVector::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(diversity_loss(&t, &t).unwrap(), 0.0);
        let missing = FrequencyVector::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(diversity_loss(&t, &missing).unwrap(), 1.0);
        let observed = FrequencyVector::new(vec![0.25, 0.75]).unwrap();
        close(diversity_loss(&t, &observed).unwrap(), 0.5, 1e-15);
    }

    #[test]
    fn diversity_loss_zero_target_entries_are_ignored() {
        let t = FrequencyVector::new(vec![1.0, 0.0]).unwrap();
        let o = FrequencyVector::new(vec![0.5, 0.5]).unwrap();
        close(diversity_loss(&t, &o).unwrap(), 0.5, 1e-15);
    }

    #[test]
    fn entropy_anchors() {
        let degenerate = FrequencyVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(conditional_entropy(&degenerate, LogBase::Natural), 0.0);
        let uniform = FrequencyVector::new(vec![0.25; 4]).unwrap();
        close(
            conditional_entropy(&uniform, LogBase::Natural),
            4f64.ln(),
            1e-12,
        );
        let skewed = FrequencyVector::new(vec![0.25, 0.75]).unwrap();
        close(
            conditional_entropy(&skewed, LogBase::Base2),
            0.811_278_124_459_133,
            1e-9,
        );
    }

    #[test]
    fn entropy_permutation_invariant_and_maximized_by_uniform() {
        let a = FrequencyVector::new(vec![0.1, 0.2, 0.7]).unwrap();
        let b = FrequencyVector::new(vec![0.7, 0.1, 0.2]).unwrap();
        close(
            conditional_entropy(&a, LogBase::Natural),
            conditional_entropy(&b, LogBase::Natural),
            1e-15,
        );
        let uniform = FrequencyVector::new(vec![1.0 / 3.0; 3]).unwrap();
        assert!(
            conditional_entropy(&a, LogBase::Natural)
                < conditional_entropy(&uniform, LogBase::Natural)
        );
    }

    #[test]
    fn geometric_diversity_anchors() {
        let identity =
            DataMatrix::from_columns(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        close(geometric_diversity(&identity), 1.0, 1e-12);

        let duplicated =
            DataMatrix::from_columns(vec![vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        close(geometric_diversity(&duplicated), 0.0, 1e-12);

        let scaled = DataMatrix::from_columns(vec![vec![2.0, 0.0], vec![0.0, 3.0]]).unwrap();
        close(geometric_diversity(&scaled), 6.0, 1e-12);
    }

    #[test]
    fn geometric_diversity_more_columns_than_rows_is_zero() {
        let wide = DataMatrix::from_columns(vec![vec![1.0], vec![2.0]]).unwrap();
        assert_eq!(geometric_diversity(&wide), 0.0);
    }

    #[test]
    fn geometric_diversity_column_scaling() {
        let base = DataMatrix::from_columns(vec![vec![1.0, 2.0, 0.5], vec![0.3, -1.0, 2.0]])
            .unwrap();
        let g = geometric_diversity(&base);
        let scaled = DataMatrix::from_columns(vec![
            vec![-3.0, -6.0, -1.5],
            vec![0.3, -1.0, 2.0],
        ])
        .unwrap();
        close(geometric_diversity(&scaled), 3.0 * g, 1e-10);
    }
}
