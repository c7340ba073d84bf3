//! Evaluation statistics: support recovery, estimation error, accuracy.

use serde::{Deserialize, Serialize};

use crate::data::{HETERO_INDEX, TRUE_SUPPORT};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Real;

/// Norm used for the estimation error.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorNorm {
    #[default]
    L1,
    L2,
}

/// Distance between an estimate and the truth; ℓ1 by default.
pub fn estimation_error<T: Real>(beta_hat: &[T], beta_true: &[T], norm: ErrorNorm) -> Result<T> {
    if beta_hat.len() != beta_true.len() {
        return Err(Error::Dimension {
            expected: beta_true.len(),
            actual: beta_hat.len(),
        });
    }
    let diffs = beta_hat.iter().zip(beta_true).map(|(&a, &b)| a - b);
    Ok(match norm {
        ErrorNorm::L1 => diffs.map(T::abs).sum(),
        ErrorNorm::L2 => diffs.map(|d| d * d).sum::<T>().sqrt(),
    })
}

/// `Σⱼ |β̂ⱼ − βⱼ|`.
pub fn absolute_error<T: Real>(beta_hat: &[T], beta_true: &[T]) -> Result<T> {
    estimation_error(beta_hat, beta_true, ErrorNorm::L1)
}

/// Percentage of samples with `sign(xᵢᵀβ̂) = yᵢ`, where `sign(0) = +1`.
pub fn classification_accuracy<T: Real>(beta_hat: &[T], raw_x: &DenseMatrix<T>, labels: &[T]) -> Result<f64> {
    if raw_x.cols() != beta_hat.len() {
        return Err(Error::Dimension {
            expected: raw_x.cols(),
            actual: beta_hat.len(),
        });
    }
    if raw_x.rows() != labels.len() {
        return Err(Error::Dimension {
            expected: raw_x.rows(),
            actual: labels.len(),
        });
    }
    if labels.iter().any(|&y| y != T::one() && y != -T::one()) {
        return Err(Error::Data("labels must be ±1".into()));
    }
    if labels.is_empty() {
        return Ok(100.0);
    }
    let fit = raw_x.mul_vec(beta_hat);
    let hits = fit
        .iter()
        .zip(labels)
        .filter(|(&f, &y)| (f >= T::zero()) == (y > T::zero()))
        .count();
    Ok(100.0 * hits as f64 / labels.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportMetrics {
    /// x₁ selected.
    pub p1: bool,
    /// Every variable of the true location support selected.
    pub p2: bool,
    pub nonzero: usize,
    /// Percentage of zero coefficients.
    pub sparsity: f64,
}

/// 0-based indices of the penalized coefficients above `threshold`.
pub fn selected<T: Real>(beta_hat: &[T], threshold: f64, intercept: bool) -> Vec<usize> {
    let off = usize::from(intercept);
    beta_hat
        .iter()
        .enumerate()
        .skip(off)
        .filter(|(_, b)| b.abs().as_f64() > threshold)
        .map(|(j, _)| j - off)
        .collect()
}

/// Support statistics against the synthetic model's truth; the intercept, if any, is excluded.
pub fn support_metrics<T: Real>(beta_hat: &[T], threshold: f64, intercept: bool) -> Result<SupportMetrics> {
    if !(threshold > 0.0) {
        return Err(Error::param("zero_threshold", "must be positive"));
    }
    let p = beta_hat.len() - usize::from(intercept && !beta_hat.is_empty());
    let sel = selected(beta_hat, threshold, intercept);
    let has = |j1: usize| sel.binary_search(&(j1 - 1)).is_ok();
    let nonzero = sel.len();
    let sparsity = if p == 0 {
        100.0
    } else {
        100.0 * (p - nonzero) as f64 / p as f64
    };
    Ok(SupportMetrics {
        p1: has(HETERO_INDEX),
        p2: TRUE_SUPPORT.iter().all(|&j| has(j)),
        nonzero,
        sparsity,
    })
}

/// One fitted model's evaluation row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub p1: f64,
    pub p2: f64,
    pub ae: Option<f64>,
    pub nonzero: f64,
    pub sparsity: f64,
    pub train_acc: Option<f64>,
    pub test_acc: Option<f64>,
    pub iterations: f64,
    pub wall_time: f64,
}
