//! Independent reference formulas used to cross-check the main implementations.

use crate::error::{GovError, Result};

/// Gini from the sorted-rank formula `2 sum(i x_(i)) / (n sum x) - (n + 1) / n`.
pub fn gini_oracle(weights: &[f64]) -> f64 {
    let n = weights.len();
    let total: f64 = weights.iter().sum();
    if n < 2 || total <= 0.0 {
        return 0.0;
    }
    let mut w = weights.to_vec();
    w.sort_by(f64::total_cmp);
    let ranked: f64 = w.iter().enumerate().map(|(i, x)| (i + 1) as f64 * x).sum();
    let nf = n as f64;
    2.0 * ranked / (nf * total) - (nf + 1.0) / nf
}

/// `(beta0, beta1)` solving the uncentered normal equations
/// `[n, Sx; Sx, Sxx] b = [Sy, Sxy]` by Cramer's rule.
pub fn ols_oracle(y: &[f64], x: &[f64]) -> Result<(f64, f64)> {
    if y.len() != x.len() {
        return Err(GovError::LengthMismatch(y.len(), x.len()));
    }
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let det = n * sxx - sx * sx;
    if det <= 0.0 {
        return Err(GovError::DegenerateRegressor);
    }
    Ok(((sy * sxx - sx * sxy) / det, (n * sxy - sx * sy) / det))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_cases() {
        assert_eq!(gini_oracle(&[10.0, 10.0, 10.0]), 0.0);
        assert!((gini_oracle(&[1.0, 1.0, 1.0, 97.0]) - 0.72).abs() < 1e-15);
        assert_eq!(gini_oracle(&[0.0, 1.0]), 0.5);
        assert_eq!(gini_oracle(&[4.0]), 0.0);
    }

    #[test]
    fn ols_cases() {
        assert_eq!(ols_oracle(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), (0.0, 1.0));
        assert_eq!(ols_oracle(&[-3.0; 3], &[1.0, 2.0, 3.0]).unwrap(), (-3.0, 0.0));
        assert!(ols_oracle(&[1.0, 2.0], &[1.0, 1.0]).is_err());
    }
}
