//! Rank statistics, normalization, and the OLS core shared by all
//! downstream evaluation.

mod corr;
mod ols;

pub use corr::{avg_cross_sectional_corr, CorrMatrix, CorrReport, RETURN_LABEL};
pub use ols::{ols, OlsFit, CONDITION_LIMIT};

use crate::panel::PanelError;

/// Errors from metric computations.
#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("input length {len} below minimum {min}")]
    TooShort { len: usize, min: usize },
    #[error("correlation undefined: an input has zero rank variance")]
    UndefinedCorrelation,
    #[error("degenerate column: zero standard deviation")]
    DegenerateColumn,
    #[error("singular design matrix (condition estimate {condition:.3e})")]
    SingularDesign { condition: f64 },
    #[error("design needs at least {need} rows for {cols} regressors, got {rows}")]
    TooFewRows { rows: usize, cols: usize, need: usize },
    #[error("no usable dates: {reason}")]
    NoUsableDates { reason: String },
    #[error(transparent)]
    Panel(#[from] PanelError),
}

/// 1-based ranks; ties receive the average of the tied positions.
pub fn ranks(x: &[f64]) -> Result<Vec<f64>, MetricsError> {
    if x.is_empty() {
        return Err(MetricsError::TooShort { len: 0, min: 1 });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite);
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).expect("finite values compare"));

    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share the average 1-based rank
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = avg;
        }
        i = j + 1;
    }
    Ok(out)
}

/// Spearman rank correlation: Pearson correlation applied to ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 3 {
        return Err(MetricsError::TooShort { len: x.len(), min: 3 });
    }
    let rx = ranks(x)?;
    let ry = ranks(y)?;
    pearson(&rx, &ry)
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::UndefinedCorrelation);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Centers and scales to zero mean, unit sample standard deviation
/// (n-1 denominator).
pub fn zscore(x: &[f64]) -> Result<Vec<f64>, MetricsError> {
    if x.len() < 2 {
        return Err(MetricsError::TooShort { len: x.len(), min: 2 });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite);
    }
    let constant = x.windows(2).all(|w| w[0] == w[1]);
    if constant {
        return Err(MetricsError::DegenerateColumn);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let std = var.sqrt();
    if std == 0.0 {
        return Err(MetricsError::DegenerateColumn);
    }
    Ok(x.iter().map(|v| (v - mean) / std).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_sorted_input() {
        assert_eq!(ranks(&[10.0, 20.0, 30.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(ranks(&[5.0, 5.0, 1.0]).unwrap(), vec![2.5, 2.5, 1.0]);
        assert_eq!(ranks(&[2.0, 2.0, 2.0]).unwrap(), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn ranks_reject_non_finite() {
        assert!(matches!(ranks(&[1.0, f64::NAN]), Err(MetricsError::NonFinite)));
    }

    #[test]
    fn spearman_self_and_antitone() {
        let x = [3.0, 1.0, 4.0, 1.5, 9.0, 2.6];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(spearman(&x, &x).unwrap(), 1.0);
        assert_eq!(spearman(&x, &neg).unwrap(), -1.0);
    }

    #[test]
    fn spearman_is_invariant_under_monotone_transform() {
        let x = [0.3f64, -1.2, 2.5, 0.9, -0.4];
        let expx: Vec<f64> = x.iter().map(|v: &f64| v.exp()).collect();
        assert_eq!(spearman(&x, &expx).unwrap(), 1.0);
    }

    #[test]
    fn spearman_undefined_for_constant_vector() {
        let x = [1.0, 2.0, 3.0];
        let c = [5.0, 5.0, 5.0];
        assert!(matches!(spearman(&x, &c), Err(MetricsError::UndefinedCorrelation)));
    }

    #[test]
    fn zscore_unit_example() {
        let z = zscore(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(z, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn zscore_constant_column_is_degenerate() {
        assert!(matches!(zscore(&[2.0, 2.0, 2.0]), Err(MetricsError::DegenerateColumn)));
    }

    #[test]
    fn zscore_moments() {
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.77).sin() * 12.0 + 3.0).collect();
        let z = zscore(&x).unwrap();
        let n = z.len() as f64;
        let mean = z.iter().sum::<f64>() / n;
        let var = z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 1e-12);
        assert!((var.sqrt() - 1.0).abs() < 1e-12);
    }
}
