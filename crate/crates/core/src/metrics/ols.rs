//! Ordinary least squares via Householder QR.
//!
//! The intercept column is prepended internally; callers pass the design
//! without it. QR keeps the solve numerically stable for the tall, skinny
//! systems produced by per-company and per-date regressions. Near rank
//! deficiency is detected from the ratio of extreme |R| diagonal entries.

use super::MetricsError;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

/// Designs whose estimated condition exceeds this are rejected as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// One least-squares fit. `coefficients[0]` is the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub r2: f64,
    pub adj_r2: f64,
    pub n_obs: usize,
    pub n_regressors: usize,
}

/// Fits `y ~ intercept + X`.
///
/// Requires `rows(X) >= cols(X) + 2` so the adjusted R-squared denominator
/// stays positive.
pub fn ols(x: &Array2<f64>, y: &Array1<f64>) -> Result<OlsFit, MetricsError> {
    let n = x.nrows();
    let p = x.ncols();
    if y.len() != n {
        return Err(MetricsError::LengthMismatch { left: n, right: y.len() });
    }
    if n < p + 2 {
        return Err(MetricsError::TooFewRows { rows: n, cols: p, need: p + 2 });
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite);
    }

    // design = [1 | X]
    let cols = p + 1;
    let mut a = Array2::<f64>::zeros((n, cols));
    for i in 0..n {
        a[[i, 0]] = 1.0;
        for j in 0..p {
            a[[i, j + 1]] = x[[i, j]];
        }
    }
    let design = a.clone();
    let mut qty = y.clone();

    // Householder triangularization, applied to the RHS as we go.
    for k in 0..cols {
        let mut norm = 0.0;
        for i in k..n {
            norm += a[[i, k]] * a[[i, k]];
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            return Err(MetricsError::SingularDesign { condition: f64::INFINITY });
        }
        let sign = if a[[k, k]] >= 0.0 { 1.0 } else { -1.0 };
        let mut v: Vec<f64> = (k..n).map(|i| a[[i, k]]).collect();
        v[0] += sign * norm;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        for j in k..cols {
            let mut dot = 0.0;
            for i in k..n {
                dot += v[i - k] * a[[i, j]];
            }
            let f = 2.0 * dot / vtv;
            for i in k..n {
                a[[i, j]] -= f * v[i - k];
            }
        }
        let mut dot = 0.0;
        for i in k..n {
            dot += v[i - k] * qty[i];
        }
        let f = 2.0 * dot / vtv;
        for i in k..n {
            qty[i] -= f * v[i - k];
        }
    }

    let mut diag_min = f64::INFINITY;
    let mut diag_max = 0.0f64;
    for k in 0..cols {
        let d = a[[k, k]].abs();
        diag_min = diag_min.min(d);
        diag_max = diag_max.max(d);
    }
    let condition = if diag_min == 0.0 { f64::INFINITY } else { diag_max / diag_min };
    if condition > CONDITION_LIMIT {
        return Err(MetricsError::SingularDesign { condition });
    }

    // back-substitution on R beta = Q^T y
    let mut beta = vec![0.0; cols];
    for k in (0..cols).rev() {
        let mut sum = qty[k];
        for j in k + 1..cols {
            sum -= a[[k, j]] * beta[j];
        }
        beta[k] = sum / a[[k, k]];
    }

    let mut residuals = vec![0.0; n];
    let mut ssr = 0.0;
    for i in 0..n {
        let mut fitted = 0.0;
        for j in 0..cols {
            fitted += design[[i, j]] * beta[j];
        }
        let r = y[i] - fitted;
        residuals[i] = r;
        ssr += r * r;
    }
    let mean_y = y.sum() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean_y) * (v - mean_y)).sum();
    let r2 = if sst > 0.0 { (1.0 - ssr / sst).clamp(0.0, 1.0) } else { 1.0 };
    let adj_r2 = 1.0 - (1.0 - r2) * (n as f64 - 1.0) / (n as f64 - p as f64 - 1.0);

    Ok(OlsFit { coefficients: beta, residuals, r2, adj_r2, n_obs: n, n_regressors: p })
}
