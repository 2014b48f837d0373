//! Fama-MacBeth two-step regression and baseline-vs-candidate comparison.
//!
//! Step 1 regresses each company's forward-return time series on its
//! z-scored signal values (z-scored per cross-section, i.e. per date
//! across companies) to obtain factor exposures. Step 2 runs one
//! cross-sectional regression per date of returns on the fixed step-1
//! exposures, collecting risk premia and an adjusted R-squared per date.
//!
//! Per-company and per-date regressions run in parallel; every unit
//! writes to an index-addressed slot, so results are identical for any
//! worker count.

use crate::dsl::{AlphaDef, Column};
use crate::metrics::{ols, zscore, MetricsError, OlsFit};
use crate::panel::{Panel, PanelError};
use chrono::NaiveDate;
use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Errors from the two-step regression pipeline.
#[derive(Debug, thiserror::Error)]
pub enum FmbError {
    #[error("baseline model must contain at least one signal")]
    EmptyBaseline,
    #[error("no company satisfies the step-1 precondition ({need} complete dates); {detail}")]
    NoRetainedCompanies { need: usize, detail: String },
    #[error("step 2 has no usable dates: {reason}")]
    NoUsableDates { reason: String },
    #[error("need at least {need} usable dates, got {got}")]
    TooFewDates { got: usize, need: usize },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Panel(#[from] PanelError),
}

/// Step-1 output: per-company intercepts and factor exposures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaMatrix {
    /// Retained companies, in panel (lexicographic ticker) order.
    pub companies: Vec<String>,
    pub regressor_labels: Vec<String>,
    /// Per-company intercept.
    pub alphas: Vec<f64>,
    /// Row per retained company, column per regressor label.
    pub betas: Vec<Vec<f64>>,
    pub per_company_fit: Vec<OlsFit>,
    /// Companies excluded at step 1, with reasons.
    pub excluded: Vec<(String, String)>,
    /// Dates unusable during assembly (failed cross-section or a
    /// degenerate column), with reasons.
    pub skipped_dates: Vec<(NaiveDate, String)>,
    /// Dates that contributed observations.
    pub used_dates: Vec<NaiveDate>,
}

/// Step-2 output: per-date risk premia and adjusted R-squared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSeries {
    pub regressor_labels: Vec<String>,
    pub dates: Vec<NaiveDate>,
    /// Per-date intercept.
    pub gamma0: Vec<f64>,
    /// Per-date coefficient vector, aligned with `regressor_labels`.
    pub gammas: Vec<Vec<f64>>,
    pub adj_r2: Vec<f64>,
    pub skipped_dates: Vec<(NaiveDate, String)>,
}

/// Mean risk premium and its Fama-MacBeth t-statistic for one regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskPremium {
    pub label: String,
    pub mean: f64,
    /// `mean / (std / sqrt(T))`; infinite sentinel when `degenerate`.
    pub t_stat: f64,
    /// True when the gamma series had zero standard deviation.
    pub degenerate: bool,
}

/// Tukey box statistics of one model's per-date adjusted R-squared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: String,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_lo: f64,
    pub whisker_hi: f64,
    pub outliers: Vec<f64>,
    pub n_dates: usize,
}

/// Baseline and per-candidate model results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmbComparison {
    pub baseline: GammaSeries,
    /// Successful candidates in input order: (abbreviation, series).
    pub candidates: Vec<(String, GammaSeries)>,
    /// Failed candidates: (abbreviation, error description).
    pub failed: Vec<(String, String)>,
    /// Candidates in input order, baseline last.
    pub summary: Vec<ModelSummary>,
}

pub const BASELINE_MODEL: &str = "baseline";

/// Step 1: one time-series regression per company of forward returns on
/// z-scored signals. Companies need `m + 3` complete dates to be retained.
pub fn step1_betas(panel: &Panel, columns: &[Column]) -> Result<BetaMatrix, FmbError> {
    let m = columns.len();
    if m == 0 {
        return Err(FmbError::EmptyBaseline);
    }
    let labels: Vec<String> = columns.iter().map(|c| c.label().to_string()).collect();

    // Per-date z-scored observations, assembled sequentially so every
    // company's series is in date order.
    let mut obs: Vec<Vec<(f64, Vec<f64>)>> = vec![Vec::new(); panel.n_companies()];
    let mut skipped_dates = Vec::new();
    let mut used_dates = Vec::new();
    'date: for &date in panel.dates() {
        let cs = match panel.cross_section(date, columns) {
            Ok(cs) => cs,
            Err(PanelError::InsufficientCrossSection { needed, got, .. }) => {
                skipped_dates.push((date, format!("{got} complete companies, need {needed}")));
                continue;
            }
            Err(other) => return Err(other.into()),
        };
        let mut zcols: Vec<Vec<f64>> = Vec::with_capacity(m);
        for (j, label) in labels.iter().enumerate() {
            match zscore(&cs.matrix().column(j).to_vec()) {
                Ok(z) => zcols.push(z),
                Err(MetricsError::DegenerateColumn) => {
                    skipped_dates.push((date, format!("column {label} is constant")));
                    continue 'date;
                }
                Err(other) => return Err(other.into()),
            }
        }
        used_dates.push(date);
        for (row, ticker) in cs.companies().iter().enumerate() {
            let ci = panel.company_index(ticker).expect("cross-section ticker is in panel");
            let signals: Vec<f64> = (0..m).map(|j| zcols[j][row]).collect();
            obs[ci].push((cs.returns()[row], signals));
        }
    }

    let need = m + 3;
    // index-addressed per-company regressions
    let fits: Vec<Option<Result<OlsFit, MetricsError>>> = obs
        .par_iter()
        .map(|series| {
            if series.len() < need {
                return None;
            }
            let n = series.len();
            let mut x = Array2::zeros((n, m));
            let mut y = Array1::zeros(n);
            for (i, (ret, signals)) in series.iter().enumerate() {
                y[i] = *ret;
                for (j, v) in signals.iter().enumerate() {
                    x[[i, j]] = *v;
                }
            }
            Some(ols(&x, &y))
        })
        .collect();

    let mut companies = Vec::new();
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut per_company_fit = Vec::new();
    let mut excluded = Vec::new();
    for (ci, fit) in fits.into_iter().enumerate() {
        let ticker = panel.companies()[ci].clone();
        match fit {
            None => excluded.push((
                ticker,
                format!("{} complete dates, need {need}", obs[ci].len()),
            )),
            Some(Err(err)) => excluded.push((ticker, err.to_string())),
            Some(Ok(fit)) => {
                alphas.push(fit.coefficients[0]);
                betas.push(fit.coefficients[1..].to_vec());
                companies.push(ticker);
                per_company_fit.push(fit);
            }
        }
    }

    if companies.is_empty() {
        return Err(FmbError::NoRetainedCompanies {
            need,
            detail: format!(
                "{} companies examined, {} usable dates",
                panel.n_companies(),
                used_dates.len()
            ),
        });
    }
    Ok(BetaMatrix {
        companies,
        regressor_labels: labels,
        alphas,
        betas,
        per_company_fit,
        excluded,
        skipped_dates,
        used_dates,
    })
}

/// Step 2: per date, regress the cross-section of forward returns on the
/// fixed step-1 exposure rows. Dates with fewer than `m + 2` retained
/// companies are skipped and listed.
pub fn step2_cross_sectional(panel: &Panel, betas: &BetaMatrix) -> Result<GammaSeries, FmbError> {
    let m = betas.regressor_labels.len();
    let company_indices: Vec<usize> = betas
        .companies
        .iter()
        .map(|t| panel.company_index(t).expect("beta ticker is in panel"))
        .collect();

    type DateFit = Result<OlsFit, String>;
    let outcomes: Vec<(NaiveDate, DateFit)> = panel
        .dates()
        .par_iter()
        .enumerate()
        .map(|(di, &date)| {
            let mut rows = Vec::new();
            let mut rets = Vec::new();
            for (bi, &ci) in company_indices.iter().enumerate() {
                if let Some(ret) = panel.fwd_return(ci, di) {
                    rows.push(bi);
                    rets.push(ret);
                }
            }
            if rows.len() < m + 2 {
                return (date, Err(format!("{} companies with returns, need {}", rows.len(), m + 2)));
            }
            let mut x = Array2::zeros((rows.len(), m));
            for (i, &bi) in rows.iter().enumerate() {
                for j in 0..m {
                    x[[i, j]] = betas.betas[bi][j];
                }
            }
            let y = Array1::from_vec(rets);
            match ols(&x, &y) {
                Ok(fit) => (date, Ok(fit)),
                Err(err) => (date, Err(err.to_string())),
            }
        })
        .collect();

    let mut series = GammaSeries {
        regressor_labels: betas.regressor_labels.clone(),
        dates: Vec::new(),
        gamma0: Vec::new(),
        gammas: Vec::new(),
        adj_r2: Vec::new(),
        skipped_dates: Vec::new(),
    };
    for (date, outcome) in outcomes {
        match outcome {
            Ok(fit) => {
                series.dates.push(date);
                series.gamma0.push(fit.coefficients[0]);
                series.gammas.push(fit.coefficients[1..].to_vec());
                series.adj_r2.push(fit.adj_r2);
            }
            Err(reason) => series.skipped_dates.push((date, reason)),
        }
    }
    if series.dates.is_empty() {
        return Err(FmbError::NoUsableDates {
            reason: format!("all {} dates skipped", series.skipped_dates.len()),
        });
    }
    Ok(series)
}

/// Mean gamma and Fama-MacBeth t-statistic per regressor (intercept
/// first, labelled `gamma0`).
pub fn risk_premia(series: &GammaSeries) -> Result<Vec<RiskPremium>, FmbError> {
    let t_used = series.dates.len();
    if t_used < 2 {
        return Err(FmbError::TooFewDates { got: t_used, need: 2 });
    }
    let mut out = Vec::new();
    let mut push = |label: &str, values: Vec<f64>| {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let constant = values.windows(2).all(|w| w[0] == w[1]);
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        let std = var.sqrt();
        if constant || std == 0.0 {
            out.push(RiskPremium {
                label: label.to_string(),
                mean,
                t_stat: f64::INFINITY,
                degenerate: true,
            });
        } else {
            out.push(RiskPremium {
                label: label.to_string(),
                mean,
                t_stat: mean / (std / n.sqrt()),
                degenerate: false,
            });
        }
    };
    push("gamma0", series.gamma0.clone());
    for (j, label) in series.regressor_labels.iter().enumerate() {
        push(label, series.gammas.iter().map(|g| g[j]).collect());
    }
    Ok(out)
}

fn run_model(panel: &Panel, columns: &[Column]) -> Result<GammaSeries, FmbError> {
    let betas = step1_betas(panel, columns)?;
    step2_cross_sectional(panel, &betas)
}

/// Runs the baseline model and `baseline + {candidate}` for each
/// candidate. One failing candidate does not abort the others; failures
/// are reported alongside the successes.
pub fn fmb_compare(
    panel: &Panel,
    baseline: &[Column],
    candidates: &[AlphaDef],
) -> Result<FmbComparison, FmbError> {
    if baseline.is_empty() {
        return Err(FmbError::EmptyBaseline);
    }
    let baseline_series = run_model(panel, baseline)?;

    let runs: Vec<(String, Result<GammaSeries, FmbError>)> = candidates
        .par_iter()
        .map(|def| {
            let mut columns = baseline.to_vec();
            columns.push(Column::Alpha(def.clone()));
            (def.abbreviation.clone(), run_model(panel, &columns))
        })
        .collect();

    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (abbr, outcome) in runs {
        match outcome {
            Ok(series) => ok.push((abbr, series)),
            Err(err) => failed.push((abbr, err.to_string())),
        }
    }

    let mut summary = Vec::new();
    for (abbr, series) in &ok {
        summary.push(box_stats(abbr, &series.adj_r2));
    }
    summary.push(box_stats(BASELINE_MODEL, &baseline_series.adj_r2));

    Ok(FmbComparison { baseline: baseline_series, candidates: ok, failed, summary })
}

impl FmbComparison {
    /// Long-format CSV: `model,date,adj_r2`, candidates first, baseline last.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("model,date,adj_r2\n");
        let mut push = |model: &str, series: &GammaSeries| {
            for (date, r2) in series.dates.iter().zip(&series.adj_r2) {
                out.push_str(&format!("{model},{date},{r2}\n"));
            }
        };
        for (abbr, series) in &self.candidates {
            push(abbr, series);
        }
        push(BASELINE_MODEL, &self.baseline);
        out
    }

    /// Summary CSV mirroring the box statistics.
    pub fn to_summary_csv(&self) -> String {
        let mut out = String::from("model,median,q1,q3,whisker_lo,whisker_hi,outliers\n");
        for s in &self.summary {
            let outliers =
                s.outliers.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(";");
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                s.model, s.median, s.q1, s.q3, s.whisker_lo, s.whisker_hi, outliers
            ));
        }
        out
    }

    pub fn summary_for(&self, model: &str) -> Option<&ModelSummary> {
        self.summary.iter().find(|s| s.model == model)
    }
}

/// Linearly interpolated quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Tukey box statistics with 1.5 IQR whiskers clamped to data points.
pub fn box_stats(model: &str, values: &[f64]) -> ModelSummary {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite adj_r2"));
    let q1 = quantile(&sorted, 0.25);
    let median = quantile(&sorted, 0.5);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let lo_fence = q1 - 1.5 * iqr;
    let hi_fence = q3 + 1.5 * iqr;
    let whisker_lo =
        sorted.iter().copied().find(|v| *v >= lo_fence).unwrap_or(q1);
    let whisker_hi =
        sorted.iter().rev().copied().find(|v| *v <= hi_fence).unwrap_or(q3);
    let outliers: Vec<f64> =
        sorted.iter().copied().filter(|v| *v < lo_fence || *v > hi_fence).collect();
    ModelSummary {
        model: model.to_string(),
        median,
        q1,
        q3,
        whisker_lo,
        whisker_hi,
        outliers,
        n_dates: values.len(),
    }
}
