//! Averaged cross-sectional Spearman correlation.
//!
//! For every usable date the requested columns plus the forward return
//! form a complete-case cross-section; the Spearman matrix is computed per
//! date and the report's `average` is the element-wise mean over dates.
//! A pair whose correlation is undefined at some date (constant column)
//! is excluded from that pair's average, with contributing-date counts
//! tracked per pair. Dates whose cross-section fails its preconditions
//! are skipped and listed.

use super::{spearman, MetricsError};
use crate::dsl::Column;
use crate::panel::{Panel, PanelError};
use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Square, label-aligned correlation matrix. Entries are `None` where the
/// correlation was undefined; defined entries lie in [-1, 1] with a unit
/// diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrMatrix {
    labels: Vec<String>,
    data: Vec<Option<f64>>,
}

impl CorrMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        let mut m = CorrMatrix { labels, data: vec![None; n * n] };
        for i in 0..n {
            m.set(i, i, Some(1.0));
        }
        m
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.data[row * self.n() + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Option<f64>) {
        let n = self.n();
        self.data[row * n + col] = value;
        self.data[col * n + row] = value;
    }

    pub fn get_by_label(&self, row: &str, col: &str) -> Option<f64> {
        let r = self.labels.iter().position(|l| l == row)?;
        let c = self.labels.iter().position(|l| l == col)?;
        self.get(r, c)
    }
}

/// Per-date Spearman matrices and their element-wise average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrReport {
    pub labels: Vec<String>,
    pub per_date: Vec<(NaiveDate, CorrMatrix)>,
    pub average: CorrMatrix,
    /// Dates contributing to each (row, col) average entry.
    pub pair_counts: Vec<usize>,
    pub skipped_dates: Vec<(NaiveDate, String)>,
}

impl CorrReport {
    /// Long-format CSV: `date,row_label,col_label,rho`, with the averaged
    /// matrix appended under date `average`. Undefined entries serialize
    /// as an empty rho.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,row_label,col_label,rho\n");
        let mut push = |date: &str, matrix: &CorrMatrix| {
            for (i, row) in matrix.labels().iter().enumerate() {
                for (j, col) in matrix.labels().iter().enumerate() {
                    let rho = match matrix.get(i, j) {
                        Some(v) => format!("{v}"),
                        None => String::new(),
                    };
                    out.push_str(&format!("{date},{row},{col},{rho}\n"));
                }
            }
        };
        for (date, matrix) in &self.per_date {
            push(&date.to_string(), matrix);
        }
        push("average", &self.average);
        out
    }

    /// The averaged correlation between a column and the forward return.
    pub fn avg_return_corr(&self, label: &str) -> Option<f64> {
        self.average.get_by_label(label, RETURN_LABEL)
    }
}

/// Label of the appended forward-return column.
pub const RETURN_LABEL: &str = "return";

enum DateOutcome {
    Matrix(CorrMatrix),
    Skip(String),
    Fail(PanelError),
}

/// Computes per-date Spearman matrices over `columns` plus the forward
/// return, and their date-averaged matrix.
pub fn avg_cross_sectional_corr(
    panel: &Panel,
    columns: &[Column],
) -> Result<CorrReport, MetricsError> {
    let mut labels: Vec<String> = columns.iter().map(|c| c.label().to_string()).collect();
    labels.push(RETURN_LABEL.to_string());
    let n_labels = labels.len();

    // Per-date matrices in parallel; the averaging pass below runs in a
    // fixed date order so results do not depend on worker count.
    let outcomes: Vec<(NaiveDate, DateOutcome)> = panel
        .dates()
        .par_iter()
        .map(|&date| {
            let outcome = match panel.cross_section(date, columns) {
                Ok(cs) => {
                    if cs.len() < 3 {
                        DateOutcome::Skip(format!("{} companies, need 3 for rank correlation", cs.len()))
                    } else {
                        let mut vectors: Vec<Vec<f64>> = (0..columns.len())
                            .map(|j| cs.matrix().column(j).to_vec())
                            .collect();
                        vectors.push(cs.returns().to_vec());
                        let mut matrix = CorrMatrix::new(labels.clone());
                        for i in 0..n_labels {
                            for j in (i + 1)..n_labels {
                                // columns are finite, equal-length, len >= 3,
                                // so only the undefined case can occur
                                let rho = match spearman(&vectors[i], &vectors[j]) {
                                    Ok(v) => Some(v),
                                    Err(_) => None,
                                };
                                matrix.set(i, j, rho);
                            }
                        }
                        DateOutcome::Matrix(matrix)
                    }
                }
                Err(PanelError::InsufficientCrossSection { needed, got, .. }) => {
                    DateOutcome::Skip(format!("{got} complete companies, need {needed}"))
                }
                Err(other) => DateOutcome::Fail(other),
            };
            (date, outcome)
        })
        .collect();

    let mut per_date = Vec::new();
    let mut skipped = Vec::new();
    for (date, outcome) in outcomes {
        match outcome {
            DateOutcome::Matrix(m) => per_date.push((date, m)),
            DateOutcome::Skip(reason) => skipped.push((date, reason)),
            DateOutcome::Fail(err) => return Err(err.into()),
        }
    }
    if per_date.is_empty() {
        return Err(MetricsError::NoUsableDates {
            reason: format!("all {} dates skipped", skipped.len()),
        });
    }

    let mut sums = vec![0.0; n_labels * n_labels];
    let mut counts = vec![0usize; n_labels * n_labels];
    for (_, matrix) in &per_date {
        for i in 0..n_labels {
            for j in 0..n_labels {
                if let Some(v) = matrix.get(i, j) {
                    sums[i * n_labels + j] += v;
                    counts[i * n_labels + j] += 1;
                }
            }
        }
    }
    let mut average = CorrMatrix::new(labels.clone());
    for i in 0..n_labels {
        for j in i..n_labels {
            let c = counts[i * n_labels + j];
            let value = (c > 0).then(|| sums[i * n_labels + j] / c as f64);
            average.set(i, j, value);
        }
    }

    Ok(CorrReport { labels, per_date, average, pair_counts: counts, skipped_dates: skipped })
}
