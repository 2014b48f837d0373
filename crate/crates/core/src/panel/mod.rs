//! Company signal panel: quarterly signal histories aligned with forward
//! returns, served as complete-case cross-sections.
//!
//! A [`Panel`] is immutable after load. All operations are pure functions
//! of their inputs, so the panel is safe to share across worker threads.

mod load;
mod sample;

pub use load::{load_panel, LoadOptions, LoadSummary};

use crate::dsl::Column;
use crate::signals::AliasError;
use chrono::NaiveDate;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// Forward-return horizon. `ThreeMonth` maps a quarterly date to the next
/// date on the panel grid; `OneMonth` maps to the nearest price
/// observation around one calendar month ahead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    OneMonth,
    ThreeMonth,
}

impl FromStr for Horizon {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1m" | "one_month" | "onemonth" => Ok(Horizon::OneMonth),
            "3m" | "three_month" | "threemonth" => Ok(Horizon::ThreeMonth),
            other => Err(format!("unknown horizon {other:?} (expected 1m or 3m)")),
        }
    }
}

impl std::fmt::Display for Horizon {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Horizon::OneMonth => f.write_str("one_month"),
            Horizon::ThreeMonth => f.write_str("three_month"),
        }
    }
}

/// Errors from panel construction, ingestion, and cross-section assembly.
#[derive(Debug, thiserror::Error)]
pub enum PanelError {
    #[error("{file}: column {column:?} is neither a canonical signal id nor a known alias")]
    Schema { file: String, column: String },
    #[error("{file}: required column {column:?} missing from header")]
    MissingColumn { file: String, column: String },
    #[error("empty panel: {reason}")]
    EmptyPanel { reason: String },
    #[error("invalid panel: {reason}")]
    Invalid { reason: String },
    #[error("date {date} is not in the panel")]
    DateNotInPanel { date: NaiveDate },
    #[error("signal {name:?} is not in the panel")]
    UnknownSignal { name: String },
    #[error("cross-section at {date} has {got} complete companies, needs at least {needed}")]
    InsufficientCrossSection { date: NaiveDate, needed: usize, got: usize },
    #[error("sample of {requested} rows requested but only {available} complete rows exist")]
    SampleTooLarge { requested: usize, available: usize },
    #[error(transparent)]
    Alias(#[from] AliasError),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Companies x dates x signals, plus forward returns per (company, date).
///
/// Invariants, enforced by [`Panel::from_parts`]:
/// - dates strictly increasing, companies sorted and unique,
/// - stored values are finite (missing is `None`, never NaN),
/// - dense layout: every (company, date, signal) cell has a slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    dates: Vec<NaiveDate>,
    companies: Vec<String>,
    signal_names: Vec<String>,
    /// Flattened `[company][date][signal]`.
    values: Vec<Option<f64>>,
    /// Flattened `[company][date]`.
    fwd_returns: Vec<Option<f64>>,
    horizon: Horizon,
}

impl Panel {
    /// Validating constructor; `values` and `fwd_returns` use the
    /// flattened layouts documented on the struct.
    pub fn from_parts(
        dates: Vec<NaiveDate>,
        companies: Vec<String>,
        signal_names: Vec<String>,
        values: Vec<Option<f64>>,
        fwd_returns: Vec<Option<f64>>,
        horizon: Horizon,
    ) -> Result<Self, PanelError> {
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PanelError::Invalid {
                reason: "dates must be strictly increasing".to_string(),
            });
        }
        if companies.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PanelError::Invalid {
                reason: "companies must be sorted and unique".to_string(),
            });
        }
        for (i, name) in signal_names.iter().enumerate() {
            if name.is_empty() || signal_names[..i].contains(name) {
                return Err(PanelError::Invalid {
                    reason: format!("signal names must be unique and non-empty (offender {name:?})"),
                });
            }
        }
        let expect_values = companies.len() * dates.len() * signal_names.len();
        if values.len() != expect_values {
            return Err(PanelError::Invalid {
                reason: format!("values length {} != {}", values.len(), expect_values),
            });
        }
        let expect_returns = companies.len() * dates.len();
        if fwd_returns.len() != expect_returns {
            return Err(PanelError::Invalid {
                reason: format!("fwd_returns length {} != {}", fwd_returns.len(), expect_returns),
            });
        }
        if values.iter().chain(fwd_returns.iter()).any(|v| v.is_some_and(|x| !x.is_finite())) {
            return Err(PanelError::Invalid {
                reason: "stored values must be finite; use None for missing".to_string(),
            });
        }
        Ok(Panel { dates, companies, signal_names, values, fwd_returns, horizon })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn companies(&self) -> &[String] {
        &self.companies
    }

    pub fn signal_names(&self) -> &[String] {
        &self.signal_names
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn n_companies(&self) -> usize {
        self.companies.len()
    }

    pub fn n_signals(&self) -> usize {
        self.signal_names.len()
    }

    pub fn date_index(&self, date: NaiveDate) -> Option<usize> {
        self.dates.binary_search(&date).ok()
    }

    pub fn company_index(&self, ticker: &str) -> Option<usize> {
        self.companies.binary_search_by(|c| c.as_str().cmp(ticker)).ok()
    }

    pub fn signal_index(&self, name: &str) -> Option<usize> {
        self.signal_names.iter().position(|s| s == name)
    }

    /// Raw signal value by index triple.
    pub fn value(&self, company: usize, date: usize, signal: usize) -> Option<f64> {
        self.values[(company * self.dates.len() + date) * self.signal_names.len() + signal]
    }

    /// Forward return by index pair.
    pub fn fwd_return(&self, company: usize, date: usize) -> Option<f64> {
        self.fwd_returns[company * self.dates.len() + date]
    }

    /// Count of missing signal cells.
    pub fn missing_value_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Count of defined forward returns.
    pub fn fwd_return_count(&self) -> usize {
        self.fwd_returns.iter().filter(|v| v.is_some()).count()
    }

    /// Rows with every signal and the forward return present.
    pub fn complete_row_count(&self) -> usize {
        self.complete_rows().len()
    }

    pub(crate) fn complete_rows(&self) -> Vec<(usize, usize)> {
        let mut rows = Vec::new();
        for di in 0..self.dates.len() {
            for ci in 0..self.companies.len() {
                let complete = self.fwd_return(ci, di).is_some()
                    && (0..self.signal_names.len()).all(|si| self.value(ci, di, si).is_some());
                if complete {
                    rows.push((di, ci));
                }
            }
        }
        rows
    }

    /// A copy restricted to dates within `[start, end]`. Forward returns
    /// keep the values computed against the full price history.
    pub fn restrict_dates(&self, start: NaiveDate, end: NaiveDate) -> Result<Panel, PanelError> {
        let keep: Vec<usize> =
            (0..self.dates.len()).filter(|&d| self.dates[d] >= start && self.dates[d] <= end).collect();
        if keep.len() < 2 {
            return Err(PanelError::EmptyPanel {
                reason: format!("date range {start}..{end} keeps {} dates, need at least 2", keep.len()),
            });
        }
        let n_sig = self.signal_names.len();
        let mut values = Vec::with_capacity(self.companies.len() * keep.len() * n_sig);
        let mut fwd = Vec::with_capacity(self.companies.len() * keep.len());
        for ci in 0..self.companies.len() {
            for &di in &keep {
                for si in 0..n_sig {
                    values.push(self.value(ci, di, si));
                }
                fwd.push(self.fwd_return(ci, di));
            }
        }
        Panel::from_parts(
            keep.iter().map(|&d| self.dates[d]).collect(),
            self.companies.clone(),
            self.signal_names.clone(),
            values,
            fwd,
            self.horizon,
        )
    }

    /// Complete-case cross-section at `date` over the requested columns.
    ///
    /// A company is included exactly when every requested column evaluates
    /// to a finite value and its forward return at `date` is present.
    /// Company order is the panel's lexicographic ticker order.
    pub fn cross_section(
        &self,
        date: NaiveDate,
        columns: &[Column],
    ) -> Result<CrossSection, PanelError> {
        let di = self.date_index(date).ok_or(PanelError::DateNotInPanel { date })?;
        for col in columns {
            for id in col.required_signals() {
                if self.signal_index(id).is_none() {
                    return Err(PanelError::UnknownSignal { name: id.to_string() });
                }
            }
        }

        let mut kept_companies = Vec::new();
        let mut kept_rows: Vec<Vec<f64>> = Vec::new();
        let mut kept_returns = Vec::new();
        'company: for (ci, ticker) in self.companies.iter().enumerate() {
            let Some(ret) = self.fwd_return(ci, di) else { continue };
            let lookup = |id: &str| self.signal_index(id).and_then(|si| self.value(ci, di, si));
            let mut row = Vec::with_capacity(columns.len());
            for col in columns {
                let value = match col {
                    Column::Signal(id) => lookup(id),
                    Column::Alpha(def) => def.expr.eval_with(&lookup),
                };
                match value {
                    Some(v) if v.is_finite() => row.push(v),
                    _ => continue 'company,
                }
            }
            kept_companies.push(ticker.clone());
            kept_rows.push(row);
            kept_returns.push(ret);
        }

        let needed = columns.len() + 2;
        if kept_companies.len() < needed {
            return Err(PanelError::InsufficientCrossSection {
                date,
                needed,
                got: kept_companies.len(),
            });
        }

        let n = kept_companies.len();
        let m = columns.len();
        let mut matrix = Array2::zeros((n, m));
        for (i, row) in kept_rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                matrix[[i, j]] = *v;
            }
        }
        Ok(CrossSection {
            date,
            companies: kept_companies,
            columns: columns.iter().map(|c| c.label().to_string()).collect(),
            matrix,
            returns: Array1::from_vec(kept_returns),
        })
    }

    /// Deterministic seeded sample of complete rows, rendered as a plain
    /// text table (see [`sample`] submodule).
    pub fn sample_rows(&self, k: usize, seed: u64) -> Result<String, PanelError> {
        sample::sample_rows(self, k, seed)
    }
}

/// One date's complete-case matrix: rows are companies, columns are
/// requested signals/alphas, plus the aligned forward-return vector.
/// Every entry is finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    date: NaiveDate,
    companies: Vec<String>,
    columns: Vec<String>,
    matrix: Array2<f64>,
    returns: Array1<f64>,
}

impl CrossSection {
    pub fn date(&self) -> NaiveDate {
        self.date
    }

    /// Number of companies (rows).
    pub fn len(&self) -> usize {
        self.companies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.companies.is_empty()
    }

    pub fn companies(&self) -> &[String] {
        &self.companies
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn returns(&self) -> &Array1<f64> {
        &self.returns
    }

    /// Value of a labelled column for one company row.
    pub fn value(&self, row: usize, label: &str) -> Option<f64> {
        let col = self.columns.iter().position(|c| c == label)?;
        Some(self.matrix[[row, col]])
    }

    /// One labelled column as a vector.
    pub fn column(&self, label: &str) -> Option<Vec<f64>> {
        let col = self.columns.iter().position(|c| c == label)?;
        Some(self.matrix.column(col).to_vec())
    }

    /// Builds a cross-section directly from columns, for callers that
    /// bring their own data. Entries must be finite and shapes aligned.
    pub fn from_columns(
        date: NaiveDate,
        companies: Vec<String>,
        columns: Vec<String>,
        matrix: Array2<f64>,
        returns: Array1<f64>,
    ) -> Result<Self, PanelError> {
        if matrix.nrows() != companies.len()
            || matrix.ncols() != columns.len()
            || returns.len() != companies.len()
        {
            return Err(PanelError::Invalid {
                reason: format!(
                    "cross-section shape mismatch: {} companies, {} returns, {}x{} matrix, {} columns",
                    companies.len(),
                    returns.len(),
                    matrix.nrows(),
                    matrix.ncols(),
                    columns.len()
                ),
            });
        }
        if matrix.iter().chain(returns.iter()).any(|v| !v.is_finite()) {
            return Err(PanelError::Invalid {
                reason: "cross-section entries must be finite".to_string(),
            });
        }
        Ok(CrossSection { date, companies, columns, matrix, returns })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{builtin, Column};

    fn date(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    /// 4 companies x 3 dates x 2 signals with one hole; the last date has
    /// no forward returns.
    fn toy_panel() -> Panel {
        let dates = vec![date(2016, 3, 31), date(2016, 6, 30), date(2016, 9, 30)];
        let companies =
            vec!["AAA".to_string(), "BBB".to_string(), "CCC".to_string(), "DDD".to_string()];
        let signals = vec!["PE".to_string(), "ROE".to_string()];
        // layout: [company][date][signal]
        let v = |x: f64| Some(x);
        let values = vec![
            // AAA
            v(10.0), v(5.0), v(11.0), v(6.0), v(12.0), v(7.0),
            // BBB: missing ROE at second date
            v(20.0), v(8.0), v(21.0), None, v(22.0), v(9.0),
            // CCC
            v(30.0), v(2.0), v(31.0), v(3.0), v(32.0), v(4.0),
            // DDD
            v(40.0), v(1.0), v(41.0), v(2.0), v(42.0), v(3.0),
        ];
        let fwd = vec![
            v(0.05), v(0.06), None,
            v(0.01), v(0.02), None,
            v(-0.03), v(0.04), None,
            v(0.02), v(0.01), None,
        ];
        Panel::from_parts(dates, companies, signals, values, fwd, Horizon::ThreeMonth).unwrap()
    }

    #[test]
    fn from_parts_rejects_unsorted_dates() {
        let err = Panel::from_parts(
            vec![date(2016, 6, 30), date(2016, 3, 31)],
            vec!["AAA".into(), "BBB".into()],
            vec!["PE".into()],
            vec![None; 4],
            vec![None; 4],
            Horizon::ThreeMonth,
        )
        .unwrap_err();
        assert!(matches!(err, PanelError::Invalid { .. }));
    }

    #[test]
    fn cross_section_keeps_only_complete_companies() {
        let panel = toy_panel();
        let cols = vec![Column::signal("PE"), Column::signal("ROE")];
        // all four companies complete at the first date
        let cs = panel.cross_section(date(2016, 3, 31), &cols).unwrap();
        assert_eq!(cs.companies(), ["AAA", "BBB", "CCC", "DDD"]);

        // BBB misses ROE at the second date and drops out
        let cs = panel.cross_section(date(2016, 6, 30), &[Column::signal("ROE")]).unwrap();
        assert_eq!(cs.companies(), ["AAA", "CCC", "DDD"]);
        assert_eq!(cs.returns().to_vec(), vec![0.06, 0.04, 0.01]);

        // the last date has no forward returns at all
        let err = panel.cross_section(date(2016, 9, 30), &cols).unwrap_err();
        assert!(matches!(err, PanelError::InsufficientCrossSection { needed: 4, got: 0, .. }));
    }

    #[test]
    fn cross_section_with_alpha_column_applies_domain_rules() {
        let mut panel = toy_panel();
        // set CCC's PE to zero at the first date: PVS = ROE / PE undefined
        let idx = (2 * 3 + 0) * 2 + 0;
        panel.values[idx] = Some(0.0);
        let cs = panel
            .cross_section(date(2016, 3, 31), &[Column::Alpha(builtin("PVS").unwrap())])
            .unwrap();
        assert_eq!(cs.companies(), ["AAA", "BBB", "DDD"]);
        assert_eq!(cs.columns(), ["PVS"]);
        assert_eq!(cs.value(0, "PVS"), Some(0.5));
    }

    #[test]
    fn cross_section_rejects_unknown_signal() {
        let panel = toy_panel();
        let err = panel.cross_section(date(2016, 3, 31), &[Column::signal("GM")]).unwrap_err();
        assert!(matches!(err, PanelError::UnknownSignal { .. }));
    }

    #[test]
    fn cross_section_values_are_finite() {
        let panel = toy_panel();
        let cs = panel.cross_section(date(2016, 3, 31), &[Column::signal("PE")]).unwrap();
        assert!(cs.matrix().iter().all(|v| v.is_finite()));
        assert!(cs.returns().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn restrict_dates_slices_values() {
        let panel = toy_panel();
        let cut = panel.restrict_dates(date(2016, 3, 31), date(2016, 6, 30)).unwrap();
        assert_eq!(cut.n_dates(), 2);
        assert_eq!(cut.value(0, 1, 0), Some(11.0));
        assert_eq!(cut.fwd_return(1, 1), Some(0.02));
        assert!(cut.restrict_dates(date(2016, 3, 31), date(2016, 3, 31)).is_err());
    }

    #[test]
    fn complete_rows_respect_missing_cells_and_returns() {
        let panel = toy_panel();
        // first two dates have returns; BBB incomplete at the second
        assert_eq!(panel.complete_row_count(), 7);
    }
}
