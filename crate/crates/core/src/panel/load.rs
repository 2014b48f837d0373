//! CSV ingestion: signal files joined with a price file into a [`Panel`].
//!
//! Signal files carry `ticker,date,<signal columns>`; the price file
//! carries `ticker,date,adj_close`. Dates are ISO-8601. An empty cell is
//! missing; an unparseable numeric cell is recorded as missing, not an
//! error. Forward returns are fractional price changes over the horizon:
//! `(P_{t+h} - P_t) / P_t`.

use super::{Horizon, Panel, PanelError};
use crate::signals::AliasTable;
use chrono::{Months, NaiveDate};
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

/// Period-end dates and price dates rarely coincide with trading days, so
/// price lookups snap to the nearest observation within this many days.
pub const PRICE_SNAP_DAYS: i64 = 7;

/// Ingestion options.
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub horizon: Horizon,
    pub aliases: AliasTable,
}

impl LoadOptions {
    pub fn new(horizon: Horizon) -> Self {
        LoadOptions { horizon, aliases: AliasTable::default() }
    }
}

/// Ingestion tallies for manifests and logs.
#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct LoadSummary {
    /// Data rows read from signal files.
    pub signal_rows: usize,
    /// Data rows read from the price file.
    pub price_rows: usize,
    /// Signal cells that failed numeric parsing (recorded as missing).
    pub unparseable_cells: usize,
    /// Signal cells that were empty.
    pub empty_cells: usize,
    /// Rows skipped entirely (bad date or empty ticker).
    pub skipped_rows: usize,
    /// Forward returns that could be aligned.
    pub fwd_returns_defined: usize,
}

/// Loads signal files and the price file into a validated panel.
pub fn load_panel(
    signal_files: &[PathBuf],
    price_file: &Path,
    opts: &LoadOptions,
) -> Result<(Panel, LoadSummary), PanelError> {
    let mut summary = LoadSummary::default();

    // (ticker, date) -> canonical signal -> value
    let mut cells: BTreeMap<(String, NaiveDate), BTreeMap<String, f64>> = BTreeMap::new();
    let mut signal_set: BTreeSet<String> = BTreeSet::new();

    for file in signal_files {
        read_signal_file(file, opts, &mut cells, &mut signal_set, &mut summary)?;
    }

    let mut dates: Vec<NaiveDate> = cells.keys().map(|(_, d)| *d).collect();
    dates.sort_unstable();
    dates.dedup();
    let mut companies: Vec<String> = cells.keys().map(|(t, _)| t.clone()).collect();
    companies.sort_unstable();
    companies.dedup();

    if dates.len() < 2 || companies.len() < 2 {
        return Err(PanelError::EmptyPanel {
            reason: format!(
                "need at least 2 dates and 2 companies, found {} date(s) and {} company(ies)",
                dates.len(),
                companies.len()
            ),
        });
    }

    // Keep the canonical ordering for whichever signals are present.
    let signal_names: Vec<String> = crate::signals::CANONICAL
        .iter()
        .filter(|c| signal_set.contains(**c))
        .map(|c| c.to_string())
        .collect();

    let prices = read_price_file(price_file, &mut summary)?;

    let n_sig = signal_names.len();
    let mut values = vec![None; companies.len() * dates.len() * n_sig];
    let mut fwd = vec![None; companies.len() * dates.len()];
    for (ci, ticker) in companies.iter().enumerate() {
        let series = prices.get(ticker.as_str());
        for (di, date) in dates.iter().enumerate() {
            if let Some(row) = cells.get(&(ticker.clone(), *date)) {
                for (si, name) in signal_names.iter().enumerate() {
                    values[(ci * dates.len() + di) * n_sig + si] = row.get(name).copied();
                }
            }
            if let Some(series) = series {
                let ret = forward_return(series, &dates, di, opts.horizon);
                if ret.is_some() {
                    summary.fwd_returns_defined += 1;
                }
                fwd[ci * dates.len() + di] = ret;
            }
        }
    }

    let panel = Panel::from_parts(dates, companies, signal_names, values, fwd, opts.horizon)?;
    Ok((panel, summary))
}

fn read_signal_file(
    file: &Path,
    opts: &LoadOptions,
    cells: &mut BTreeMap<(String, NaiveDate), BTreeMap<String, f64>>,
    signal_set: &mut BTreeSet<String>,
    summary: &mut LoadSummary,
) -> Result<(), PanelError> {
    let file_name = file.display().to_string();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(file)?;
    let headers = reader.headers()?.clone();

    let mut ticker_col = None;
    let mut date_col = None;
    let mut signal_cols: Vec<(usize, String)> = Vec::new();
    for (idx, header) in headers.iter().enumerate() {
        let lower = header.trim().to_ascii_lowercase();
        if lower == "ticker" {
            ticker_col = Some(idx);
        } else if lower == "date" {
            date_col = Some(idx);
        } else {
            let canonical = opts.aliases.resolve(header).ok_or_else(|| PanelError::Schema {
                file: file_name.clone(),
                column: header.to_string(),
            })?;
            signal_cols.push((idx, canonical.to_string()));
            signal_set.insert(canonical.to_string());
        }
    }
    let ticker_col = ticker_col.ok_or_else(|| PanelError::MissingColumn {
        file: file_name.clone(),
        column: "ticker".to_string(),
    })?;
    let date_col = date_col.ok_or_else(|| PanelError::MissingColumn {
        file: file_name.clone(),
        column: "date".to_string(),
    })?;

    for record in reader.records() {
        let record = record?;
        summary.signal_rows += 1;
        let ticker = record.get(ticker_col).unwrap_or("").trim().to_ascii_uppercase();
        let date = record.get(date_col).unwrap_or("").trim().parse::<NaiveDate>();
        let (ticker, date) = match (ticker.is_empty(), date) {
            (false, Ok(d)) => (ticker, d),
            _ => {
                summary.skipped_rows += 1;
                continue;
            }
        };
        let row = cells.entry((ticker, date)).or_default();
        for (idx, canonical) in &signal_cols {
            let cell = record.get(*idx).unwrap_or("").trim();
            if cell.is_empty() {
                summary.empty_cells += 1;
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    // Later files/rows override earlier ones.
                    row.insert(canonical.clone(), v);
                }
                _ => {
                    summary.unparseable_cells += 1;
                }
            }
        }
    }
    Ok(())
}

type PriceSeries = Vec<(NaiveDate, f64)>;

fn read_price_file(
    file: &Path,
    summary: &mut LoadSummary,
) -> Result<BTreeMap<String, PriceSeries>, PanelError> {
    let file_name = file.display().to_string();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(file)?;
    let headers = reader.headers()?.clone();

    let find = |name: &str| -> Result<usize, PanelError> {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| PanelError::MissingColumn {
                file: file_name.clone(),
                column: name.to_string(),
            })
    };
    let ticker_col = find("ticker")?;
    let date_col = find("date")?;
    let price_col = find("adj_close")?;

    let mut prices: BTreeMap<String, PriceSeries> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        summary.price_rows += 1;
        let ticker = record.get(ticker_col).unwrap_or("").trim().to_ascii_uppercase();
        let date = record.get(date_col).unwrap_or("").trim().parse::<NaiveDate>();
        let price = record.get(price_col).unwrap_or("").trim().parse::<f64>();
        match (ticker.is_empty(), date, price) {
            (false, Ok(d), Ok(p)) if p.is_finite() => {
                prices.entry(ticker).or_default().push((d, p));
            }
            _ => {
                summary.skipped_rows += 1;
            }
        }
    }
    for series in prices.values_mut() {
        series.sort_by_key(|(d, _)| *d);
        // keep the last observation on duplicate dates
        series.dedup_by(|later, earlier| {
            if later.0 == earlier.0 {
                earlier.1 = later.1;
                true
            } else {
                false
            }
        });
    }
    Ok(prices)
}

/// Nearest price observation within [`PRICE_SNAP_DAYS`] of `target`;
/// ties break toward the earlier observation.
fn price_at(series: &PriceSeries, target: NaiveDate) -> Option<f64> {
    let idx = series.partition_point(|(d, _)| *d < target);
    let mut best: Option<(i64, NaiveDate, f64)> = None;
    for &(d, p) in series[idx.saturating_sub(1)..(idx + 1).min(series.len())].iter() {
        let dist = (d - target).num_days().abs();
        if dist > PRICE_SNAP_DAYS {
            continue;
        }
        let better = match best {
            None => true,
            Some((bd, bdate, _)) => dist < bd || (dist == bd && d < bdate),
        };
        if better {
            best = Some((dist, d, p));
        }
    }
    best.map(|(_, _, p)| p)
}

fn forward_return(
    series: &PriceSeries,
    dates: &[NaiveDate],
    date_idx: usize,
    horizon: Horizon,
) -> Option<f64> {
    let t = dates[date_idx];
    let target = match horizon {
        Horizon::ThreeMonth => *dates.get(date_idx + 1)?,
        Horizon::OneMonth => t.checked_add_months(Months::new(1))?,
    };
    let p_t = price_at(series, t)?;
    let p_h = price_at(series, target)?;
    if p_t == 0.0 {
        return None;
    }
    let ret = (p_h - p_t) / p_t;
    ret.is_finite().then_some(ret)
}
