//! Deterministic reporting: correlation heatmaps and adjusted-R² box
//! plots as self-contained SVG, each with a CSV sidecar carrying every
//! plotted number at full precision. Identical specs render to identical
//! bytes (no timestamps, fixed float formatting).

mod boxplot;
mod heatmap;

pub use boxplot::{emit_boxplot, BoxplotSpec};
pub use heatmap::{emit_heatmap, ColorScale, HeatmapSpec};

use crate::fmb::{FmbComparison, BASELINE_MODEL};
use crate::metrics::{CorrReport, RETURN_LABEL};

/// Reporting failures.
#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("invalid plot spec: {0}")]
    InvalidSpec(String),
    #[error("I/O error writing {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub(crate) fn write_file(path: &std::path::Path, contents: &str) -> Result<(), ReportError> {
    std::fs::write(path, contents)
        .map_err(|source| ReportError::Io { path: path.display().to_string(), source })
}

/// Sibling CSV path for an SVG output.
pub(crate) fn csv_sibling(path: &std::path::Path) -> std::path::PathBuf {
    path.with_extension("csv")
}

/// Deterministic markdown summary: averaged return correlations per
/// signal and per-model adjusted-R² medians with deltas to the baseline.
pub fn summary_markdown(corr: &CorrReport, cmp: &FmbComparison) -> String {
    let mut out = String::from("# Signal evaluation summary\n\n");

    out.push_str("## Average Spearman correlation with forward return\n\n");
    out.push_str("| signal | avg rho | |avg rho| |\n|---|---|---|\n");
    for label in &corr.labels {
        if label == RETURN_LABEL {
            continue;
        }
        match corr.avg_return_corr(label) {
            Some(rho) => out.push_str(&format!(
                "| {label} | {rho:.4} | {:.4} |\n",
                rho.abs()
            )),
            None => out.push_str(&format!("| {label} | undefined | undefined |\n")),
        }
    }

    out.push_str("\n## Fama-MacBeth step-2 adjusted R-squared by model\n\n");
    out.push_str("| model | median | q1 | q3 | dates | delta vs baseline |\n|---|---|---|---|---|---|\n");
    let baseline_median = cmp.summary_for(BASELINE_MODEL).map(|s| s.median);
    for s in &cmp.summary {
        let delta = match (s.model.as_str(), baseline_median) {
            (m, Some(base)) if m != BASELINE_MODEL => format!("{:+.4}", s.median - base),
            _ => "—".to_string(),
        };
        out.push_str(&format!(
            "| {} | {:.4} | {:.4} | {:.4} | {} | {} |\n",
            s.model, s.median, s.q1, s.q3, s.n_dates, delta
        ));
    }

    if !cmp.failed.is_empty() {
        out.push_str("\n## Failed candidate models\n\n");
        for (abbr, reason) in &cmp.failed {
            out.push_str(&format!("- {abbr}: {reason}\n"));
        }
    }
    out
}
