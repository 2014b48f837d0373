//! SVG box plot of per-model adjusted R-squared distributions.

use super::{csv_sibling, write_file, ReportError};
use crate::fmb::{FmbComparison, ModelSummary};
use std::path::Path;

/// Box plot description. Model order is drawing order left to right;
/// [`BoxplotSpec::from_comparison`] places candidates first and the
/// baseline last.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxplotSpec {
    pub title: String,
    pub y_label: String,
    pub models: Vec<ModelSummary>,
}

impl BoxplotSpec {
    pub fn from_comparison(title: &str, cmp: &FmbComparison) -> Self {
        BoxplotSpec {
            title: title.to_string(),
            y_label: "adjusted R-squared".to_string(),
            models: cmp.summary.clone(),
        }
    }

    fn validate(&self) -> Result<(), ReportError> {
        if self.models.is_empty() {
            return Err(ReportError::InvalidSpec("no models to plot".to_string()));
        }
        for m in &self.models {
            let ordered = m.whisker_lo <= m.q1
                && m.q1 <= m.median
                && m.median <= m.q3
                && m.q3 <= m.whisker_hi;
            if !ordered {
                return Err(ReportError::InvalidSpec(format!(
                    "model {}: box statistics out of order (lo {} q1 {} median {} q3 {} hi {})",
                    m.model, m.whisker_lo, m.q1, m.median, m.q3, m.whisker_hi
                )));
            }
        }
        Ok(())
    }
}

const SLOT: f64 = 72.0;
const BOX_W: f64 = 36.0;
const LEFT: f64 = 72.0;
const TOP: f64 = 48.0;
const PLOT_H: f64 = 300.0;
const BOTTOM: f64 = 64.0;
const MEDIAN_COLOR: &str = "#ff7f0e";
const BOX_COLOR: &str = "#47a3ff";

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn render_svg(spec: &BoxplotSpec) -> String {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for m in &spec.models {
        lo = lo.min(m.whisker_lo);
        hi = hi.max(m.whisker_hi);
        for o in &m.outliers {
            lo = lo.min(*o);
            hi = hi.max(*o);
        }
    }
    let pad = if hi > lo { (hi - lo) * 0.08 } else { 0.5 };
    let (lo, hi) = (lo - pad, hi + pad);
    let y_of = |v: f64| TOP + PLOT_H - (v - lo) / (hi - lo) * PLOT_H;

    let width = LEFT + spec.models.len() as f64 * SLOT + 24.0;
    let height = TOP + PLOT_H + BOTTOM;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n"
    ));
    svg.push_str("<style>text { font-family: sans-serif; }</style>\n");
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{width:.0}\" height=\"{height:.0}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{LEFT:.1}\" y=\"24\" font-size=\"15\" font-weight=\"bold\">{}</text>\n",
        xml_escape(&spec.title)
    ));
    // y axis with 5 ticks
    svg.push_str(&format!(
        "<line x1=\"{LEFT:.1}\" y1=\"{TOP:.1}\" x2=\"{LEFT:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        TOP + PLOT_H
    ));
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let y = y_of(v);
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{LEFT:.1}\" y2=\"{y:.1}\" stroke=\"black\"/>\n",
            LEFT - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{v:.3}</text>\n",
            LEFT - 8.0,
            y + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" font-size=\"12\" transform=\"rotate(-90 16 {:.1})\" \
         text-anchor=\"middle\">{}</text>\n",
        TOP + PLOT_H / 2.0,
        TOP + PLOT_H / 2.0,
        xml_escape(&spec.y_label)
    ));

    for (idx, m) in spec.models.iter().enumerate() {
        let cx = LEFT + (idx as f64 + 0.5) * SLOT;
        let x0 = cx - BOX_W / 2.0;
        let (yq1, yq3) = (y_of(m.q1), y_of(m.q3));
        let (ylo, yhi) = (y_of(m.whisker_lo), y_of(m.whisker_hi));
        let ymed = y_of(m.median);
        // whisker stems and caps
        svg.push_str(&format!(
            "<line x1=\"{cx:.1}\" y1=\"{yhi:.1}\" x2=\"{cx:.1}\" y2=\"{yq3:.1}\" stroke=\"black\"/>\n"
        ));
        svg.push_str(&format!(
            "<line x1=\"{cx:.1}\" y1=\"{yq1:.1}\" x2=\"{cx:.1}\" y2=\"{ylo:.1}\" stroke=\"black\"/>\n"
        ));
        for y in [ylo, yhi] {
            svg.push_str(&format!(
                "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"black\"/>\n",
                cx - BOX_W / 4.0,
                cx + BOX_W / 4.0
            ));
        }
        // box (degenerate height renders as a flat box)
        svg.push_str(&format!(
            "<rect x=\"{x0:.1}\" y=\"{yq3:.1}\" width=\"{BOX_W:.1}\" height=\"{:.1}\" \
             fill=\"{BOX_COLOR}\" fill-opacity=\"0.45\" stroke=\"black\"/>\n",
            (yq1 - yq3).max(0.0)
        ));
        // median marked in orange
        svg.push_str(&format!(
            "<line x1=\"{x0:.1}\" y1=\"{ymed:.1}\" x2=\"{:.1}\" y2=\"{ymed:.1}\" \
             stroke=\"{MEDIAN_COLOR}\" stroke-width=\"2\"/>\n",
            x0 + BOX_W
        ));
        for o in &m.outliers {
            svg.push_str(&format!(
                "<circle cx=\"{cx:.1}\" cy=\"{:.1}\" r=\"2.5\" fill=\"none\" stroke=\"black\"/>\n",
                y_of(*o)
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{cx:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            TOP + PLOT_H + 20.0,
            xml_escape(&m.model)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn render_csv(spec: &BoxplotSpec) -> String {
    let mut out = String::from("model,median,q1,q3,whisker_lo,whisker_hi,outliers\n");
    for m in &spec.models {
        let outliers = m.outliers.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(";");
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            m.model, m.median, m.q1, m.q3, m.whisker_lo, m.whisker_hi, outliers
        ));
    }
    out
}

/// Writes the box plot SVG at `svg_path` and its statistics CSV alongside
/// it. Validates the box statistics first; impossible statistics (median
/// outside the box) are an error.
pub fn emit_boxplot(spec: &BoxplotSpec, svg_path: &Path) -> Result<(), ReportError> {
    spec.validate()?;
    write_file(svg_path, &render_svg(spec))?;
    write_file(&csv_sibling(svg_path), &render_csv(spec))
}
