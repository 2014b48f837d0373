//! SVG correlation heatmap with annotated cells.

use super::{csv_sibling, write_file, ReportError};
use crate::metrics::{CorrMatrix, CorrReport};
use std::path::Path;

/// Cell color mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorScale {
    /// Fixed [-1, 1] bounds so heatmaps are comparable across datasets.
    Anchored,
    /// Bounds from the data's own min/max.
    DataDriven,
}

/// Heatmap description; matrices come from [`CorrReport::average`].
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapSpec {
    pub title: String,
    pub matrix: CorrMatrix,
    pub scale: ColorScale,
    /// Decimal places for cell annotations.
    pub precision: usize,
}

impl HeatmapSpec {
    pub fn from_report(title: &str, report: &CorrReport) -> Self {
        HeatmapSpec {
            title: title.to_string(),
            matrix: report.average.clone(),
            scale: ColorScale::Anchored,
            precision: 2,
        }
    }
}

const CELL: f64 = 48.0;
const LEFT: f64 = 110.0;
const TOP: f64 = 96.0;
const UNDEFINED_FILL: &str = "#cccccc";

/// Diverging blue -> white -> red, anchored at the scale bounds.
fn cell_color(value: f64, lo: f64, hi: f64) -> String {
    let t = if hi > lo { ((value - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.5 };
    let lerp = |a: f64, b: f64, t: f64| (a + (b - a) * t).round() as u8;
    let (r, g, b) = if t < 0.5 {
        let u = t * 2.0;
        (lerp(33.0, 247.0, u), lerp(102.0, 247.0, u), lerp(172.0, 247.0, u))
    } else {
        let u = (t - 0.5) * 2.0;
        (lerp(247.0, 178.0, u), lerp(247.0, 24.0, u), lerp(247.0, 43.0, u))
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn render_svg(spec: &HeatmapSpec) -> String {
    let n = spec.matrix.n();
    let labels = spec.matrix.labels();
    let (lo, hi) = match spec.scale {
        ColorScale::Anchored => (-1.0, 1.0),
        ColorScale::DataDriven => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..n {
                for j in 0..n {
                    if let Some(v) = spec.matrix.get(i, j) {
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
            }
            if lo < hi {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        }
    };

    let width = LEFT + n as f64 * CELL + 24.0;
    let height = TOP + n as f64 * CELL + 24.0;
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
        "<text x=\"{:.1}\" y=\"24\" font-size=\"15\" font-weight=\"bold\">{}</text>\n",
        LEFT,
        xml_escape(&spec.title)
    ));

    // column labels, rotated
    for (j, label) in labels.iter().enumerate() {
        let x = LEFT + (j as f64 + 0.5) * CELL;
        svg.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"start\" \
             transform=\"rotate(-45 {x:.1} {:.1})\">{}</text>\n",
            TOP - 8.0,
            TOP - 8.0,
            xml_escape(label)
        ));
    }
    // row labels
    for (i, label) in labels.iter().enumerate() {
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            LEFT - 8.0,
            TOP + (i as f64 + 0.5) * CELL + 4.0,
            xml_escape(label)
        ));
    }
    // cells with annotations
    for i in 0..n {
        for j in 0..n {
            let x = LEFT + j as f64 * CELL;
            let y = TOP + i as f64 * CELL;
            match spec.matrix.get(i, j) {
                Some(v) => {
                    let fill = cell_color(v, lo, hi);
                    // flip annotation to white on saturated cells
                    let t = ((v - lo) / (hi - lo) - 0.5).abs();
                    let text_fill = if t > 0.35 { "white" } else { "black" };
                    svg.push_str(&format!(
                        "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{CELL:.1}\" height=\"{CELL:.1}\" \
                         fill=\"{fill}\" stroke=\"white\"/>\n"
                    ));
                    svg.push_str(&format!(
                        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\" \
                         fill=\"{text_fill}\">{v:.prec$}</text>\n",
                        x + CELL / 2.0,
                        y + CELL / 2.0 + 4.0,
                        prec = spec.precision,
                    ));
                }
                None => {
                    svg.push_str(&format!(
                        "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{CELL:.1}\" height=\"{CELL:.1}\" \
                         fill=\"{UNDEFINED_FILL}\" stroke=\"white\"/>\n"
                    ));
                }
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn render_csv(matrix: &CorrMatrix) -> String {
    let mut out = String::from("label");
    for label in matrix.labels() {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    for (i, label) in matrix.labels().iter().enumerate() {
        out.push_str(label);
        for j in 0..matrix.n() {
            out.push(',');
            if let Some(v) = matrix.get(i, j) {
                out.push_str(&format!("{v}"));
            }
        }
        out.push('\n');
    }
    out
}

/// Writes the heatmap SVG at `svg_path` and the matrix CSV alongside it
/// (same stem, `.csv` extension). Deterministic bytes for identical specs.
pub fn emit_heatmap(spec: &HeatmapSpec, svg_path: &Path) -> Result<(), ReportError> {
    if spec.matrix.n() == 0 {
        return Err(ReportError::InvalidSpec("heatmap matrix is empty".to_string()));
    }
    write_file(svg_path, &render_svg(spec))?;
    write_file(&csv_sibling(svg_path), &render_csv(&spec.matrix))
}
