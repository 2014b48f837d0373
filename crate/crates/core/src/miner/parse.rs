//! Heuristic extraction of a candidate signal from free-form model
//! output. LLM responses are uncontracted, so an unparsable formula is a
//! first-class outcome, never an error.

use super::{MinedCandidate, ParseStatus};
use crate::dsl::parse_alpha;
use crate::signals::AliasTable;
use regex::Regex;
use std::sync::OnceLock;

fn formula_line_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // `ABBR = expression` anywhere in a line, tolerating markdown emphasis
    // or inline code markers around the abbreviation; the expression runs
    // to end of line.
    RE.get_or_init(|| {
        Regex::new(r"(?m)\b([A-Z][A-Z0-9]{1,9})[`*_]*\s*=\s*(.+?)\s*$")
            .expect("static regex compiles")
    })
}

fn name_phrase_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // `Some Title Cased Phrase (ABBR)`
    RE.get_or_init(|| {
        Regex::new(r"([A-Z][A-Za-z]+(?:[ \-][A-Za-z][A-Za-z]*)+)\s*\(\s*([A-Z][A-Z0-9]{1,9})\s*\)")
            .expect("static regex compiles")
    })
}

/// Rewrites display notation into parsable DSL text: markdown and unicode
/// operators are stripped, display names like "P/E" become canonical ids.
fn normalize_formula(raw: &str) -> String {
    let mut text = raw.trim().trim_end_matches(['.', ',', ';']).to_string();
    for (from, to) in [("·", "*"), ("×", "*"), ("÷", "/"), ("−", "-"), ("**", ""), ("`", "")] {
        text = text.replace(from, to);
    }
    // longest display names first so "P/CF" is not clipped by "P/C"
    let aliases = AliasTable::default();
    let mut pairs: Vec<(&str, &str)> = aliases.iter().collect();
    pairs.sort_by_key(|(display, _)| std::cmp::Reverse(display.len()));
    for (display, canonical) in pairs {
        text = text.replace(display, canonical);
    }
    text
}

/// Extracts the first well-formed `ABBR = expression` line of a response.
///
/// The candidate name comes from the first title-cased phrase whose
/// parenthesized abbreviation matches the formula line, falling back to
/// any named-score phrase, then to the abbreviation itself. When no line
/// parses, the first formula-like line is preserved verbatim with
/// `ParseStatus::Unparsable`.
pub fn parse_llm_response(text: &str) -> MinedCandidate {
    let mut warnings = Vec::new();
    let matches: Vec<(String, String, String)> = formula_line_re()
        .captures_iter(text)
        .map(|cap| {
            let raw_line = cap.get(0).map(|m| m.as_str().trim().to_string()).unwrap_or_default();
            (cap[1].to_string(), cap[2].to_string(), raw_line)
        })
        .collect();

    if matches.len() > 1 {
        warnings.push(format!(
            "{} formula lines found; using the first well-formed one",
            matches.len()
        ));
    }

    let mut chosen: Option<(String, String, Option<crate::dsl::AlphaExpr>)> = None;
    for (abbr, rhs, raw_line) in &matches {
        match parse_alpha(&normalize_formula(rhs)) {
            Ok(expr) => {
                chosen = Some((abbr.clone(), raw_line.clone(), Some(expr)));
                break;
            }
            Err(err) => {
                if chosen.is_none() {
                    warnings.push(format!("formula line {raw_line:?} did not parse: {err}"));
                    chosen = Some((abbr.clone(), raw_line.clone(), None));
                }
            }
        }
    }

    let (abbreviation, formula_text, expr) = match chosen {
        Some((abbr, line, Some(expr))) => (abbr, line, Some(expr)),
        Some((abbr, line, None)) => (abbr, line, None),
        None => (String::new(), String::new(), None),
    };

    let name = name_phrase_re()
        .captures_iter(text)
        .find(|cap| abbreviation.is_empty() || cap[2] == abbreviation)
        .or_else(|| name_phrase_re().captures_iter(text).next())
        .map(|cap| cap[1].trim().to_string())
        .unwrap_or_else(|| {
            if abbreviation.is_empty() {
                "unknown".to_string()
            } else {
                abbreviation.clone()
            }
        });
    let abbreviation = if abbreviation.is_empty() { "unknown".to_string() } else { abbreviation };

    let parse_status = if expr.is_some() { ParseStatus::Parsed } else { ParseStatus::Unparsable };
    MinedCandidate {
        name,
        abbreviation,
        formula_text,
        expr,
        reasoning_text: text.to_string(),
        parse_status,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::render_alpha;

    #[test]
    fn display_notation_normalizes_to_canonical_ids() {
        assert_eq!(normalize_formula("(ROE · 1/(P/E) · log(SPS))."), "(ROE * 1/(PE) * log(SPS))");
    }

    #[test]
    fn parses_formula_with_markdown_emphasis() {
        let text = "I propose the Quality Momentum Blend (QMB).\n\n**QMB** = ROE * GM / PB\n\nReasoning follows.";
        let candidate = parse_llm_response(text);
        assert_eq!(candidate.parse_status, ParseStatus::Parsed);
        assert_eq!(candidate.abbreviation, "QMB");
        assert_eq!(candidate.name, "Quality Momentum Blend");
        assert_eq!(render_alpha(&candidate.expr.unwrap()), "ROE * GM / PB");
    }

    #[test]
    fn truncated_formula_is_unparsable_but_preserved() {
        let candidate = parse_llm_response("Here it is:\nIQS = ROE /\nthat's all");
        assert_eq!(candidate.parse_status, ParseStatus::Unparsable);
        assert_eq!(candidate.abbreviation, "IQS");
        assert_eq!(candidate.formula_text, "IQS = ROE /");
        assert!(candidate.expr.is_none());
    }

    #[test]
    fn first_well_formed_line_wins_with_warning() {
        let text = "Alpha Score (AS)\nAS = ROE +\nBS = ROE + GM\nCS = PE * PB\n";
        let candidate = parse_llm_response(text);
        assert_eq!(candidate.abbreviation, "BS");
        assert_eq!(candidate.parse_status, ParseStatus::Parsed);
        assert!(candidate.warnings.iter().any(|w| w.contains("formula lines")));
    }

    #[test]
    fn no_formula_line_yields_unparsable_candidate() {
        let candidate = parse_llm_response("I could not produce a formula this time.");
        assert_eq!(candidate.parse_status, ParseStatus::Unparsable);
        assert_eq!(candidate.formula_text, "");
        assert_eq!(candidate.abbreviation, "unknown");
        assert_eq!(candidate.reasoning_text, "I could not produce a formula this time.");
    }
}
