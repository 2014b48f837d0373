//! Expression DSL for formulaic alphas.
//!
//! An alpha is an arithmetic expression over canonical signal identifiers:
//!
//! ```text
//! expr    := term  (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | primary
//! primary := NUMBER | IDENT | '[' display-name ']' | 'log' '(' expr ')' | '(' expr ')'
//! ```
//!
//! Operators are left-associative; unary minus and `log` bind tightest.
//! Identifiers must resolve to canonical signal ids; display names with
//! characters that would be ambiguous in a formula (like "P/E", where `/`
//! reads as division) are written bracketed: `[P/E]`.
//!
//! `log` is the natural logarithm. Evaluation is total per company:
//! division by zero, log of a non-positive value, or any non-finite
//! intermediate yields an absent entry instead of an error, matching
//! complete-case assembly downstream.

mod parser;

pub use parser::{parse_alpha, parse_alpha_with};

use crate::panel::CrossSection;
use crate::signals::AliasTable;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// AST of a formulaic alpha.
///
/// `Const` holds a non-negative literal when produced by the parser
/// (negative literals parse as `Neg(Const(..))`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AlphaExpr {
    Const(f64),
    Signal(String),
    Neg(Box<AlphaExpr>),
    Add(Box<AlphaExpr>, Box<AlphaExpr>),
    Sub(Box<AlphaExpr>, Box<AlphaExpr>),
    Mul(Box<AlphaExpr>, Box<AlphaExpr>),
    Div(Box<AlphaExpr>, Box<AlphaExpr>),
    Log(Box<AlphaExpr>),
}

/// Where an alpha definition came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Builtin,
    UserSupplied,
    Mined,
}

/// A named alpha: display name, unique abbreviation, and expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaDef {
    pub name: String,
    pub abbreviation: String,
    pub expr: AlphaExpr,
    pub provenance: Provenance,
}

impl AlphaDef {
    pub fn new(name: &str, abbreviation: &str, expr: AlphaExpr, provenance: Provenance) -> Self {
        AlphaDef {
            name: name.to_string(),
            abbreviation: abbreviation.to_string(),
            expr,
            provenance,
        }
    }

    /// Formula text for display and registry files.
    pub fn formula(&self) -> String {
        render_alpha(&self.expr)
    }
}

/// A panel column request: either a raw signal or an evaluated alpha.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Signal(String),
    Alpha(AlphaDef),
}

impl Column {
    pub fn signal(id: &str) -> Self {
        Column::Signal(id.to_string())
    }

    /// Column label used in matrices, reports, and CSV output.
    pub fn label(&self) -> &str {
        match self {
            Column::Signal(id) => id,
            Column::Alpha(def) => &def.abbreviation,
        }
    }

    /// Canonical signal ids this column reads from the panel.
    pub fn required_signals(&self) -> BTreeSet<&str> {
        match self {
            Column::Signal(id) => std::iter::once(id.as_str()).collect(),
            Column::Alpha(def) => def.expr.signals(),
        }
    }
}

/// Errors from parsing or evaluating alpha expressions.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DslError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier {name:?} at position {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("signal {name:?} is not a column of the cross-section")]
    UnknownSignal { name: String },
}

impl AlphaExpr {
    /// The set of signal identifiers referenced by this expression.
    pub fn signals(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_signals(&mut out);
        out
    }

    fn collect_signals<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            AlphaExpr::Const(_) => {}
            AlphaExpr::Signal(id) => {
                out.insert(id.as_str());
            }
            AlphaExpr::Neg(e) | AlphaExpr::Log(e) => e.collect_signals(out),
            AlphaExpr::Add(l, r)
            | AlphaExpr::Sub(l, r)
            | AlphaExpr::Mul(l, r)
            | AlphaExpr::Div(l, r) => {
                l.collect_signals(out);
                r.collect_signals(out);
            }
        }
    }

    /// Evaluates against a per-signal lookup. Returns `None` when a signal
    /// is absent or any intermediate is non-finite (division by zero, log
    /// of a non-positive value, overflow).
    pub fn eval_with<F>(&self, lookup: &F) -> Option<f64>
    where
        F: Fn(&str) -> Option<f64>,
    {
        let value = match self {
            AlphaExpr::Const(c) => *c,
            AlphaExpr::Signal(id) => lookup(id)?,
            AlphaExpr::Neg(e) => -e.eval_with(lookup)?,
            AlphaExpr::Add(l, r) => l.eval_with(lookup)? + r.eval_with(lookup)?,
            AlphaExpr::Sub(l, r) => l.eval_with(lookup)? - r.eval_with(lookup)?,
            AlphaExpr::Mul(l, r) => l.eval_with(lookup)? * r.eval_with(lookup)?,
            AlphaExpr::Div(l, r) => l.eval_with(lookup)? / r.eval_with(lookup)?,
            AlphaExpr::Log(e) => e.eval_with(lookup)?.ln(),
        };
        value.is_finite().then_some(value)
    }
}

impl fmt::Display for AlphaExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_alpha(self))
    }
}

/// Evaluates an alpha over every company of a cross-section.
///
/// Entries are `None` where the expression hits a domain violation for
/// that company. Errors only when the expression references a signal that
/// is not a column of `cs`.
pub fn eval_alpha(expr: &AlphaExpr, cs: &CrossSection) -> Result<Vec<Option<f64>>, DslError> {
    for id in expr.signals() {
        if !cs.columns().iter().any(|c| c == id) {
            return Err(DslError::UnknownSignal { name: id.to_string() });
        }
    }
    Ok((0..cs.len())
        .map(|row| expr.eval_with(&|id| cs.value(row, id)))
        .collect())
}

/// Renders an expression to formula text; `parse_alpha(render_alpha(e))`
/// is structurally equal to `e`.
pub fn render_alpha(expr: &AlphaExpr) -> String {
    let mut out = String::new();
    write_expr(expr, &mut out);
    out
}

fn precedence(expr: &AlphaExpr) -> u8 {
    match expr {
        AlphaExpr::Add(..) | AlphaExpr::Sub(..) => 1,
        AlphaExpr::Mul(..) | AlphaExpr::Div(..) => 2,
        AlphaExpr::Neg(..) => 3,
        AlphaExpr::Const(_) | AlphaExpr::Signal(_) | AlphaExpr::Log(..) => 4,
    }
}

fn write_expr(expr: &AlphaExpr, out: &mut String) {
    match expr {
        AlphaExpr::Const(c) => {
            out.push_str(&format!("{c}"));
        }
        AlphaExpr::Signal(id) => {
            let ident_shaped = !id.is_empty()
                && id.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if ident_shaped {
                out.push_str(id);
            } else {
                out.push('[');
                out.push_str(id);
                out.push(']');
            }
        }
        AlphaExpr::Neg(e) => {
            out.push('-');
            write_child(e, 3, out);
        }
        AlphaExpr::Add(l, r) => write_binary(l, r, " + ", 1, out),
        AlphaExpr::Sub(l, r) => write_binary(l, r, " - ", 1, out),
        AlphaExpr::Mul(l, r) => write_binary(l, r, " * ", 2, out),
        AlphaExpr::Div(l, r) => write_binary(l, r, " / ", 2, out),
        AlphaExpr::Log(e) => {
            out.push_str("log(");
            write_expr(e, out);
            out.push(')');
        }
    }
}

fn write_binary(l: &AlphaExpr, r: &AlphaExpr, op: &str, prec: u8, out: &mut String) {
    // Left-associative grammar: the left child may share this precedence
    // level bare; the right child needs parentheses at the same level.
    if precedence(l) < prec {
        out.push('(');
        write_expr(l, out);
        out.push(')');
    } else {
        write_expr(l, out);
    }
    out.push_str(op);
    if precedence(r) <= prec {
        out.push('(');
        write_expr(r, out);
        out.push(')');
    } else {
        write_expr(r, out);
    }
}

fn write_child(e: &AlphaExpr, min_prec: u8, out: &mut String) {
    if precedence(e) < min_prec {
        out.push('(');
        write_expr(e, out);
        out.push(')');
    } else {
        write_expr(e, out);
    }
}

/// The six generated signals shipped as builtins.
pub fn builtin_alphas() -> Vec<AlphaDef> {
    // RAPS divides by a constant beta of 2 rather than a per-company
    // market beta.
    [
        ("Profitable Valuation Score", "PVS", "ROE / PE"),
        ("Risk-Adjusted Performance Score", "RAPS", "ROE / (PE * 2)"),
        ("Efficiency Value Composite", "EVC", "(1 / ROA) * (1 / EBITDA) * (1 / PCF)"),
        ("Valuation Efficiency Composite Score", "VEC", "(PE + ROE + FCF) / 3"),
        ("Profitability Leverage Factor", "PLF", "(ROE * GM) / PE"),
        ("Investment Quality Score", "IQS", "ROE * (1 / PE) * (1 / PB) * log(SPS)"),
    ]
    .into_iter()
    .map(|(name, abbr, formula)| {
        let expr = parse_alpha(formula).expect("builtin formula parses");
        AlphaDef::new(name, abbr, expr, Provenance::Builtin)
    })
    .collect()
}

/// Looks up a builtin by abbreviation.
pub fn builtin(abbreviation: &str) -> Option<AlphaDef> {
    builtin_alphas().into_iter().find(|d| d.abbreviation == abbreviation)
}

pub(crate) fn default_aliases() -> AliasTable {
    AliasTable::default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(id: &str) -> AlphaExpr {
        AlphaExpr::Signal(id.to_string())
    }

    #[test]
    fn pvs_parses_to_expected_tree() {
        let expr = parse_alpha("ROE / PE").unwrap();
        assert_eq!(expr, AlphaExpr::Div(Box::new(sig("ROE")), Box::new(sig("PE"))));
    }

    #[test]
    fn iqs_parses_with_log_chain() {
        let expr = parse_alpha("ROE * (1/PE) * (1/PB) * log(SPS)").unwrap();
        let expected = AlphaExpr::Mul(
            Box::new(AlphaExpr::Mul(
                Box::new(AlphaExpr::Mul(
                    Box::new(sig("ROE")),
                    Box::new(AlphaExpr::Div(
                        Box::new(AlphaExpr::Const(1.0)),
                        Box::new(sig("PE")),
                    )),
                )),
                Box::new(AlphaExpr::Div(Box::new(AlphaExpr::Const(1.0)), Box::new(sig("PB")))),
            )),
            Box::new(AlphaExpr::Log(Box::new(sig("SPS")))),
        );
        assert_eq!(expr, expected);
    }

    #[test]
    fn unbalanced_paren_is_a_syntax_error() {
        match parse_alpha("(PE + ROE") {
            Err(DslError::Syntax { position, .. }) => assert_eq!(position, 9),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_is_named() {
        match parse_alpha("ROE / XYZ") {
            Err(DslError::UnknownIdentifier { name, position }) => {
                assert_eq!(name, "XYZ");
                assert_eq!(position, 6);
            }
            other => panic!("expected unknown identifier, got {other:?}"),
        }
    }

    #[test]
    fn bracketed_display_names_resolve() {
        let expr = parse_alpha("ROE / [P/E]").unwrap();
        assert_eq!(expr, AlphaExpr::Div(Box::new(sig("ROE")), Box::new(sig("PE"))));
    }

    #[test]
    fn eval_handles_domain_violations_per_entry() {
        let env = |vals: &'static [(&'static str, f64)]| {
            move |id: &str| vals.iter().find(|(k, _)| *k == id).map(|(_, v)| *v)
        };
        let pvs = parse_alpha("ROE / PE").unwrap();
        assert_eq!(pvs.eval_with(&env(&[("ROE", 10.0), ("PE", 5.0)])), Some(2.0));
        assert_eq!(pvs.eval_with(&env(&[("ROE", 10.0), ("PE", 0.0)])), None);

        let log = parse_alpha("log(SPS)").unwrap();
        assert_eq!(log.eval_with(&env(&[("SPS", 1.0)])), Some(0.0));
        assert_eq!(log.eval_with(&env(&[("SPS", 0.0)])), None);
        assert_eq!(log.eval_with(&env(&[("SPS", -3.0)])), None);
    }

    #[test]
    fn iqs_is_exactly_zero_when_sps_is_one() {
        let iqs = builtin("IQS").unwrap();
        let env = |id: &str| {
            Some(match id {
                "ROE" => 17.3,
                "PE" => 42.0,
                "PB" => 9.1,
                "SPS" => 1.0,
                _ => return None,
            })
        };
        assert_eq!(iqs.expr.eval_with(&env), Some(0.0));
    }

    #[test]
    fn builtin_abbreviations_and_spot_values() {
        let defs = builtin_alphas();
        let abbrs: Vec<&str> = defs.iter().map(|d| d.abbreviation.as_str()).collect();
        assert_eq!(abbrs, ["PVS", "RAPS", "EVC", "VEC", "PLF", "IQS"]);

        let raps = &defs[1];
        let env = |id: &str| Some(if id == "ROE" { 4.0 } else { 2.0 });
        assert_eq!(raps.expr.eval_with(&env), Some(1.0));

        let vec_def = &defs[3];
        let env3 = |_: &str| Some(3.0);
        assert_eq!(vec_def.expr.eval_with(&env3), Some(3.0));
    }

    #[test]
    fn builtins_round_trip_through_render() {
        for def in builtin_alphas() {
            let text = render_alpha(&def.expr);
            let reparsed = parse_alpha(&text).unwrap();
            assert_eq!(reparsed, def.expr, "round-trip failed for {text}");
        }
    }

    #[test]
    fn render_parenthesizes_right_associative_cases() {
        let e = AlphaExpr::Sub(
            Box::new(sig("PE")),
            Box::new(AlphaExpr::Add(Box::new(sig("ROE")), Box::new(sig("GM")))),
        );
        assert_eq!(render_alpha(&e), "PE - (ROE + GM)");
        assert_eq!(parse_alpha("PE - (ROE + GM)").unwrap(), e);

        let m = AlphaExpr::Mul(
            Box::new(sig("PE")),
            Box::new(AlphaExpr::Div(Box::new(sig("ROE")), Box::new(sig("GM")))),
        );
        assert_eq!(render_alpha(&m), "PE * (ROE / GM)");
        assert_eq!(parse_alpha("PE * (ROE / GM)").unwrap(), m);
    }
}
