//! Canonical signal identifiers and the display-name alias table.
//!
//! All panel columns and DSL identifiers resolve to one of the ten
//! canonical ids below. Data vendors and LLM output use display names
//! ("P/E", "EV/EBITDA"); the alias table maps those onto canonical ids.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

/// The ten canonical signal identifiers, in conventional reporting order.
pub const CANONICAL: [&str; 10] = [
    "PE", "PB", "ROA", "ROE", "FCF", "PCF", "EBITDA", "GM", "NM", "SPS",
];

/// Returns the canonical id matching `name` case-insensitively, if any.
pub fn canonical_id(name: &str) -> Option<&'static str> {
    let upper = name.trim().to_ascii_uppercase();
    CANONICAL.iter().copied().find(|c| *c == upper)
}

/// Error raised while reading an alias table file.
#[derive(Debug, thiserror::Error)]
pub enum AliasError {
    #[error("alias file line {line}: expected `display_name = canonical_id`, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("alias file line {line}: {target:?} is not a canonical signal id")]
    UnknownTarget { line: usize, target: String },
    #[error("failed to read alias file: {0}")]
    Io(#[from] std::io::Error),
}

/// Maps display names (e.g. "P/E") to canonical signal ids.
///
/// Resolution order: exact alias match, then case-insensitive canonical
/// match. The default table carries the display names that differ from
/// their canonical ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliasTable {
    map: BTreeMap<String, String>,
}

impl Default for AliasTable {
    fn default() -> Self {
        let mut map = BTreeMap::new();
        for (display, canonical) in [
            ("P/E", "PE"),
            ("P/B", "PB"),
            ("P/CF", "PCF"),
            ("EV/EBITDA", "EBITDA"),
            ("Price/Earnings", "PE"),
            ("Price/Book", "PB"),
            ("Price/Cash Flow", "PCF"),
        ] {
            map.insert(display.to_string(), canonical.to_string());
        }
        AliasTable { map }
    }
}

impl AliasTable {
    /// An empty table (canonical ids still resolve).
    pub fn empty() -> Self {
        AliasTable { map: BTreeMap::new() }
    }

    /// Reads `display_name = canonical_id` lines, extending the default
    /// table. Blank lines and `#` comments are ignored.
    pub fn from_file(path: &Path) -> Result<Self, AliasError> {
        let text = std::fs::read_to_string(path)?;
        let mut table = AliasTable::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (display, target) = line.split_once('=').ok_or(AliasError::Malformed {
                line: idx + 1,
                text: raw.to_string(),
            })?;
            let display = display.trim();
            let target = target.trim();
            if display.is_empty() || target.is_empty() {
                return Err(AliasError::Malformed { line: idx + 1, text: raw.to_string() });
            }
            let canonical = canonical_id(target).ok_or_else(|| AliasError::UnknownTarget {
                line: idx + 1,
                target: target.to_string(),
            })?;
            table.insert(display, canonical);
        }
        Ok(table)
    }

    /// Adds or replaces one alias.
    pub fn insert(&mut self, display: &str, canonical: &str) {
        self.map.insert(display.to_string(), canonical.to_string());
    }

    /// Resolves a display name or canonical id to its canonical form.
    pub fn resolve(&self, name: &str) -> Option<&str> {
        let trimmed = name.trim();
        if let Some(target) = self.map.get(trimmed) {
            return Some(target.as_str());
        }
        canonical_id(trimmed)
    }

    /// Iterates `(display, canonical)` pairs in sorted order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

impl fmt::Display for AliasTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (display, canonical) in self.iter() {
            writeln!(f, "{display} = {canonical}")?;
        }
        Ok(())
    }
}
