//! Declarative run configuration: a flat TOML file, with CLI flags
//! overriding individual keys. Credentials are referenced by environment
//! variable name only.

use crate::error::CliError;
use alphaforge::dsl::{builtin, builtin_alphas, parse_alpha, AlphaDef, Column, Provenance};
use alphaforge::miner::CompletionParams;
use alphaforge::panel::Horizon;
use alphaforge::signals::AliasTable;
use chrono::NaiveDate;
use serde::Deserialize;
use std::path::{Path, PathBuf};

fn default_horizon() -> String {
    "3m".to_string()
}

fn default_baseline() -> Vec<String> {
    alphaforge::signals::CANONICAL.iter().map(|s| s.to_string()).collect()
}

fn default_candidates() -> Vec<String> {
    vec!["builtins".to_string()]
}

fn default_seed() -> u64 {
    42
}

fn default_sample_rows() -> usize {
    10
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_transport() -> String {
    "replay".to_string()
}

fn default_credential_env() -> String {
    "ALPHAFORGE_API_KEY".to_string()
}

fn default_model() -> String {
    "gpt-4".to_string()
}

fn default_temperature() -> f64 {
    0.7
}

fn default_max_tokens() -> u32 {
    2048
}

fn default_true() -> bool {
    true
}

/// Raw config file contents.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub signal_files: Vec<PathBuf>,
    pub price_file: PathBuf,
    #[serde(default)]
    pub alias_file: Option<PathBuf>,
    #[serde(default = "default_horizon")]
    pub horizon: String,
    #[serde(default = "default_baseline")]
    pub baseline: Vec<String>,
    /// Entries: `builtins`, a builtin abbreviation, `registry:<path>`, or
    /// `ABBR = formula`.
    #[serde(default = "default_candidates")]
    pub candidates: Vec<String>,
    #[serde(default)]
    pub date_start: Option<NaiveDate>,
    #[serde(default)]
    pub date_end: Option<NaiveDate>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_sample_rows")]
    pub sample_rows: usize,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// `replay` or `live`.
    #[serde(default = "default_transport")]
    pub transport: String,
    #[serde(default)]
    pub replay_dir: Option<PathBuf>,
    #[serde(default)]
    pub endpoint: Option<String>,
    /// Name of the environment variable holding the API credential.
    #[serde(default = "default_credential_env")]
    pub credential_env: String,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default)]
    pub mine_query: Option<String>,
    #[serde(default = "default_true")]
    pub dedup: bool,
    /// Opt-in data-driven heatmap color scale (default anchors at [-1, 1]).
    #[serde(default)]
    pub heatmap_data_driven_scale: bool,
}

/// Transport selection, validated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportMode {
    Replay,
    Live,
}

/// Config after validation: typed horizon, resolved aliases, parsed
/// baseline columns and candidate definitions.
pub struct ResolvedConfig {
    pub raw: RunConfig,
    pub horizon: Horizon,
    pub aliases: AliasTable,
    pub baseline: Vec<Column>,
    pub candidates: Vec<AlphaDef>,
    pub transport_mode: TransportMode,
}

impl ResolvedConfig {
    pub fn completion_params(&self) -> CompletionParams {
        CompletionParams {
            model: self.raw.model.clone(),
            temperature: self.raw.temperature,
            max_tokens: self.raw.max_tokens,
        }
    }

    pub fn baseline_signal_ids(&self) -> Vec<String> {
        self.baseline.iter().map(|c| c.label().to_string()).collect()
    }
}

/// Reads and validates a config file. Relative paths are resolved
/// against the config file's directory.
pub fn load_config(path: &Path) -> Result<ResolvedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut raw: RunConfig = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;

    let base = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base.join(p) };
    raw.signal_files = raw.signal_files.iter().map(&resolve).collect();
    raw.price_file = resolve(&raw.price_file);
    raw.alias_file = raw.alias_file.as_ref().map(&resolve);
    raw.replay_dir = raw.replay_dir.as_ref().map(&resolve);
    raw.out_dir = resolve(&raw.out_dir);

    validate(raw)
}

fn validate(raw: RunConfig) -> Result<ResolvedConfig, CliError> {
    if raw.signal_files.is_empty() {
        return Err(CliError::Config("signal_files must not be empty".to_string()));
    }
    let horizon: Horizon = raw.horizon.parse().map_err(CliError::Config)?;

    if let (Some(start), Some(end)) = (raw.date_start, raw.date_end) {
        if start > end {
            return Err(CliError::Config(format!(
                "empty date range: date_start {start} is after date_end {end}"
            )));
        }
    }

    let transport_mode = match raw.transport.as_str() {
        "replay" => TransportMode::Replay,
        "live" => TransportMode::Live,
        other => {
            return Err(CliError::Config(format!(
                "transport must be \"replay\" or \"live\", got {other:?}"
            )))
        }
    };

    let aliases = match &raw.alias_file {
        Some(path) => AliasTable::from_file(path)?,
        None => AliasTable::default(),
    };

    if raw.baseline.is_empty() {
        return Err(CliError::Config("baseline must list at least one signal".to_string()));
    }
    let mut baseline = Vec::new();
    for id in &raw.baseline {
        let canonical = aliases.resolve(id).ok_or_else(|| {
            CliError::Config(format!("baseline entry {id:?} is not a known signal"))
        })?;
        baseline.push(Column::signal(canonical));
    }

    let candidates = parse_candidates(&raw.candidates)?;

    Ok(ResolvedConfig { raw, horizon, aliases, baseline, candidates, transport_mode })
}

fn parse_candidates(entries: &[String]) -> Result<Vec<AlphaDef>, CliError> {
    let mut out: Vec<AlphaDef> = Vec::new();
    let mut push = |def: AlphaDef| -> Result<(), CliError> {
        if out.iter().any(|d| d.abbreviation == def.abbreviation) {
            return Err(CliError::Config(format!(
                "duplicate candidate abbreviation {:?}",
                def.abbreviation
            )));
        }
        out.push(def);
        Ok(())
    };

    for entry in entries {
        let entry = entry.trim();
        if entry == "builtins" {
            for def in builtin_alphas() {
                push(def)?;
            }
        } else if let Some(path) = entry.strip_prefix("registry:") {
            for def in read_registry(Path::new(path.trim()))? {
                push(def)?;
            }
        } else if let Some((abbr, formula)) = entry.split_once('=') {
            let abbr = abbr.trim();
            if abbr.is_empty() {
                return Err(CliError::Config(format!("candidate {entry:?} lacks an abbreviation")));
            }
            let expr = parse_alpha(formula.trim()).map_err(|e| {
                CliError::Config(format!("candidate {abbr}: formula does not parse: {e}"))
            })?;
            push(AlphaDef::new(abbr, abbr, expr, Provenance::UserSupplied))?;
        } else if let Some(def) = builtin(entry) {
            push(def)?;
        } else {
            return Err(CliError::Config(format!(
                "candidate entry {entry:?} is neither \"builtins\", a builtin abbreviation, \
                 \"registry:<path>\", nor \"ABBR = formula\""
            )));
        }
    }
    Ok(out)
}

/// Reads parsed candidates from a mine registry (JSON lines).
fn read_registry(path: &Path) -> Result<Vec<AlphaDef>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read registry {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: crate::commands::RegistryRecord = serde_json::from_str(line).map_err(|e| {
            CliError::Config(format!("{} line {}: {e}", path.display(), idx + 1))
        })?;
        if let Some(expr) = record.candidate.expr {
            out.push(AlphaDef::new(
                &record.candidate.name,
                &record.candidate.abbreviation,
                expr,
                Provenance::Mined,
            ));
        }
    }
    Ok(out)
}
