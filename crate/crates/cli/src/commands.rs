//! Pipeline commands: ingest, corr, fmb, mine, report. Every command is
//! idempotent for unchanged inputs and writes only under the configured
//! output directory.

use crate::config::{ResolvedConfig, TransportMode};
use crate::error::CliError;
use alphaforge::dsl::Column;
use alphaforge::fmb::{fmb_compare, FmbComparison};
use alphaforge::metrics::{avg_cross_sectional_corr, CorrReport};
use alphaforge::miner::{
    run_mine_session, LiveTransport, MineOutcome, MineParams, MinedCandidate, ReplayTransport,
    Transport, DEFAULT_QUERY,
};
use alphaforge::panel::{load_panel, LoadOptions, LoadSummary, Panel};
use alphaforge::report::{
    emit_boxplot, emit_heatmap, summary_markdown, BoxplotSpec, ColorScale, HeatmapSpec,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Bumped whenever the cache layout changes; stale caches fail loudly.
pub const CACHE_SCHEMA_VERSION: u32 = 1;

pub const CACHE_FILE: &str = "panel.bin";
pub const MANIFEST_FILE: &str = "panel_manifest.json";
pub const REGISTRY_FILE: &str = "candidates.jsonl";
pub const CORR_JSON: &str = "corr_combined.json";
pub const FMB_JSON: &str = "fmb_comparison.json";
pub const SUMMARY_FILE: &str = "summary.md";

#[derive(Serialize, Deserialize)]
struct PanelCache {
    schema_version: u32,
    panel: Panel,
    summary: LoadSummary,
}

/// One line of the mined-candidate registry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegistryRecord {
    pub seed: u64,
    pub sample_row_count: usize,
    pub prompt_hash: String,
    pub candidate: MinedCandidate,
}

#[derive(Serialize)]
struct Manifest {
    schema_version: u32,
    source_signal_files: Vec<String>,
    source_price_file: String,
    horizon: String,
    n_companies: usize,
    n_dates: usize,
    n_signals: usize,
    date_start: String,
    date_end: String,
    missing_cells: usize,
    fwd_returns_defined: usize,
    complete_rows: usize,
    load: LoadSummary,
    cache_sha256: String,
}

fn ensure_out_dir(cfg: &ResolvedConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.raw.out_dir)?;
    Ok(())
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().to_string()).unwrap_or_default()
}

/// Loads, validates, and caches the panel; writes the manifest.
pub fn cmd_ingest(cfg: &ResolvedConfig) -> Result<(), CliError> {
    ensure_out_dir(cfg)?;
    let opts = LoadOptions { horizon: cfg.horizon, aliases: cfg.aliases.clone() };
    let (mut panel, summary) = load_panel(&cfg.raw.signal_files, &cfg.raw.price_file, &opts)?;
    if let (Some(start), Some(end)) = (cfg.raw.date_start, cfg.raw.date_end) {
        panel = panel.restrict_dates(start, end)?;
    }

    let cache = PanelCache { schema_version: CACHE_SCHEMA_VERSION, panel, summary };
    let bytes = bincode::serialize(&cache)
        .map_err(|e| CliError::Io(format!("cache serialization failed: {e}")))?;
    let cache_path = cfg.raw.out_dir.join(CACHE_FILE);
    std::fs::write(&cache_path, &bytes)?;

    let panel = &cache.panel;
    let manifest = Manifest {
        schema_version: CACHE_SCHEMA_VERSION,
        source_signal_files: cfg.raw.signal_files.iter().map(|p| file_name(p)).collect(),
        source_price_file: file_name(&cfg.raw.price_file),
        horizon: cfg.horizon.to_string(),
        n_companies: panel.n_companies(),
        n_dates: panel.n_dates(),
        n_signals: panel.n_signals(),
        date_start: panel.dates().first().map(|d| d.to_string()).unwrap_or_default(),
        date_end: panel.dates().last().map(|d| d.to_string()).unwrap_or_default(),
        missing_cells: panel.missing_value_count(),
        fwd_returns_defined: panel.fwd_return_count(),
        complete_rows: panel.complete_row_count(),
        load: cache.summary.clone(),
        cache_sha256: hex::encode(Sha256::digest(&bytes)),
    };
    let manifest_path = cfg.raw.out_dir.join(MANIFEST_FILE);
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest).unwrap() + "\n")?;

    println!(
        "ingested {} companies x {} dates x {} signals -> {}",
        manifest.n_companies,
        manifest.n_dates,
        manifest.n_signals,
        cache_path.display()
    );
    Ok(())
}

/// Reads the cached panel, failing loudly on schema drift.
pub fn load_cached_panel(cfg: &ResolvedConfig) -> Result<Panel, CliError> {
    let path = cfg.raw.out_dir.join(CACHE_FILE);
    let bytes = std::fs::read(&path).map_err(|e| {
        CliError::Data(format!("panel cache {} not readable ({e}); run `ingest` first", path.display()))
    })?;
    let cache: PanelCache = bincode::deserialize(&bytes)
        .map_err(|e| CliError::Data(format!("panel cache {} is corrupt: {e}", path.display())))?;
    if cache.schema_version != CACHE_SCHEMA_VERSION {
        return Err(CliError::Data(format!(
            "panel cache schema version {} does not match {}; re-run `ingest`",
            cache.schema_version, CACHE_SCHEMA_VERSION
        )));
    }
    Ok(cache.panel)
}

fn heatmap_scale(cfg: &ResolvedConfig) -> ColorScale {
    if cfg.raw.heatmap_data_driven_scale {
        ColorScale::DataDriven
    } else {
        ColorScale::Anchored
    }
}

fn write_corr_set(
    cfg: &ResolvedConfig,
    panel: &Panel,
    name: &str,
    title: &str,
    columns: &[Column],
) -> Result<CorrReport, CliError> {
    let report = avg_cross_sectional_corr(panel, columns)?;
    let mut spec = HeatmapSpec::from_report(title, &report);
    spec.scale = heatmap_scale(cfg);
    let svg = cfg.raw.out_dir.join(format!("corr_{name}.svg"));
    emit_heatmap(&spec, &svg)?;
    std::fs::write(cfg.raw.out_dir.join(format!("corr_{name}_long.csv")), report.to_csv())?;
    println!("wrote {}", svg.display());
    Ok(report)
}

/// Correlation heatmaps and CSVs for the existing, new, and combined
/// signal sets.
pub fn cmd_corr(cfg: &ResolvedConfig) -> Result<(), CliError> {
    ensure_out_dir(cfg)?;
    let panel = load_cached_panel(cfg)?;

    write_corr_set(cfg, &panel, "existing", "existing signals vs forward return", &cfg.baseline)?;

    let new_columns: Vec<Column> =
        cfg.candidates.iter().cloned().map(Column::Alpha).collect();
    if new_columns.is_empty() {
        println!("no candidates configured; skipping the new and combined sets");
        return Ok(());
    }
    write_corr_set(cfg, &panel, "new", "new signals vs forward return", &new_columns)?;

    let mut combined = cfg.baseline.clone();
    combined.extend(new_columns);
    let report =
        write_corr_set(cfg, &panel, "combined", "all signals vs forward return", &combined)?;
    std::fs::write(
        cfg.raw.out_dir.join(CORR_JSON),
        serde_json::to_string_pretty(&report).unwrap() + "\n",
    )?;
    Ok(())
}

/// Fama-MacBeth comparison: long CSV, summary CSV, box plot, and the
/// machine-readable comparison artifact.
pub fn cmd_fmb(cfg: &ResolvedConfig) -> Result<(), CliError> {
    ensure_out_dir(cfg)?;
    let panel = load_cached_panel(cfg)?;
    let cmp = fmb_compare(&panel, &cfg.baseline, &cfg.candidates)?;

    std::fs::write(cfg.raw.out_dir.join("fmb_adj_r2.csv"), cmp.to_long_csv())?;
    std::fs::write(cfg.raw.out_dir.join("fmb_summary.csv"), cmp.to_summary_csv())?;
    let spec = BoxplotSpec::from_comparison("Fama-MacBeth step-2 adjusted R-squared", &cmp);
    let svg = cfg.raw.out_dir.join("fmb_boxplot.svg");
    emit_boxplot(&spec, &svg)?;
    std::fs::write(
        cfg.raw.out_dir.join(FMB_JSON),
        serde_json::to_string_pretty(&cmp).unwrap() + "\n",
    )?;

    for (abbr, reason) in &cmp.failed {
        eprintln!("candidate {abbr} failed: {reason}");
    }
    println!(
        "wrote {} ({} models, {} failed)",
        svg.display(),
        cmp.summary.len(),
        cmp.failed.len()
    );
    Ok(())
}

fn build_transport(cfg: &ResolvedConfig) -> Result<Box<dyn Transport>, CliError> {
    match cfg.transport_mode {
        TransportMode::Replay => {
            let dir = cfg.raw.replay_dir.as_ref().ok_or_else(|| {
                CliError::Config("transport = \"replay\" requires replay_dir".to_string())
            })?;
            Ok(Box::new(ReplayTransport::new(dir)))
        }
        TransportMode::Live => {
            let endpoint = cfg.raw.endpoint.as_ref().ok_or_else(|| {
                CliError::Config("transport = \"live\" requires endpoint".to_string())
            })?;
            let session_dir = cfg.raw.out_dir.join("sessions");
            Ok(Box::new(LiveTransport::new(
                endpoint,
                &cfg.raw.credential_env,
                Some(session_dir),
            )))
        }
    }
}

fn registry_lines(path: &Path) -> Result<Vec<RegistryRecord>, CliError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: RegistryRecord = serde_json::from_str(line).map_err(|e| {
            CliError::Data(format!("{} line {}: {e}", path.display(), idx + 1))
        })?;
        out.push(record);
    }
    Ok(out)
}

/// One mining session: two prompts through the configured transport, the
/// parsed candidate appended to the registry.
pub fn cmd_mine(cfg: &ResolvedConfig) -> Result<(), CliError> {
    ensure_out_dir(cfg)?;
    let panel = load_cached_panel(cfg)?;
    let transport = build_transport(cfg)?;
    let params = MineParams {
        signals: cfg.baseline_signal_ids(),
        seed: cfg.raw.seed,
        sample_row_count: cfg.raw.sample_rows,
        query: cfg.raw.mine_query.clone().unwrap_or_else(|| DEFAULT_QUERY.to_string()),
        completion: cfg.completion_params(),
    };
    let MineOutcome { bundle, candidate, .. } =
        run_mine_session(&panel, &params, transport.as_ref())?;

    let record = RegistryRecord {
        seed: params.seed,
        sample_row_count: params.sample_row_count,
        prompt_hash: alphaforge::miner::prompt_hash(&bundle.step2_prompt),
        candidate,
    };
    let registry = cfg.raw.out_dir.join(REGISTRY_FILE);
    let existing = registry_lines(&registry)?;
    let duplicate = existing.iter().any(|r| {
        r.candidate.abbreviation == record.candidate.abbreviation
            && r.candidate.formula_text == record.candidate.formula_text
    });
    if cfg.raw.dedup && duplicate {
        println!(
            "candidate {} already registered; registry unchanged",
            record.candidate.abbreviation
        );
        return Ok(());
    }
    let mut line = serde_json::to_string(&record).unwrap();
    line.push('\n');
    use std::io::Write;
    let mut file = std::fs::OpenOptions::new().create(true).append(true).open(&registry)?;
    file.write_all(line.as_bytes())?;

    println!(
        "mined {} ({:?}): {}",
        record.candidate.abbreviation,
        record.candidate.parse_status,
        if record.candidate.formula_text.is_empty() {
            "<no formula line found>"
        } else {
            &record.candidate.formula_text
        }
    );
    Ok(())
}

/// Renders the markdown summary from the corr and fmb artifacts.
pub fn cmd_report(cfg: &ResolvedConfig) -> Result<(), CliError> {
    ensure_out_dir(cfg)?;
    let corr_path = cfg.raw.out_dir.join(CORR_JSON);
    let fmb_path = cfg.raw.out_dir.join(FMB_JSON);
    for (path, producer) in [(&corr_path, "corr"), (&fmb_path, "fmb")] {
        if !path.exists() {
            return Err(CliError::Data(format!(
                "missing input {}; run `{producer}` first",
                path.display()
            )));
        }
    }
    let corr: CorrReport = serde_json::from_str(&std::fs::read_to_string(&corr_path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", corr_path.display())))?;
    let cmp: FmbComparison = serde_json::from_str(&std::fs::read_to_string(&fmb_path)?)
        .map_err(|e| CliError::Data(format!("{}: {e}", fmb_path.display())))?;
    let summary = summary_markdown(&corr, &cmp);
    let out = cfg.raw.out_dir.join(SUMMARY_FILE);
    std::fs::write(&out, summary)?;
    println!("wrote {}", out.display());
    Ok(())
}
