//! Two-step prompting protocol for LLM-assisted signal generation.
//!
//! Step 1 asks the model for the definition, return-prediction effect,
//! and preferred tendency of each existing signal. Step 2 combines those
//! definitions with sampled panel rows and the actual question, closed by
//! the zero-shot chain-of-thought trigger. Both steps go through a
//! [`Transport`]: a live chat-completion endpoint that records every
//! exchange, or a directory of replay fixtures keyed by prompt hash so CI
//! never needs network access.

mod parse;
mod transport;

pub use parse::parse_llm_response;
pub use transport::{
    prompt_hash, CompletionParams, FixtureRecord, LiveTransport, ReplayTransport, Transport,
    TransportError,
};

use crate::panel::{Panel, PanelError};
use serde::{Deserialize, Serialize};

/// The zero-shot chain-of-thought trigger appended to every generation
/// prompt.
pub const COT_TRIGGER: &str = "Let's think step by step.";

/// Default actual question sent in step 2.
pub const DEFAULT_QUERY: &str = "Using the signal definitions and the sample data above, create one \
new formulaic signal that predicts future stock returns. Combine the existing signals in a \
non-trivial way. State the new signal's name, a short abbreviation, and its formula on a single \
line in the form ABBR = expression, then explain your reasoning.";

/// Errors from prompt construction and mining sessions.
#[derive(Debug, thiserror::Error)]
pub enum MinerError {
    #[error("signal list must not be empty")]
    EmptySignalList,
    #[error("prompt part {part:?} must not be empty or whitespace")]
    EmptyPromptPart { part: &'static str },
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Panel(#[from] PanelError),
}

/// The prompts of one mining session plus reproduction metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub step1_prompt: String,
    pub step2_prompt: String,
    pub metadata: PromptMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptMetadata {
    pub seed: u64,
    pub sample_row_count: usize,
    pub signals: Vec<String>,
    /// RFC 3339 build time; informational only, never part of replay keys.
    pub timestamp: String,
}

/// Parse state of a mined candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseStatus {
    Parsed,
    Unparsable,
}

/// One candidate extracted from a model response.
///
/// `parse_status == Parsed` implies `expr` is present and round-trips
/// through the DSL; `Unparsable` preserves the raw formula text (possibly
/// empty when no formula line was recognized).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinedCandidate {
    pub name: String,
    pub abbreviation: String,
    pub formula_text: String,
    pub expr: Option<crate::dsl::AlphaExpr>,
    pub reasoning_text: String,
    pub parse_status: ParseStatus,
    pub warnings: Vec<String>,
}

/// Step-1 prompt: requests definition, effect on predicting stock
/// returns, and preferred tendency for each signal. Deterministic in its
/// inputs.
pub fn build_definitions_prompt(signals: &[String]) -> Result<String, MinerError> {
    if signals.is_empty() {
        return Err(MinerError::EmptySignalList);
    }
    let mut out = String::from(
        "You are a quantitative finance researcher.\n\
         \n\
         For each of the following financial signals, provide:\n\
         1. its definition,\n\
         2. its effect on predicting stock returns,\n\
         3. its preferred tendency (whether higher or lower values are generally better).\n\
         \n\
         Signals:\n",
    );
    for signal in signals {
        out.push_str("- ");
        out.push_str(signal);
        out.push('\n');
    }
    Ok(out)
}

/// Step-2 prompt: overall instructions, the signal definitions, the
/// sampled data rows, the actual question, and the chain-of-thought
/// trigger as the final line.
pub fn build_generation_prompt(
    definitions: &str,
    sample: &str,
    query: &str,
) -> Result<String, MinerError> {
    for (part, text) in
        [("definitions", definitions), ("sample", sample), ("query", query)]
    {
        if text.trim().is_empty() {
            return Err(MinerError::EmptyPromptPart { part });
        }
    }
    let mut out = String::from(
        "You are a quantitative finance researcher designing new return-predictive \
         formulaic signals from existing ones.\n\
         \n\
         ## Signal definitions\n\
         \n",
    );
    out.push_str(definitions.trim_end());
    out.push_str("\n\n## Sample data\n\n");
    out.push_str(sample.trim_end());
    out.push_str("\n\n## Question\n\n");
    out.push_str(query.trim_end());
    out.push_str("\n\n");
    out.push_str(COT_TRIGGER);
    out.push('\n');
    Ok(out)
}

/// Parameters of one mining session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MineParams {
    pub signals: Vec<String>,
    pub seed: u64,
    pub sample_row_count: usize,
    pub query: String,
    pub completion: CompletionParams,
}

/// Everything produced by one mining session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MineOutcome {
    pub bundle: PromptBundle,
    pub definitions_text: String,
    pub candidate: MinedCandidate,
}

/// Runs the full two-step protocol: definitions request, generation
/// request with embedded sample rows, and response parsing.
pub fn run_mine_session(
    panel: &Panel,
    params: &MineParams,
    transport: &dyn Transport,
) -> Result<MineOutcome, MinerError> {
    let step1_prompt = build_definitions_prompt(&params.signals)?;
    let definitions = transport.complete(&step1_prompt, &params.completion)?;
    let sample = panel.sample_rows(params.sample_row_count, params.seed)?;
    let step2_prompt = build_generation_prompt(&definitions, &sample, &params.query)?;
    let response = transport.complete(&step2_prompt, &params.completion)?;
    let candidate = parse_llm_response(&response);
    Ok(MineOutcome {
        bundle: PromptBundle {
            step1_prompt,
            step2_prompt,
            metadata: PromptMetadata {
                seed: params.seed,
                sample_row_count: params.sample_row_count,
                signals: params.signals.clone(),
                timestamp: chrono::Utc::now().to_rfc3339(),
            },
        },
        definitions_text: definitions,
        candidate,
    })
}
