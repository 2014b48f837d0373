//! Formulaic-alpha research engine.
//!
//! The crate is organized around a quarterly company panel:
//!
//! - [`panel`] loads signal and price CSVs, aligns forward returns, and
//!   serves complete-case cross-sections.
//! - [`dsl`] parses formulaic alphas (arithmetic expressions over signal
//!   identifiers) and evaluates them column-wise.
//! - [`metrics`] provides rank statistics, z-score normalization, and the
//!   OLS core shared by every evaluation.
//! - [`fmb`] runs the Fama-MacBeth two-step regression and compares
//!   candidate models against a baseline.
//! - [`miner`] builds the two-step prompting protocol for LLM-assisted
//!   signal generation, with a record/replay transport so everything is
//!   testable offline.
//! - [`report`] renders correlation heatmaps and adjusted-R² box plots as
//!   deterministic SVG plus CSV sidecars.

pub mod dsl;
pub mod fmb;
pub mod metrics;
pub mod miner;
pub mod panel;
pub mod report;
pub mod signals;

pub use dsl::{builtin_alphas, parse_alpha, render_alpha, AlphaDef, AlphaExpr, Column, Provenance};
pub use panel::{Horizon, Panel};
