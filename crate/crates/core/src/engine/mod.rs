//! Built-in relation catalog, coincidence reports and derivation chains.

mod catalog;
mod chain;
mod report;

use thiserror::Error;

use crate::dsl::EvalError;

pub use catalog::{builtin_catalog, export_catalog, homogeneity, parse_catalog, CatalogEntry};
pub use chain::{fluctuation_energy, run_chain, ChainReport, ChainStep, CrossCheck, FluctuationEnergy, CHAIN_NAMES};
pub use report::{run_catalog, CoincidenceReport, JsonQuantity, ReportRow};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("catalog entry {name}: {source}")]
    Entry { name: String, source: EvalError },
    #[error("chain {chain}, step `{step}`: {source}")]
    Step { chain: String, step: String, source: EvalError },
    #[error("unknown chain `{0}` (expected one of weinberg, planck_constant, planck_particle)")]
    UnknownChain(String),
}

impl EngineError {
    pub fn eval_error(&self) -> Option<&EvalError> {
        match self {
            EngineError::Entry { source, .. } | EngineError::Step { source, .. } => Some(source),
            EngineError::UnknownChain(_) => None,
        }
    }
}
