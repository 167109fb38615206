//! The six-stage reconstruction state machine with feedback routing,
//! exceptional paths, iteration caps, and ablation toggles.

mod engine;
mod prompts;
mod schemes;
mod trace;
mod types;

pub use engine::{run_gaar, Engine, Flow, PipelineFailure, PipelineOutcome};
pub use prompts::PromptSet;
pub use schemes::{ArgumentScheme, SchemeCatalog, SchemeTheory};
pub use trace::{IterationRecord, PipelineTrace, RunStatus, StageId, StageRecord};
pub use types::*;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::llm::{LlmError, ParseError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("backend failure at stage {stage:?}: {source}")]
    Backend { stage: StageId, source: LlmError },
    #[error("stage {stage:?} output stayed unparseable after a reprompt: {source}")]
    UnparseableResponse { stage: StageId, source: ParseError },
    #[error("formalization key coverage failed after a reprompt: {detail}")]
    KeyCoverage { detail: String },
    #[error("the run produced no usable reconstruction")]
    NoUsableResult,
}

/// Ablation toggles, mirroring the engine's removable components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Toggles {
    /// Fallacy detection and its two exceptional paths.
    pub fallacy_path: bool,
    /// Fine-grained (three-criterion) vs coarse faithfulness judging.
    pub fine_grained_faithfulness: bool,
    /// The enabled subset of the fine-grained criteria.
    pub criteria: BTreeSet<Criterion>,
    /// Argument-type instruction in the reconstruction prompt.
    pub scheme_instruction: bool,
    /// Premise pruning after a Valid verdict.
    pub pruning: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Toggles {
            fallacy_path: true,
            fine_grained_faithfulness: true,
            criteria: Criterion::all(),
            scheme_instruction: true,
            pruning: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub max_iterations: usize,
    /// N: the loop re-runs fallacy detection at iterations N and 2N when it
    /// has not converged (the two exceptional re-entries).
    pub fallacy_revision_threshold: usize,
    pub scheme_theory: SchemeTheory,
    pub toggles: Toggles,
    /// Exact minimal-set enumeration cap handed to the solver.
    pub premise_cap: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            max_iterations: 10,
            fallacy_revision_threshold: 3,
            scheme_theory: SchemeTheory::General,
            toggles: Toggles::default(),
            premise_cap: crate::solver::DEFAULT_ENUMERATION_CAP,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.max_iterations == 0 {
            return Err(PipelineError::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if self.fallacy_revision_threshold == 0
            || self.fallacy_revision_threshold >= self.max_iterations
        {
            return Err(PipelineError::InvalidConfig(format!(
                "fallacy_revision_threshold must satisfy 1 <= N < max_iterations, got N={} with \
                 max_iterations={}",
                self.fallacy_revision_threshold, self.max_iterations
            )));
        }
        if self.toggles.fine_grained_faithfulness && self.toggles.criteria.is_empty() {
            return Err(PipelineError::InvalidConfig(
                "at least one faithfulness criterion must be enabled".into(),
            ));
        }
        if self.premise_cap == 0 {
            return Err(PipelineError::InvalidConfig(
                "premise_cap must be at least 1".into(),
            ));
        }
        Ok(())
    }
}
