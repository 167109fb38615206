//! The pipeline audit log: one record per executed stage, grouped by
//! iteration, append-only.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::llm::sha256_hex;

use super::Feedback;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StageId {
    FallacyDetection,
    Reconstruction,
    Formalization,
    ValidityAndPruning,
    Streamlining,
    FaithfulnessJudgment,
}

impl StageId {
    pub fn number(&self) -> u8 {
        match self {
            StageId::FallacyDetection => 1,
            StageId::Reconstruction => 2,
            StageId::Formalization => 3,
            StageId::ValidityAndPruning => 4,
            StageId::Streamlining => 5,
            StageId::FaithfulnessJudgment => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Converged,
    Exhausted,
    Failed,
}

/// One executed stage: the prompt hash and raw response of the final LLM
/// attempt (empty for the native validity stage), a structured summary of
/// the parsed value, stage verdicts, and any feedback emitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: StageId,
    pub prompt_hash: String,
    pub raw_response: String,
    pub parsed: serde_json::Value,
    pub verdicts: serde_json::Value,
    pub feedback: Vec<Feedback>,
    /// LLM attempts this stage used (0 for native stages, 2 after a
    /// format-reminder reprompt).
    pub attempts: u32,
}

impl StageRecord {
    pub fn native(stage: StageId, parsed: serde_json::Value, verdicts: serde_json::Value) -> Self {
        StageRecord {
            stage,
            prompt_hash: String::new(),
            raw_response: String::new(),
            parsed,
            verdicts,
            feedback: Vec::new(),
            attempts: 0,
        }
    }

    pub fn prompt_of(mut self, prompt: &str) -> Self {
        self.prompt_hash = sha256_hex(prompt);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub index: usize,
    pub stages: Vec<StageRecord>,
}

/// Per-run audit log. `Converged` implies the last iteration passed every
/// enabled faithfulness criterion (and validity, when required).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub iterations: Vec<IterationRecord>,
    pub status: RunStatus,
    pub llm_calls: u64,
}

impl Default for PipelineTrace {
    fn default() -> Self {
        Self::new()
    }
}

impl PipelineTrace {
    pub fn new() -> Self {
        PipelineTrace {
            iterations: Vec::new(),
            status: RunStatus::Failed,
            llm_calls: 0,
        }
    }

    pub(super) fn begin_iteration(&mut self, index: usize) {
        self.iterations.push(IterationRecord {
            index,
            stages: Vec::new(),
        });
    }

    pub(super) fn push_stage(&mut self, record: StageRecord) {
        self.iterations
            .last_mut()
            .expect("an iteration must be begun before stages are recorded")
            .stages
            .push(record);
    }

    pub(super) fn set_status(&mut self, status: RunStatus) {
        self.status = status;
    }

    pub fn stage_records(&self, stage: StageId) -> impl Iterator<Item = &StageRecord> {
        self.iterations
            .iter()
            .flat_map(|it| it.stages.iter())
            .filter(move |r| r.stage == stage)
    }

    /// Iteration indices that began with a fallacy-revision re-entry.
    pub fn fallacy_revision_iterations(&self) -> Vec<usize> {
        self.iterations
            .iter()
            .filter(|it| {
                it.index > 1
                    && it
                        .stages
                        .first()
                        .is_some_and(|s| s.stage == StageId::FallacyDetection)
            })
            .map(|it| it.index)
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    /// Content hash of the full trace; byte-identical replays hash equal.
    pub fn content_hash(&self) -> String {
        sha256_hex(&serde_json::to_string(self).expect("trace serializes"))
    }

    pub fn write_to_file(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }
}
