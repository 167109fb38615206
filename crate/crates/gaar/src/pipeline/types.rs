//! Domain types shared by the engine stages.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::fol::{signature_of, Formula, SymbolKeys};
use crate::solver::LabeledPremises;

use super::PipelineError;

/// The argument to reconstruct: a debate topic, optional background, and the
/// argument text itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentInput {
    pub topic: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<String>,
    pub argument: String,
}

impl ArgumentInput {
    pub fn new(
        topic: impl Into<String>,
        background: Option<String>,
        argument: impl Into<String>,
    ) -> Result<Self, PipelineError> {
        let input = ArgumentInput {
            topic: topic.into(),
            background,
            argument: argument.into(),
        };
        if input.topic.trim().is_empty() || input.argument.trim().is_empty() {
            return Err(PipelineError::InvalidInput(
                "topic and argument must be nonempty".into(),
            ));
        }
        Ok(input)
    }
}

/// One detected fallacy with the detector's rationale.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FallacyFinding {
    pub name: String,
    pub rationale: String,
}

/// Stage-1 output. At most one formal fallacy, any number of informal ones;
/// the two may coexist.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FallacyReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formal: Option<FallacyFinding>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub informal: Vec<FallacyFinding>,
}

impl FallacyReport {
    pub fn none() -> Self {
        FallacyReport::default()
    }

    pub fn none_detected(&self) -> bool {
        self.formal.is_none() && self.informal.is_empty()
    }

    pub fn has_formal(&self) -> bool {
        self.formal.is_some()
    }

    /// Short type description for prompt injection, e.g.
    /// `detected as containing the informal fallacy "false equivalence"`.
    pub fn type_phrase(&self) -> String {
        if self.none_detected() {
            return "not detected as fallacious".to_string();
        }
        let mut parts = Vec::new();
        if let Some(f) = &self.formal {
            parts.push(format!("the formal fallacy \"{}\"", f.name));
        }
        for f in &self.informal {
            parts.push(format!("the informal fallacy \"{}\"", f.name));
        }
        format!("detected as containing {}", parts.join(" and "))
    }
}

/// A natural-language premise. Labels run P1, P2, … in order; `implicit`
/// marks premises the source text left unstated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Premise {
    pub label: String,
    pub text: String,
    pub implicit: bool,
}

/// A premise–conclusion structure, the engine's central artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub premises: Vec<Premise>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub intermediate_conclusions: Vec<String>,
    pub conclusion: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub connections: String,
}

impl Reconstruction {
    /// Checks the structural invariants: at least one premise, nonempty
    /// texts, labels consecutive from P1.
    pub fn validate(&self) -> Result<(), String> {
        if self.premises.is_empty() {
            return Err("a reconstruction needs at least one premise".into());
        }
        if self.conclusion.trim().is_empty() {
            return Err("a reconstruction needs exactly one conclusion".into());
        }
        for (i, p) in self.premises.iter().enumerate() {
            let want = format!("P{}", i + 1);
            if p.label != want {
                return Err(format!(
                    "premise labels must be consecutive from P1: found '{}' at position {}",
                    p.label,
                    i + 1
                ));
            }
            if p.text.trim().is_empty() {
                return Err(format!("premise {} has empty text", p.label));
            }
        }
        Ok(())
    }

    pub fn premise(&self, label: &str) -> Option<&Premise> {
        self.premises.iter().find(|p| p.label == label)
    }
}

/// Stage-3 output: symbol keys plus formalized premises and conclusion. The
/// premise labels coincide with the reconstruction's.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formalization {
    pub keys: SymbolKeys,
    pub premises: LabeledPremises,
    pub conclusion: Formula,
}

impl Formalization {
    /// Every symbol occurring in the formula set must be keyed.
    pub fn check_key_coverage(&self) -> Result<(), Vec<String>> {
        let mut formulas = self.premises.formulas();
        formulas.push(&self.conclusion);
        let sig = match signature_of(formulas.iter().copied()) {
            Ok(sig) => sig,
            Err(_) => return Ok(()), // arity errors surface elsewhere
        };
        let missing = self.keys.missing_for(&sig);
        if missing.is_empty() {
            Ok(())
        } else {
            Err(missing)
        }
    }
}

/// The three fine-grained faithfulness criteria.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum Criterion {
    Accuracy,
    Completeness,
    Parsimony,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [
        Criterion::Accuracy,
        Criterion::Completeness,
        Criterion::Parsimony,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Criterion::Accuracy => "Accuracy",
            Criterion::Completeness => "Completeness",
            Criterion::Parsimony => "Parsimony",
        }
    }

    pub fn all() -> BTreeSet<Criterion> {
        Criterion::ALL.into_iter().collect()
    }
}

impl std::str::FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "accuracy" => Ok(Criterion::Accuracy),
            "completeness" => Ok(Criterion::Completeness),
            "parsimony" => Ok(Criterion::Parsimony),
            other => Err(format!("unknown criterion '{other}'")),
        }
    }
}

/// What kind of feedback is routed back to the reconstruction stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeedbackKind {
    Invalidity,
    Accuracy,
    Completeness,
    Parsimony,
    FallacyRevision,
    /// The formalization stage proposed premises that are not part of the
    /// reconstruction; they are surfaced as feedback, never inserted
    /// silently.
    SolverAddition,
}

impl FeedbackKind {
    pub fn for_criterion(c: Criterion) -> Self {
        match c {
            Criterion::Accuracy => FeedbackKind::Accuracy,
            Criterion::Completeness => FeedbackKind::Completeness,
            Criterion::Parsimony => FeedbackKind::Parsimony,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feedback {
    pub kind: FeedbackKind,
    pub message: String,
}

/// Per-criterion stage-6 verdicts. In coarse mode a single overall verdict is
/// recorded without a criterion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaithfulnessJudgment {
    pub verdicts: Vec<CriterionVerdict>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    /// `None` marks the coarse single-criterion verdict.
    pub criterion: Option<Criterion>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub rationale: String,
}

impl FaithfulnessJudgment {
    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn failed_count(&self) -> usize {
        self.verdicts.iter().filter(|v| !v.passed).count()
    }
}
