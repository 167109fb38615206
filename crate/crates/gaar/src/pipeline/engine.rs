//! The staged reconstruction loop.
//!
//! Stage 1 (fallacy detection) runs once up front; stages 2–6
//! (reconstruction, formalization, validity judgment & pruning,
//! streamlining, faithfulness judgment) iterate until every enabled
//! faithfulness criterion passes or the iteration budget is exhausted.
//! Routing rules:
//!
//! - an Invalid stage-4 verdict sends invalidity feedback (with the
//!   countermodel) back to stage 2;
//! - a formal fallacy skips stage 4 entirely — such arguments are invalid by
//!   design, so the formalization goes straight to streamlining;
//! - failed faithfulness criteria send criterion-specific feedback back to
//!   stage 2;
//! - when the loop has not converged by iteration N (and again at 2N), the
//!   fallacy detection is re-run with the accumulated loop history; at most
//!   two such re-entries happen per run.

use std::collections::BTreeMap;

use serde_json::json;

use crate::fol::{render_formula, RenderStyle};
use crate::llm::{
    parse_faithfulness, parse_fallacy, parse_formalization, parse_reconstruction,
    parse_streamline, render_prompt, Backend, CompletionRequest, DecodingParams, LlmError,
    ParseError, PromptTemplate,
};
use crate::solver::{self, LabeledPremises, SolverError};

use super::prompts::PromptSet;
use super::schemes::SchemeCatalog;
use super::trace::{PipelineTrace, RunStatus, StageId, StageRecord};
use super::types::*;
use super::{PipelineConfig, PipelineError};

/// A finished run: the final (streamlined) reconstruction, its
/// formalization, the active fallacy report, and the audit trace. The trace
/// status distinguishes convergence from budget exhaustion.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub reconstruction: Reconstruction,
    pub formalization: Formalization,
    pub fallacy: FallacyReport,
    pub trace: PipelineTrace,
}

/// A run that could not produce a result; the partial trace has status
/// `Failed`.
#[derive(Debug)]
pub struct PipelineFailure {
    pub error: PipelineError,
    pub trace: PipelineTrace,
}

impl std::fmt::Display for PipelineFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.error)
    }
}

impl std::error::Error for PipelineFailure {}

/// Run the engine with the builtin prompts and scheme catalog.
pub fn run_gaar(
    input: &ArgumentInput,
    config: PipelineConfig,
    backend: &dyn Backend,
) -> Result<PipelineOutcome, PipelineFailure> {
    match Engine::new(backend, config) {
        Ok(engine) => engine.run(input),
        Err(error) => Err(PipelineFailure {
            error,
            trace: PipelineTrace::new(),
        }),
    }
}

pub struct Engine<'a> {
    backend: &'a dyn Backend,
    config: PipelineConfig,
    prompts: PromptSet,
    catalog: SchemeCatalog,
    model: String,
    params: DecodingParams,
}

enum StageCallError {
    Backend(LlmError),
    ParseFailed {
        error: ParseError,
        prompt: String,
        raw: String,
        attempts: u32,
    },
}

struct StageSuccess<T> {
    value: T,
    prompt: String,
    raw: String,
    attempts: u32,
}

/// Stage outcome routing: either the pipeline proceeds with the stage's
/// value, or feedback is sent back to the reconstruction stage.
pub enum Flow<T> {
    Proceed(T),
    Reroute(Vec<Feedback>),
}

impl<'a> Engine<'a> {
    pub fn new(backend: &'a dyn Backend, config: PipelineConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        let catalog = SchemeCatalog::builtin(config.scheme_theory);
        Ok(Engine {
            backend,
            config,
            prompts: PromptSet::builtin(),
            catalog,
            model: "default".to_string(),
            params: DecodingParams::default(),
        })
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.model = model.into();
        self
    }

    pub fn with_prompts(mut self, prompts: PromptSet) -> Self {
        self.prompts = prompts;
        self
    }

    pub fn with_catalog(mut self, catalog: SchemeCatalog) -> Result<Self, PipelineError> {
        if catalog.theory != self.config.scheme_theory {
            return Err(PipelineError::InvalidConfig(format!(
                "catalog theory {} does not match configured theory {}",
                catalog.theory, self.config.scheme_theory
            )));
        }
        self.catalog = catalog;
        Ok(self)
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn run(&self, input: &ArgumentInput) -> Result<PipelineOutcome, PipelineFailure> {
        let mut trace = PipelineTrace::new();
        match self.run_inner(input, &mut trace) {
            Ok((reconstruction, formalization, fallacy)) => Ok(PipelineOutcome {
                reconstruction,
                formalization,
                fallacy,
                trace,
            }),
            Err(error) => {
                trace.set_status(RunStatus::Failed);
                Err(PipelineFailure { error, trace })
            }
        }
    }

    fn run_inner(
        &self,
        input: &ArgumentInput,
        trace: &mut PipelineTrace,
    ) -> Result<(Reconstruction, Formalization, FallacyReport), PipelineError> {
        if input.topic.trim().is_empty() || input.argument.trim().is_empty() {
            return Err(PipelineError::InvalidInput(
                "topic and argument must be nonempty".into(),
            ));
        }
        let cfg = &self.config;
        let mut fallacy = FallacyReport::none();
        let mut feedback_prev: Vec<Feedback> = Vec::new();
        let mut history: Vec<String> = Vec::new();
        let mut revisions_done = 0usize;
        // Best-so-far for exhausted runs: fewest failed criteria, ties to
        // the latest iteration.
        let mut best: Option<(usize, Reconstruction, Formalization)> = None;
        let mut last_formalized: Option<(Reconstruction, Formalization)> = None;

        for iteration in 1..=cfg.max_iterations {
            trace.begin_iteration(iteration);

            if cfg.toggles.fallacy_path {
                if iteration == 1 {
                    fallacy = self.detect_fallacy(input, trace)?;
                } else if iteration % cfg.fallacy_revision_threshold == 0 && revisions_done < 2 {
                    revisions_done += 1;
                    fallacy = self.revise_fallacy(input, &fallacy, &history, trace)?;
                }
            }

            let reconstruction = self.reconstruct(input, &fallacy, &feedback_prev, trace)?;
            feedback_prev.clear();
            let mut queued: Vec<Feedback> = Vec::new();

            let formalization = match self.formalize(&reconstruction, trace)? {
                Flow::Proceed((f, extra)) => {
                    queued.extend(extra);
                    f
                }
                Flow::Reroute(fb) => {
                    history.push(format!(
                        "Iteration {iteration}: formalization failed ({}).",
                        fb.iter()
                            .map(|f| f.message.as_str())
                            .collect::<Vec<_>>()
                            .join("; ")
                    ));
                    feedback_prev = fb;
                    continue;
                }
            };
            last_formalized = Some((reconstruction.clone(), formalization.clone()));

            // Formal fallacies skip the validity judgment stage: the
            // reconstruction is invalid by design.
            let final_formalization = if cfg.toggles.fallacy_path && fallacy.has_formal() {
                formalization
            } else {
                match self.validity_stage(&formalization, trace) {
                    Flow::Proceed(pruned) => pruned,
                    Flow::Reroute(fb) => {
                        history.push(format!(
                            "Iteration {iteration}: validity judgment failed ({}).",
                            fb.iter()
                                .map(|f| f.message.as_str())
                                .collect::<Vec<_>>()
                                .join("; ")
                        ));
                        queued.extend(fb);
                        feedback_prev = queued;
                        continue;
                    }
                }
            };

            let streamlined = self.streamline(&reconstruction, &final_formalization, trace)?;
            let judgment = self.judge_faithfulness(input, &streamlined, &fallacy, trace)?;

            if judgment.all_passed() {
                trace.set_status(RunStatus::Converged);
                return Ok((streamlined, final_formalization, fallacy));
            }

            let failed = judgment.failed_count();
            for v in judgment.verdicts.iter().filter(|v| !v.passed) {
                let kind = v
                    .criterion
                    .map(FeedbackKind::for_criterion)
                    // Coarse mode has a single overall verdict; accuracy is
                    // its carrier kind.
                    .unwrap_or(FeedbackKind::Accuracy);
                let message = if v.rationale.is_empty() {
                    match v.criterion {
                        Some(c) => format!("the {} criterion was not satisfied", c.name()),
                        None => "the reconstruction was judged unfaithful".to_string(),
                    }
                } else {
                    v.rationale.clone()
                };
                queued.push(Feedback { kind, message });
            }
            history.push(format!(
                "Iteration {iteration}: {failed} faithfulness criterion(s) failed."
            ));
            if best.as_ref().is_none_or(|(b, _, _)| failed <= *b) {
                best = Some((failed, streamlined, final_formalization));
            }
            feedback_prev = queued;
        }

        trace.set_status(RunStatus::Exhausted);
        if let Some((_, reconstruction, formalization)) = best {
            return Ok((reconstruction, formalization, fallacy));
        }
        if let Some((reconstruction, formalization)) = last_formalized {
            return Ok((reconstruction, formalization, fallacy));
        }
        Err(PipelineError::NoUsableResult)
    }

    // --- stage implementations ---

    /// Stage 1: fallacy detection.
    pub fn detect_fallacy(
        &self,
        input: &ArgumentInput,
        trace: &mut PipelineTrace,
    ) -> Result<FallacyReport, PipelineError> {
        let bindings = self.input_bindings(input);
        let success = self
            .call_llm(trace, &self.prompts.fallacy, bindings, parse_fallacy)
            .map_err(|e| self.fatal(StageId::FallacyDetection, e))?;
        let report = success.value;
        trace.push_stage(
            StageRecord {
                stage: StageId::FallacyDetection,
                prompt_hash: String::new(),
                raw_response: success.raw,
                parsed: json!(report),
                verdicts: serde_json::Value::Null,
                feedback: Vec::new(),
                attempts: success.attempts,
            }
            .prompt_of(&success.prompt),
        );
        Ok(report)
    }

    /// Exceptional path: re-run fallacy detection with the loop history.
    fn revise_fallacy(
        &self,
        input: &ArgumentInput,
        prior: &FallacyReport,
        history: &[String],
        trace: &mut PipelineTrace,
    ) -> Result<FallacyReport, PipelineError> {
        let mut bindings = self.input_bindings(input);
        bindings.insert("PRIOR_FALLACY".into(), fallacy_section_body(prior));
        bindings.insert(
            "HISTORY".into(),
            if history.is_empty() {
                "No iterations recorded yet.".to_string()
            } else {
                history.join("\n")
            },
        );
        let success = self
            .call_llm(trace, &self.prompts.fallacy_revision, bindings, parse_fallacy)
            .map_err(|e| self.fatal(StageId::FallacyDetection, e))?;
        let report = success.value;
        trace.push_stage(
            StageRecord {
                stage: StageId::FallacyDetection,
                prompt_hash: String::new(),
                raw_response: success.raw,
                parsed: json!(report),
                verdicts: serde_json::Value::Null,
                feedback: vec![Feedback {
                    kind: FeedbackKind::FallacyRevision,
                    message: format!(
                        "fallacy detection re-run after {} non-converging iterations",
                        self.config.fallacy_revision_threshold
                    ),
                }],
                attempts: success.attempts,
            }
            .prompt_of(&success.prompt),
        );
        Ok(report)
    }

    /// Stage 2: reconstruction, with scheme instruction, the fallacy report,
    /// and the previous iteration's feedback injected verbatim.
    pub fn reconstruct(
        &self,
        input: &ArgumentInput,
        fallacy: &FallacyReport,
        feedback: &[Feedback],
        trace: &mut PipelineTrace,
    ) -> Result<Reconstruction, PipelineError> {
        let mut bindings = self.input_bindings(input);
        bindings.insert("SCHEME_SECTION".into(), self.scheme_section());
        bindings.insert("FALLACY_SECTION".into(), self.fallacy_section(fallacy));
        bindings.insert("FEEDBACK_SECTION".into(), feedback_section(feedback));
        let success = self
            .call_llm(trace, &self.prompts.reconstruct, bindings, parse_reconstruction)
            .map_err(|e| self.fatal(StageId::Reconstruction, e))?;
        let reconstruction = success.value;
        trace.push_stage(
            StageRecord {
                stage: StageId::Reconstruction,
                prompt_hash: String::new(),
                raw_response: success.raw,
                parsed: json!(reconstruction),
                verdicts: serde_json::Value::Null,
                feedback: Vec::new(),
                attempts: success.attempts,
            }
            .prompt_of(&success.prompt),
        );
        Ok(reconstruction)
    }

    /// Stage 3: formalization. Labels must cover the reconstruction exactly;
    /// model-proposed extra premises become `SolverAddition` feedback rather
    /// than silent insertions, and persistent formula syntax errors reroute
    /// as invalidity feedback instead of aborting.
    pub fn formalize(
        &self,
        reconstruction: &Reconstruction,
        trace: &mut PipelineTrace,
    ) -> Result<Flow<(Formalization, Vec<Feedback>)>, PipelineError> {
        let premise_lines = reconstruction
            .premises
            .iter()
            .map(|p| {
                if p.implicit {
                    format!("{}: (Implicit) {}", p.label, p.text)
                } else {
                    format!("{}: {}", p.label, p.text)
                }
            })
            .collect::<Vec<_>>()
            .join("\n");
        let bindings = [
            ("PREMISES".to_string(), premise_lines),
            ("CONCLUSION".to_string(), reconstruction.conclusion.clone()),
        ]
        .into_iter()
        .collect();

        let expected: Vec<&str> = reconstruction
            .premises
            .iter()
            .map(|p| p.label.as_str())
            .collect();
        let parse = |text: &str| -> Result<Formalization, ParseError> {
            let formalization = parse_formalization(text)?;
            let got = formalization.premises.labels();
            let missing: Vec<&str> = expected
                .iter()
                .filter(|l| !got.iter().any(|g| g == *l))
                .copied()
                .collect();
            if !missing.is_empty() {
                return Err(ParseError::new(
                    "## Formalized Premises",
                    format!("missing formalizations for {}", missing.join(", ")),
                ));
            }
            if let Err(missing_keys) = formalization.check_key_coverage() {
                return Err(ParseError::new(
                    "keys",
                    format!("symbols without keys: {}", missing_keys.join(", ")),
                ));
            }
            Ok(formalization)
        };

        let success = match self.call_llm(trace, &self.prompts.formalize, bindings, parse) {
            Ok(s) => s,
            Err(StageCallError::ParseFailed {
                error,
                prompt,
                raw,
                attempts,
            }) if error.section == "fol-syntax" => {
                let feedback = Feedback {
                    kind: FeedbackKind::Invalidity,
                    message: format!(
                        "the formalization could not be parsed as first-order logic ({}); \
                         reconstruct with premises that admit a clean formalization",
                        error.detail
                    ),
                };
                trace.push_stage(
                    StageRecord {
                        stage: StageId::Formalization,
                        prompt_hash: String::new(),
                        raw_response: raw,
                        parsed: serde_json::Value::Null,
                        verdicts: json!({ "error": error.to_string() }),
                        feedback: vec![feedback.clone()],
                        attempts,
                    }
                    .prompt_of(&prompt),
                );
                return Ok(Flow::Reroute(vec![feedback]));
            }
            Err(e) => return Err(self.fatal_formalize(e)),
        };

        let formalization = success.value;
        // Keep exactly the reconstruction's labels, in reconstruction order;
        // surplus model-proposed premises are surfaced as feedback.
        let mut extra_feedback = Vec::new();
        let extras: Vec<String> = formalization
            .premises
            .labels()
            .into_iter()
            .filter(|l| !expected.contains(&l.as_str()))
            .collect();
        let final_premises = if extras.is_empty() {
            formalization.premises.clone()
        } else {
            extra_feedback.push(Feedback {
                kind: FeedbackKind::SolverAddition,
                message: format!(
                    "the formalization stage proposed additional premises ({}); if they are \
                     needed for the inference, add them to the reconstruction explicitly",
                    extras.join(", ")
                ),
            });
            let keep: Vec<_> = formalization
                .premises
                .iter()
                .filter(|p| expected.contains(&p.label.as_str()))
                .cloned()
                .collect();
            LabeledPremises::new(keep).expect("labels were unique before filtering")
        };
        let formalization = Formalization {
            keys: formalization.keys,
            premises: final_premises,
            conclusion: formalization.conclusion,
        };
        trace.push_stage(
            StageRecord {
                stage: StageId::Formalization,
                prompt_hash: String::new(),
                raw_response: success.raw,
                parsed: json!(formalization),
                verdicts: serde_json::Value::Null,
                feedback: extra_feedback.clone(),
                attempts: success.attempts,
            }
            .prompt_of(&success.prompt),
        );
        Ok(Flow::Proceed((formalization, extra_feedback)))
    }

    /// Stage 4 (native): validity judgment and premise pruning.
    fn validity_stage(
        &self,
        formalization: &Formalization,
        trace: &mut PipelineTrace,
    ) -> Flow<Formalization> {
        let verdict = solver::check_validity(&formalization.premises, &formalization.conclusion);
        match verdict {
            Err(err) => {
                let feedback = Feedback {
                    kind: FeedbackKind::Invalidity,
                    message: format!(
                        "the validity of the formalization could not be decided ({err}); \
                         reconstruct with premises that stay in the function-free fragment"
                    ),
                };
                trace.push_stage(StageRecord {
                    stage: StageId::ValidityAndPruning,
                    prompt_hash: String::new(),
                    raw_response: String::new(),
                    parsed: json!({ "error": err.to_string() }),
                    verdicts: json!("Error"),
                    feedback: vec![feedback.clone()],
                    attempts: 0,
                });
                Flow::Reroute(vec![feedback])
            }
            Ok(v) if !v.is_valid() => {
                let countermodel = v.countermodel.clone().unwrap_or_default();
                let rendering = countermodel
                    .iter()
                    .map(|(atom, value)| format!("{atom}={value}"))
                    .collect::<Vec<_>>()
                    .join(", ");
                let feedback = Feedback {
                    kind: FeedbackKind::Invalidity,
                    message: format!(
                        "the premises do not deductively imply the conclusion; \
                         countermodel: {rendering}. Add the implicit premises needed to \
                         close this gap"
                    ),
                };
                trace.push_stage(StageRecord {
                    stage: StageId::ValidityAndPruning,
                    prompt_hash: String::new(),
                    raw_response: String::new(),
                    parsed: json!({ "status": "Invalid", "countermodel": countermodel }),
                    verdicts: json!("Invalid"),
                    feedback: vec![feedback.clone()],
                    attempts: 0,
                });
                Flow::Reroute(vec![feedback])
            }
            Ok(_) => {
                if !self.config.toggles.pruning {
                    trace.push_stage(StageRecord {
                        stage: StageId::ValidityAndPruning,
                        prompt_hash: String::new(),
                        raw_response: String::new(),
                        parsed: json!({ "status": "Valid", "pruning": "disabled" }),
                        verdicts: json!("Valid"),
                        feedback: Vec::new(),
                        attempts: 0,
                    });
                    return Flow::Proceed(formalization.clone());
                }
                match solver::minimal_premise_sets(
                    &formalization.premises,
                    &formalization.conclusion,
                    self.config.premise_cap,
                ) {
                    Ok(result) => {
                        let keep: Vec<&str> = result.union.iter().map(String::as_str).collect();
                        let pruned_away: Vec<String> = formalization
                            .premises
                            .labels()
                            .into_iter()
                            .filter(|l| !keep.contains(&l.as_str()))
                            .collect();
                        let kept: Vec<_> = formalization
                            .premises
                            .iter()
                            .filter(|p| keep.contains(&p.label.as_str()))
                            .cloned()
                            .collect();
                        let pruned = Formalization {
                            keys: formalization.keys.clone(),
                            premises: LabeledPremises::new(kept)
                                .expect("labels were unique before filtering"),
                            conclusion: formalization.conclusion.clone(),
                        };
                        trace.push_stage(StageRecord {
                            stage: StageId::ValidityAndPruning,
                            prompt_hash: String::new(),
                            raw_response: String::new(),
                            parsed: json!({
                                "status": "Valid",
                                "minimal_sets": result.minimal_sets,
                                "union": result.union,
                                "exact": result.exact,
                                "pruned": pruned_away,
                            }),
                            verdicts: json!("Valid"),
                            feedback: Vec::new(),
                            attempts: 0,
                        });
                        Flow::Proceed(pruned)
                    }
                    Err(SolverError::NotValid) => unreachable!("validity was just established"),
                    Err(err) => {
                        let feedback = Feedback {
                            kind: FeedbackKind::Invalidity,
                            message: format!("premise pruning failed ({err})"),
                        };
                        trace.push_stage(StageRecord {
                            stage: StageId::ValidityAndPruning,
                            prompt_hash: String::new(),
                            raw_response: String::new(),
                            parsed: json!({ "error": err.to_string() }),
                            verdicts: json!("Error"),
                            feedback: vec![feedback.clone()],
                            attempts: 0,
                        });
                        Flow::Reroute(vec![feedback])
                    }
                }
            }
        }
    }

    /// Stage 5: streamlining, one NL sentence per retained formula. Implicit
    /// flags carry over from the reconstruction by label.
    pub fn streamline(
        &self,
        reconstruction: &Reconstruction,
        formalization: &Formalization,
        trace: &mut PipelineTrace,
    ) -> Result<Reconstruction, PipelineError> {
        let definition = formalization
            .keys
            .0
            .iter()
            .map(|(symbol, phrase)| format!("{symbol} = {phrase}"))
            .collect::<Vec<_>>()
            .join("\n");
        let premises = formalization
            .premises
            .iter()
            .map(|p| format!("{}: {}", p.label, render_formula(&p.formula, RenderStyle::Unicode)))
            .collect::<Vec<_>>()
            .join("\n");
        let conclusion = format!(
            "C: {}",
            render_formula(&formalization.conclusion, RenderStyle::Unicode)
        );
        let bindings = [
            ("DEFINITION".to_string(), definition),
            ("PREMISES".to_string(), premises),
            ("CONCLUSION".to_string(), conclusion),
        ]
        .into_iter()
        .collect();

        let expected = formalization.premises.labels();
        let parse = |text: &str| -> Result<(Vec<(String, String)>, String), ParseError> {
            let (premises, conclusion) = parse_streamline(text)?;
            let got: Vec<&String> = premises.iter().map(|(l, _)| l).collect();
            let missing: Vec<&str> = expected
                .iter()
                .filter(|l| !got.contains(l))
                .map(String::as_str)
                .collect();
            if !missing.is_empty() {
                return Err(ParseError::new(
                    "### NL Premises",
                    format!("missing NL descriptions for {}", missing.join(", ")),
                ));
            }
            Ok((premises, conclusion))
        };
        let success = self
            .call_llm(trace, &self.prompts.streamline, bindings, parse)
            .map_err(|e| self.fatal(StageId::Streamlining, e))?;
        let (nl_premises, nl_conclusion) = success.value;

        let by_label: BTreeMap<&str, &str> = nl_premises
            .iter()
            .map(|(l, t)| (l.as_str(), t.as_str()))
            .collect();
        let streamlined = Reconstruction {
            premises: expected
                .iter()
                .map(|label| Premise {
                    label: label.clone(),
                    text: by_label[label.as_str()].to_string(),
                    implicit: reconstruction
                        .premise(label)
                        .map(|p| p.implicit)
                        .unwrap_or(false),
                })
                .collect(),
            intermediate_conclusions: Vec::new(),
            conclusion: nl_conclusion,
            connections: String::new(),
        };
        trace.push_stage(
            StageRecord {
                stage: StageId::Streamlining,
                prompt_hash: String::new(),
                raw_response: success.raw,
                parsed: json!(streamlined),
                verdicts: serde_json::Value::Null,
                feedback: Vec::new(),
                attempts: success.attempts,
            }
            .prompt_of(&success.prompt),
        );
        Ok(streamlined)
    }

    /// Stage 6: faithfulness judgment over the enabled criteria (or the
    /// coarse single criterion when fine-grained judging is toggled off).
    pub fn judge_faithfulness(
        &self,
        input: &ArgumentInput,
        streamlined: &Reconstruction,
        fallacy: &FallacyReport,
        trace: &mut PipelineTrace,
    ) -> Result<FaithfulnessJudgment, PipelineError> {
        let mut bindings = self.input_bindings(input);
        bindings.insert(
            "PREMISES".into(),
            streamlined
                .premises
                .iter()
                .map(|p| format!("{}: {}", p.label, p.text))
                .collect::<Vec<_>>()
                .join("\n"),
        );
        bindings.insert("CONCLUSION".into(), streamlined.conclusion.clone());
        // Only the detected type reaches the judge, not the rationale text.
        bindings.insert("ARG_TYPE".into(), fallacy.type_phrase());

        let fine = self.config.toggles.fine_grained_faithfulness;
        let criteria: Vec<Criterion> = if fine {
            self.config.toggles.criteria.iter().copied().collect()
        } else {
            Vec::new()
        };
        let template = if fine {
            bindings.insert(
                "CRITERIA_SECTION".into(),
                criteria
                    .iter()
                    .map(|&c| self.prompts.criterion_block(c).trim_end().to_string())
                    .collect::<Vec<_>>()
                    .join("\n"),
            );
            bindings.insert(
                "VERDICT_FORMAT".into(),
                criteria
                    .iter()
                    .map(|c| format!("{}: [Yes or No - explain if No]", c.name()))
                    .collect::<Vec<_>>()
                    .join("\n"),
            );
            &self.prompts.faithfulness
        } else {
            &self.prompts.faithfulness_coarse
        };

        let parse = |text: &str| parse_faithfulness(text, &criteria);
        let success = self
            .call_llm(trace, template, bindings, parse)
            .map_err(|e| self.fatal(StageId::FaithfulnessJudgment, e))?;
        let judgment = success.value;
        trace.push_stage(
            StageRecord {
                stage: StageId::FaithfulnessJudgment,
                prompt_hash: String::new(),
                raw_response: success.raw,
                parsed: serde_json::Value::Null,
                verdicts: json!(judgment),
                feedback: Vec::new(),
                attempts: success.attempts,
            }
            .prompt_of(&success.prompt),
        );
        Ok(judgment)
    }

    // --- helpers ---

    fn input_bindings(&self, input: &ArgumentInput) -> BTreeMap<String, String> {
        [
            ("TOPIC".to_string(), input.topic.clone()),
            ("ARGUMENT".to_string(), input.argument.clone()),
            (
                "BACKGROUND_SECTION".to_string(),
                input
                    .background
                    .as_ref()
                    .map(|b| format!("# Background\n{b}\n\n"))
                    .unwrap_or_default(),
            ),
        ]
        .into_iter()
        .collect()
    }

    fn scheme_section(&self) -> String {
        if !self.config.toggles.scheme_instruction {
            return String::new();
        }
        format!(
            "## Argument Types\n{}\n\n## Reconstruction Guidelines Based on Argument Types\n{}\n\n",
            self.catalog.definitions_text(),
            self.catalog.templates_text()
        )
    }

    fn fallacy_section(&self, fallacy: &FallacyReport) -> String {
        if !self.config.toggles.fallacy_path {
            return String::new();
        }
        format!(
            "## Fallacy Detection Result\n{}\n\n",
            fallacy_section_body(fallacy)
        )
    }

    /// One LLM round trip with parsing; on a parse failure, one reprompt
    /// with a format reminder, then the error is handed to the caller.
    fn call_llm<T>(
        &self,
        trace: &mut PipelineTrace,
        template: &PromptTemplate,
        bindings: BTreeMap<String, String>,
        parse: impl Fn(&str) -> Result<T, ParseError>,
    ) -> Result<StageSuccess<T>, StageCallError> {
        let prompt = render_prompt(template, &bindings).map_err(StageCallError::Backend)?;
        let request = CompletionRequest {
            template: template.name.clone(),
            bindings: bindings.clone(),
            prompt: prompt.clone(),
            model: self.model.clone(),
            params: self.params.clone(),
        };
        trace.llm_calls += 1;
        let response = self
            .backend
            .complete(&request)
            .map_err(StageCallError::Backend)?;
        match parse(&response.text) {
            Ok(value) => Ok(StageSuccess {
                value,
                prompt,
                raw: response.text,
                attempts: 1,
            }),
            Err(first_error) => {
                // One format-reminder reprompt per stage call.
                let reminder_template = PromptTemplate::new(
                    template.name.clone(),
                    format!("{}\n\n# Format Reminder\n[[REMINDER]]\n", template.body),
                );
                let mut reminder_bindings = bindings;
                reminder_bindings.insert(
                    "REMINDER".into(),
                    format!(
                        "Your previous response could not be parsed ({first_error}). \
                         Respond again, following the required output format exactly."
                    ),
                );
                let prompt = render_prompt(&reminder_template, &reminder_bindings)
                    .map_err(StageCallError::Backend)?;
                let request = CompletionRequest {
                    template: reminder_template.name.clone(),
                    bindings: reminder_bindings,
                    prompt: prompt.clone(),
                    model: self.model.clone(),
                    params: self.params.clone(),
                };
                trace.llm_calls += 1;
                let response = self
                    .backend
                    .complete(&request)
                    .map_err(StageCallError::Backend)?;
                match parse(&response.text) {
                    Ok(value) => Ok(StageSuccess {
                        value,
                        prompt,
                        raw: response.text,
                        attempts: 2,
                    }),
                    Err(error) => Err(StageCallError::ParseFailed {
                        error,
                        prompt,
                        raw: response.text,
                        attempts: 2,
                    }),
                }
            }
        }
    }

    fn fatal(&self, stage: StageId, err: StageCallError) -> PipelineError {
        match err {
            StageCallError::Backend(source) => PipelineError::Backend { stage, source },
            StageCallError::ParseFailed { error, .. } => {
                PipelineError::UnparseableResponse { stage, source: error }
            }
        }
    }

    fn fatal_formalize(&self, err: StageCallError) -> PipelineError {
        match err {
            StageCallError::ParseFailed { error, .. } if error.section == "keys" => {
                PipelineError::KeyCoverage {
                    detail: error.detail,
                }
            }
            other => self.fatal(StageId::Formalization, other),
        }
    }
}

fn fallacy_section_body(fallacy: &FallacyReport) -> String {
    if fallacy.none_detected() {
        return "No fallacy was detected. Reconstruct the argument in a deductively valid form."
            .to_string();
    }
    let mut lines = Vec::new();
    if let Some(f) = &fallacy.formal {
        lines.push(format!("Formal fallacy — {}: {}", f.name, f.rationale));
    }
    for f in &fallacy.informal {
        lines.push(format!("Informal fallacy — {}: {}", f.name, f.rationale));
    }
    if fallacy.has_formal() {
        lines.push(
            "Reconstruct the argument so that it preserves this formally fallacious \
             inference pattern; the reconstruction should not be deductively valid."
                .to_string(),
        );
    } else {
        lines.push(
            "Reconstruct the fallacious reasoning faithfully, in a deductively valid form."
                .to_string(),
        );
    }
    lines.join("\n")
}

fn feedback_section(feedback: &[Feedback]) -> String {
    if feedback.is_empty() {
        return String::new();
    }
    let lines = feedback
        .iter()
        .map(|f| format!("- [{:?}] {}", f.kind, f.message))
        .collect::<Vec<_>>()
        .join("\n");
    format!(
        "## Feedback on the Previous Reconstruction\nRevise the reconstruction to address \
         the following feedback:\n{lines}\n\n"
    )
}
