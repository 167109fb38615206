//! GAAR: a staged argument-reconstruction engine.
//!
//! The engine turns free-text arguments into labeled premise–conclusion
//! structures by orchestrating an LLM through six stages (fallacy detection,
//! reconstruction, formalization, validity judgment & pruning, streamlining,
//! faithfulness judgment). Validity and premise pruning are decided natively
//! by a first-order logic checker over the function-free fragment, not by
//! model-emitted solver programs.
//!
//! Modules:
//! - [`fol`] — first-order formula AST, parser, and renderer
//! - [`solver`] — validity decision and minimal-premise-set enumeration
//! - [`llm`] — backend abstraction, prompt templates, record/replay cassettes
//! - [`pipeline`] — the six-stage loop with feedback routing
//! - [`eval`] — winning rates, Bradley–Terry ratings, TOPSIS, schedulers
//! - [`dataset`] — corpus records, statistics, splitting, batch runs

pub mod dataset;
pub mod eval;
pub mod fol;
pub mod llm;
pub mod pipeline;
pub mod solver;
