//! Deductive validity and minimal-premise-set computation.
//!
//! A reconstruction's premises deductively imply its conclusion iff
//! `premises ∧ ¬conclusion` is unsatisfiable over the Herbrand universe of the
//! problem's constants. The procedure: negate the conclusion, convert
//! everything to negation normal form, Skolemize (rejecting anything that
//! would need a Skolem symbol of arity ≥ 1), instantiate universals over the
//! constant set, convert to CNF, and run a propositional SAT solver. This is
//! sound and complete for the function-free fragment whose sentences
//! Skolemize with constants only (effectively Bernays–Schönfinkel); anything
//! outside it fails loudly with [`SolverError::UnsupportedFragment`].
//!
//! On top of the validity decision sits the premise pruner: it enumerates all
//! minimal valid premise subsets in increasing size, skipping supersets of
//! already-found minimal sets, and keeps exactly the premises that occur in
//! at least one minimal set.

mod ground;
mod sat;

pub use ground::{ground, sat, AtomEntry, GroundClauseSet};
pub use sat::SatOutcome;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::fol::{FolError, Formula};
use ground::GroundedProblem;

/// Default cap on exact minimal-set enumeration. Above this premise count the
/// deletion-based fallback computes a single minimal set instead.
pub const DEFAULT_ENUMERATION_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error(transparent)]
    Fol(#[from] FolError),
    /// The formula set leaves the decidable fragment: an existential would
    /// need a Skolem symbol of arity ≥ 1.
    #[error("unsupported fragment: {0}")]
    UnsupportedFragment(String),
    /// Solver inputs must be closed sentences.
    #[error("formula '{label}' is not closed: free variables {free:?}")]
    NotClosed { label: String, free: Vec<String> },
    #[error("duplicate premise label '{0}'")]
    DuplicateLabel(String),
    /// Minimal-set enumeration is undefined when the full set is not valid.
    #[error("the full premise set does not entail the conclusion")]
    NotValid,
    #[error("exact enumeration over {premises} premises exceeds the cap of {cap}")]
    CapExceeded { premises: usize, cap: usize },
}

/// One labeled premise of a reconstruction, e.g. `P1: L(C)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPremise {
    pub label: String,
    pub formula: Formula,
}

/// An ordered premise list with unique labels, in reconstruction order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPremises(Vec<LabeledPremise>);

impl LabeledPremises {
    pub fn new(premises: Vec<LabeledPremise>) -> Result<Self, SolverError> {
        let mut seen = BTreeSet::new();
        for p in &premises {
            if !seen.insert(p.label.clone()) {
                return Err(SolverError::DuplicateLabel(p.label.clone()));
            }
        }
        Ok(LabeledPremises(premises))
    }

    pub fn from_pairs<L>(pairs: impl IntoIterator<Item = (L, Formula)>) -> Result<Self, SolverError>
    where
        L: Into<String>,
    {
        Self::new(
            pairs
                .into_iter()
                .map(|(l, f)| LabeledPremise {
                    label: l.into(),
                    formula: f,
                })
                .collect(),
        )
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledPremise> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.0.iter().map(|p| p.label.clone()).collect()
    }

    pub fn formulas(&self) -> Vec<&Formula> {
        self.0.iter().map(|p| &p.formula).collect()
    }

    pub fn get(&self, idx: usize) -> Option<&LabeledPremise> {
        self.0.get(idx)
    }
}

impl<'a> IntoIterator for &'a LabeledPremises {
    type Item = &'a LabeledPremise;
    type IntoIter = std::slice::Iter<'a, LabeledPremise>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValidityStatus {
    Valid,
    Invalid,
}

/// Outcome of a validity check. An `Invalid` verdict carries a countermodel:
/// a truth assignment to the ground atoms that satisfies every premise and
/// falsifies the conclusion under Herbrand semantics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityVerdict {
    pub status: ValidityStatus,
    pub countermodel: Option<BTreeMap<String, bool>>,
}

impl ValidityVerdict {
    pub fn is_valid(&self) -> bool {
        self.status == ValidityStatus::Valid
    }
}

/// All minimal valid premise subsets and their union, labels in premise order.
///
/// `exact` is false only when the enumeration cap was hit and the
/// deletion-based fallback produced a single minimal set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalSetsResult {
    pub minimal_sets: Vec<BTreeSet<String>>,
    pub union: Vec<String>,
    pub exact: bool,
}

/// Decide whether the premises deductively imply the conclusion.
///
/// All formulas must be closed and arity-consistent. Problems without any
/// constant get one fresh constant injected so the Herbrand universe is
/// nonempty. Inconsistent premises validate any conclusion (classical
/// explosion); that is the intended semantics, not a defect.
pub fn check_validity(
    premises: &LabeledPremises,
    conclusion: &Formula,
) -> Result<ValidityVerdict, SolverError> {
    let problem = GroundedProblem::build(premises, conclusion)?;
    Ok(problem.check_all())
}

/// Enumerate all minimal valid premise subsets, by increasing size, skipping
/// supersets of already-found minimal sets. Above `cap` premises the
/// deletion-based fallback runs instead and the result is marked inexact.
pub fn minimal_premise_sets(
    premises: &LabeledPremises,
    conclusion: &Formula,
    cap: usize,
) -> Result<MinimalSetsResult, SolverError> {
    minimal_sets_impl(premises, conclusion, cap, false)
}

/// Like [`minimal_premise_sets`] but errors with [`SolverError::CapExceeded`]
/// instead of falling back when the premise count exceeds `cap`.
pub fn minimal_premise_sets_strict(
    premises: &LabeledPremises,
    conclusion: &Formula,
    cap: usize,
) -> Result<MinimalSetsResult, SolverError> {
    minimal_sets_impl(premises, conclusion, cap, true)
}

fn minimal_sets_impl(
    premises: &LabeledPremises,
    conclusion: &Formula,
    cap: usize,
    strict: bool,
) -> Result<MinimalSetsResult, SolverError> {
    let n = premises.len();
    let problem = GroundedProblem::build(premises, conclusion)?;
    if !problem.check_all().is_valid() {
        return Err(SolverError::NotValid);
    }
    if n > cap {
        if strict {
            return Err(SolverError::CapExceeded { premises: n, cap });
        }
        let kept = deletion_minimal_set(&problem, n);
        let set: BTreeSet<String> = kept
            .iter()
            .map(|&i| premises.get(i).unwrap().label.clone())
            .collect();
        return Ok(MinimalSetsResult {
            union: kept
                .iter()
                .map(|&i| premises.get(i).unwrap().label.clone())
                .collect(),
            minimal_sets: vec![set],
            exact: false,
        });
    }

    let mut minimal: Vec<Vec<usize>> = Vec::new();
    // An unsatisfiable negated conclusion makes even the empty subset valid.
    if problem.check_subset(&[]).is_valid() {
        minimal.push(vec![]);
    } else {
        for size in 1..=n {
            let mut combo: Vec<usize> = (0..size).collect();
            loop {
                let is_superset = minimal
                    .iter()
                    .any(|m| m.iter().all(|i| combo.binary_search(i).is_ok()));
                if !is_superset && problem.check_subset(&combo).is_valid() {
                    minimal.push(combo.clone());
                }
                if !next_combination(&mut combo, n) {
                    break;
                }
            }
        }
    }

    let mut union_idx: BTreeSet<usize> = BTreeSet::new();
    for m in &minimal {
        union_idx.extend(m.iter().copied());
    }
    Ok(MinimalSetsResult {
        minimal_sets: minimal
            .iter()
            .map(|m| {
                m.iter()
                    .map(|&i| premises.get(i).unwrap().label.clone())
                    .collect()
            })
            .collect(),
        union: union_idx
            .iter()
            .map(|&i| premises.get(i).unwrap().label.clone())
            .collect(),
        exact: true,
    })
}

/// Advance `combo` to the next k-combination of `0..n` in lexicographic
/// order; returns false when exhausted.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn deletion_minimal_set(problem: &GroundedProblem, n: usize) -> Vec<usize> {
    let mut kept: Vec<usize> = (0..n).collect();
    let mut i = 0;
    while i < kept.len() {
        let mut candidate = kept.clone();
        candidate.remove(i);
        if problem.check_subset(&candidate).is_valid() {
            kept = candidate;
        } else {
            i += 1;
        }
    }
    kept
}

/// Remove premises that occur in no minimal valid subset, preserving order.
pub fn prune(
    premises: &LabeledPremises,
    conclusion: &Formula,
) -> Result<LabeledPremises, SolverError> {
    prune_with_cap(premises, conclusion, DEFAULT_ENUMERATION_CAP)
}

pub fn prune_with_cap(
    premises: &LabeledPremises,
    conclusion: &Formula,
    cap: usize,
) -> Result<LabeledPremises, SolverError> {
    let result = minimal_premise_sets(premises, conclusion, cap)?;
    let keep: BTreeSet<&str> = result.union.iter().map(String::as_str).collect();
    Ok(LabeledPremises(
        premises
            .iter()
            .filter(|p| keep.contains(p.label.as_str()))
            .cloned()
            .collect(),
    ))
}
