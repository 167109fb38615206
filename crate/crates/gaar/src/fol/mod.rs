//! First-order formula AST, parser, and renderer.
//!
//! This is the formalization syntax the engine's prompts elicit: function-free
//! first-order sentences over named predicates and constants, written either
//! with Unicode connectives (`∀x [P(x) → M(x)]`) or ASCII spellings
//! (`forall x [P(x) -> M(x)]`). Applied symbols are predicates; bare argument
//! names are variables when bound by an enclosing quantifier and constants
//! otherwise. There are no function symbols.

mod parse;
mod render;

pub use parse::parse_formula;
pub use render::{render_formula, RenderStyle};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Errors from parsing or signature construction.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FolError {
    /// Malformed input, with the byte offset of the offending token.
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    /// The same predicate symbol was used with two different arities.
    #[error("arity conflict for predicate '{predicate}': used with {first} and {second} arguments")]
    Arity {
        predicate: String,
        first: usize,
        second: usize,
    },
}

/// A term is either a constant or a quantifier-bound variable.
///
/// The two namespaces are disjoint within one formalization: a name is a
/// variable exactly when an enclosing quantifier binds it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Constant(String),
    Variable(String),
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        Term::Constant(name.into())
    }

    pub fn variable(name: impl Into<String>) -> Self {
        Term::Variable(name.into())
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Constant(n) | Term::Variable(n) => n,
        }
    }
}

/// A first-order formula over function-free terms.
///
/// `And` and `Or` are n-ary with at least two operands; nested conjunctions
/// are preserved structurally (the renderer brackets them rather than
/// flattening).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    Atom { predicate: String, args: Vec<Term> },
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    ForAll(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn atom(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Atom {
            predicate: predicate.into(),
            args,
        }
    }

    /// A 0-ary (propositional) atom.
    pub fn prop(predicate: impl Into<String>) -> Self {
        Formula::atom(predicate, vec![])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    /// n-ary conjunction. A single operand collapses to itself.
    ///
    /// Panics on an empty operand list; there is no nullary conjunction in
    /// this syntax.
    pub fn and(mut fs: Vec<Formula>) -> Self {
        assert!(!fs.is_empty(), "And requires at least one operand");
        if fs.len() == 1 {
            fs.pop().unwrap()
        } else {
            Formula::And(fs)
        }
    }

    /// n-ary disjunction, same operand rules as [`Formula::and`].
    pub fn or(mut fs: Vec<Formula>) -> Self {
        assert!(!fs.is_empty(), "Or requires at least one operand");
        if fs.len() == 1 {
            fs.pop().unwrap()
        } else {
            Formula::Or(fs)
        }
    }

    pub fn implies(self, consequent: Formula) -> Self {
        Formula::Implies(Box::new(self), Box::new(consequent))
    }

    pub fn iff(self, other: Formula) -> Self {
        Formula::Iff(Box::new(self), Box::new(other))
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Self {
        Formula::ForAll(var.into(), Box::new(body))
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(var.into(), Box::new(body))
    }

    /// Free variables of the formula. Solver inputs must be closed (empty set).
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut free = BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut free);
        free
    }

    pub fn is_closed(&self) -> bool {
        self.free_variables().is_empty()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render_formula(self, RenderStyle::Unicode))
    }
}

fn collect_free(f: &Formula, bound: &mut Vec<String>, free: &mut BTreeSet<String>) {
    match f {
        Formula::Atom { args, .. } => {
            for t in args {
                if let Term::Variable(v) = t {
                    if !bound.iter().any(|b| b == v) {
                        free.insert(v.clone());
                    }
                }
            }
        }
        Formula::Not(inner) => collect_free(inner, bound, free),
        Formula::And(fs) | Formula::Or(fs) => {
            for g in fs {
                collect_free(g, bound, free);
            }
        }
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect_free(a, bound, free);
            collect_free(b, bound, free);
        }
        Formula::ForAll(v, body) | Formula::Exists(v, body) => {
            bound.push(v.clone());
            collect_free(body, bound, free);
            bound.pop();
        }
    }
}

/// Predicate arities and constant symbols of a formula set, derived
/// deterministically. Arity conflicts are construction errors.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Signature {
    pub predicates: BTreeMap<String, usize>,
    pub constants: BTreeSet<String>,
}

impl Signature {
    /// All symbols (predicates then constants) that a key map must cover.
    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.predicates
            .keys()
            .map(String::as_str)
            .chain(self.constants.iter().map(String::as_str))
    }
}

/// Derive the signature of a formula set.
pub fn signature_of<'a>(
    formulas: impl IntoIterator<Item = &'a Formula>,
) -> Result<Signature, FolError> {
    let mut sig = Signature::default();
    for f in formulas {
        extend_signature(f, &mut sig)?;
    }
    Ok(sig)
}

fn extend_signature(f: &Formula, sig: &mut Signature) -> Result<(), FolError> {
    match f {
        Formula::Atom { predicate, args } => {
            if let Some(&known) = sig.predicates.get(predicate) {
                if known != args.len() {
                    return Err(FolError::Arity {
                        predicate: predicate.clone(),
                        first: known,
                        second: args.len(),
                    });
                }
            } else {
                sig.predicates.insert(predicate.clone(), args.len());
            }
            for t in args {
                if let Term::Constant(c) = t {
                    sig.constants.insert(c.clone());
                }
            }
            Ok(())
        }
        Formula::Not(inner) => extend_signature(inner, sig),
        Formula::And(fs) | Formula::Or(fs) => {
            for g in fs {
                extend_signature(g, sig)?;
            }
            Ok(())
        }
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            extend_signature(a, sig)?;
            extend_signature(b, sig)
        }
        Formula::ForAll(_, body) | Formula::Exists(_, body) => extend_signature(body, sig),
    }
}

/// Map from predicate/constant symbols to the natural-language phrases they
/// stand for. Every symbol occurring in the associated formula set must have
/// exactly one nonempty entry.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SymbolKeys(pub BTreeMap<String, String>);

impl SymbolKeys {
    pub fn insert(&mut self, symbol: impl Into<String>, phrase: impl Into<String>) {
        self.0.insert(symbol.into(), phrase.into());
    }

    pub fn get(&self, symbol: &str) -> Option<&str> {
        self.0.get(symbol).map(String::as_str)
    }

    /// Symbols of `sig` that have no key, or whose phrase is empty.
    pub fn missing_for(&self, sig: &Signature) -> Vec<String> {
        sig.symbols()
            .filter(|s| self.get(s).is_none_or(|p| p.trim().is_empty()))
            .map(str::to_owned)
            .collect()
    }
}
