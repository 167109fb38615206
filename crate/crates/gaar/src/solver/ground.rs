//! Grounding: NNF conversion, constant-only Skolemization, universal
//! instantiation over the Herbrand universe, and CNF clause extraction.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::fol::{signature_of, Formula, Term};

use super::{
    LabeledPremises, SatOutcome, SolverError, ValidityStatus, ValidityVerdict,
};

/// Negation normal form over function-free terms. Implications and
/// biconditionals are gone; negation sits only on atoms.
#[derive(Debug, Clone)]
enum Nnf {
    Lit {
        positive: bool,
        predicate: String,
        args: Vec<Term>,
    },
    And(Vec<Nnf>),
    Or(Vec<Nnf>),
    ForAll(String, Box<Nnf>),
    Exists(String, Box<Nnf>),
}

fn to_nnf(f: &Formula, polarity: bool) -> Nnf {
    match f {
        Formula::Atom { predicate, args } => Nnf::Lit {
            positive: polarity,
            predicate: predicate.clone(),
            args: args.clone(),
        },
        Formula::Not(inner) => to_nnf(inner, !polarity),
        Formula::And(fs) => {
            let parts = fs.iter().map(|g| to_nnf(g, polarity)).collect();
            if polarity {
                Nnf::And(parts)
            } else {
                Nnf::Or(parts)
            }
        }
        Formula::Or(fs) => {
            let parts = fs.iter().map(|g| to_nnf(g, polarity)).collect();
            if polarity {
                Nnf::Or(parts)
            } else {
                Nnf::And(parts)
            }
        }
        Formula::Implies(a, b) => {
            if polarity {
                Nnf::Or(vec![to_nnf(a, false), to_nnf(b, true)])
            } else {
                Nnf::And(vec![to_nnf(a, true), to_nnf(b, false)])
            }
        }
        Formula::Iff(a, b) => {
            if polarity {
                // (a → b) ∧ (b → a)
                Nnf::And(vec![
                    Nnf::Or(vec![to_nnf(a, false), to_nnf(b, true)]),
                    Nnf::Or(vec![to_nnf(b, false), to_nnf(a, true)]),
                ])
            } else {
                // (a ∧ ¬b) ∨ (¬a ∧ b)
                Nnf::Or(vec![
                    Nnf::And(vec![to_nnf(a, true), to_nnf(b, false)]),
                    Nnf::And(vec![to_nnf(a, false), to_nnf(b, true)]),
                ])
            }
        }
        Formula::ForAll(v, body) => {
            if polarity {
                Nnf::ForAll(v.clone(), Box::new(to_nnf(body, true)))
            } else {
                Nnf::Exists(v.clone(), Box::new(to_nnf(body, false)))
            }
        }
        Formula::Exists(v, body) => {
            if polarity {
                Nnf::Exists(v.clone(), Box::new(to_nnf(body, true)))
            } else {
                Nnf::ForAll(v.clone(), Box::new(to_nnf(body, false)))
            }
        }
    }
}

/// Replace existentials by fresh constants. Rejects existentials inside the
/// scope of a universal: those would need a Skolem function of arity ≥ 1.
fn skolemize(
    nnf: Nnf,
    under_universal: bool,
    fresh: &mut FreshConstants,
    origin: &str,
) -> Result<Nnf, SolverError> {
    match nnf {
        lit @ Nnf::Lit { .. } => Ok(lit),
        Nnf::And(parts) => Ok(Nnf::And(
            parts
                .into_iter()
                .map(|p| skolemize(p, under_universal, fresh, origin))
                .collect::<Result<_, _>>()?,
        )),
        Nnf::Or(parts) => Ok(Nnf::Or(
            parts
                .into_iter()
                .map(|p| skolemize(p, under_universal, fresh, origin))
                .collect::<Result<_, _>>()?,
        )),
        Nnf::ForAll(v, body) => Ok(Nnf::ForAll(
            v,
            Box::new(skolemize(*body, true, fresh, origin)?),
        )),
        Nnf::Exists(v, body) => {
            if under_universal {
                return Err(SolverError::UnsupportedFragment(format!(
                    "existential over '{v}' inside a universal scope in {origin} \
                     would need a non-nullary Skolem function"
                )));
            }
            let witness = fresh.next();
            let substituted = substitute(*body, &v, &witness);
            skolemize(substituted, false, fresh, origin)
        }
    }
}

/// Substitute the variable `var` by the constant `constant`, stopping at any
/// inner quantifier that rebinds the same name.
fn substitute(nnf: Nnf, var: &str, constant: &str) -> Nnf {
    match nnf {
        Nnf::Lit {
            positive,
            predicate,
            args,
        } => Nnf::Lit {
            positive,
            predicate,
            args: args
                .into_iter()
                .map(|t| match t {
                    Term::Variable(ref v) if v == var => Term::Constant(constant.to_string()),
                    other => other,
                })
                .collect(),
        },
        Nnf::And(parts) => Nnf::And(
            parts
                .into_iter()
                .map(|p| substitute(p, var, constant))
                .collect(),
        ),
        Nnf::Or(parts) => Nnf::Or(
            parts
                .into_iter()
                .map(|p| substitute(p, var, constant))
                .collect(),
        ),
        Nnf::ForAll(v, body) if v != var => {
            Nnf::ForAll(v, Box::new(substitute(*body, var, constant)))
        }
        Nnf::Exists(v, body) if v != var => {
            Nnf::Exists(v, Box::new(substitute(*body, var, constant)))
        }
        shadowed => shadowed,
    }
}

struct FreshConstants {
    taken: BTreeSet<String>,
    counter: usize,
    created: Vec<String>,
}

impl FreshConstants {
    fn new(taken: BTreeSet<String>) -> Self {
        FreshConstants {
            taken,
            counter: 0,
            created: Vec::new(),
        }
    }

    fn next(&mut self) -> String {
        loop {
            let name = format!("sk{}", self.counter);
            self.counter += 1;
            if self.taken.insert(name.clone()) {
                self.created.push(name.clone());
                return name;
            }
        }
    }
}

/// A ground propositional formula in NNF.
#[derive(Debug, Clone)]
enum Prop {
    Lit { positive: bool, atom: usize },
    And(Vec<Prop>),
    Or(Vec<Prop>),
}

/// One entry of the ground atom table. Auxiliary entries are definitional
/// atoms introduced during CNF conversion, not ground instances of the input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomEntry {
    pub name: String,
    pub aux: bool,
}

#[derive(Debug, Default)]
struct AtomTable {
    entries: Vec<AtomEntry>,
    index: HashMap<String, usize>,
}

impl AtomTable {
    /// Returns the 0-based atom id.
    fn intern(&mut self, name: String) -> usize {
        if let Some(&i) = self.index.get(&name) {
            return i;
        }
        let i = self.entries.len();
        self.index.insert(name.clone(), i);
        self.entries.push(AtomEntry { name, aux: false });
        i
    }

    fn fresh_aux(&mut self) -> usize {
        let i = self.entries.len();
        let name = format!("_d{i}");
        self.index.insert(name.clone(), i);
        self.entries.push(AtomEntry { name, aux: true });
        i
    }
}

fn atom_name(predicate: &str, args: &[String]) -> String {
    if args.is_empty() {
        predicate.to_string()
    } else {
        format!("{}({})", predicate, args.join(", "))
    }
}

/// Instantiate universals over the universe and intern ground atoms.
fn ground_nnf(
    nnf: &Nnf,
    universe: &[String],
    env: &mut Vec<(String, String)>,
    table: &mut AtomTable,
) -> Prop {
    match nnf {
        Nnf::Lit {
            positive,
            predicate,
            args,
        } => {
            let ground_args: Vec<String> = args
                .iter()
                .map(|t| match t {
                    Term::Constant(c) => c.clone(),
                    Term::Variable(v) => env
                        .iter()
                        .rev()
                        .find(|(name, _)| name == v)
                        .map(|(_, val)| val.clone())
                        .unwrap_or_else(|| v.clone()),
                })
                .collect();
            Prop::Lit {
                positive: *positive,
                atom: table.intern(atom_name(predicate, &ground_args)),
            }
        }
        Nnf::And(parts) => Prop::And(
            parts
                .iter()
                .map(|p| ground_nnf(p, universe, env, table))
                .collect(),
        ),
        Nnf::Or(parts) => Prop::Or(
            parts
                .iter()
                .map(|p| ground_nnf(p, universe, env, table))
                .collect(),
        ),
        Nnf::ForAll(v, body) => {
            let mut instances = Vec::with_capacity(universe.len());
            for c in universe {
                env.push((v.clone(), c.clone()));
                instances.push(ground_nnf(body, universe, env, table));
                env.pop();
            }
            match instances.len() {
                1 => instances.pop().unwrap(),
                _ => Prop::And(instances),
            }
        }
        Nnf::Exists(..) => unreachable!("existentials are eliminated by skolemization"),
    }
}

/// CNF extraction. Nodes that are already clausal convert directly; a
/// conjunction nested under a disjunction gets a definitional atom with
/// polarity-only (implication) clauses, which keeps the clause count linear
/// and preserves models on the original atoms.
fn clausify(p: &Prop, table: &mut AtomTable, clauses: &mut Vec<Vec<i32>>) {
    match p {
        Prop::And(parts) => {
            for part in parts {
                clausify(part, table, clauses);
            }
        }
        other => {
            let lits = disjunction_literals(other, table, clauses);
            push_clause(lits, clauses);
        }
    }
}

fn disjunction_literals(p: &Prop, table: &mut AtomTable, clauses: &mut Vec<Vec<i32>>) -> Vec<i32> {
    match p {
        Prop::Lit { positive, atom } => vec![encode(*atom, *positive)],
        Prop::Or(parts) => {
            let mut lits = Vec::new();
            for part in parts {
                match part {
                    Prop::And(_) => {
                        let def = define_aux(part, table, clauses);
                        lits.push(def);
                    }
                    _ => lits.extend(disjunction_literals(part, table, clauses)),
                }
            }
            lits
        }
        Prop::And(_) => vec![define_aux(p, table, clauses)],
    }
}

/// Introduce `d` with clauses for `d → p` and return the literal `d`.
fn define_aux(p: &Prop, table: &mut AtomTable, clauses: &mut Vec<Vec<i32>>) -> i32 {
    let d = table.fresh_aux();
    let Prop::And(parts) = p else {
        unreachable!("aux definitions are only introduced for conjunctions")
    };
    for part in parts {
        let mut lits = vec![-encode(d, true)];
        lits.extend(disjunction_literals(part, table, clauses));
        push_clause(lits, clauses);
    }
    encode(d, true)
}

fn push_clause(mut lits: Vec<i32>, clauses: &mut Vec<Vec<i32>>) {
    let mut seen = BTreeSet::new();
    lits.retain(|&l| seen.insert(l));
    if lits.iter().any(|&l| seen.contains(&-l)) {
        return; // tautology
    }
    clauses.push(lits);
}

/// 1-based DIMACS-style literal encoding.
fn encode(atom: usize, positive: bool) -> i32 {
    let v = (atom + 1) as i32;
    if positive {
        v
    } else {
        -v
    }
}

/// A grounded validity problem: per-premise clause groups plus the clauses of
/// the negated conclusion, over one shared atom table. Subset checks reuse
/// the grounding.
pub(super) struct GroundedProblem {
    table: AtomTable,
    premise_clauses: Vec<Vec<Vec<i32>>>,
    conclusion_clauses: Vec<Vec<i32>>,
}

impl GroundedProblem {
    pub(super) fn build(
        premises: &LabeledPremises,
        conclusion: &Formula,
    ) -> Result<Self, SolverError> {
        // Arity consistency across the whole problem.
        let mut all: Vec<&Formula> = premises.formulas();
        all.push(conclusion);
        let sig = signature_of(all.iter().copied())?;

        for p in premises {
            let free = p.formula.free_variables();
            if !free.is_empty() {
                return Err(SolverError::NotClosed {
                    label: p.label.clone(),
                    free: free.into_iter().collect(),
                });
            }
        }
        let free = conclusion.free_variables();
        if !free.is_empty() {
            return Err(SolverError::NotClosed {
                label: "conclusion".into(),
                free: free.into_iter().collect(),
            });
        }

        let mut fresh = FreshConstants::new(sig.constants.clone());
        let mut skolemized = Vec::with_capacity(premises.len() + 1);
        for p in premises {
            let nnf = to_nnf(&p.formula, true);
            skolemized.push(skolemize(nnf, false, &mut fresh, &p.label)?);
        }
        let negated = to_nnf(conclusion, false);
        let negated = skolemize(negated, false, &mut fresh, "the negated conclusion")?;

        // Herbrand universe: all constants, Skolem witnesses included; one
        // injected constant if there are none at all.
        let mut universe: Vec<String> = sig.constants.iter().cloned().collect();
        universe.extend(fresh.created.iter().cloned());
        if universe.is_empty() {
            universe.push("c0".to_string());
        }

        let mut table = AtomTable::default();
        let mut premise_clauses = Vec::with_capacity(premises.len());
        for nnf in &skolemized {
            let prop = ground_nnf(nnf, &universe, &mut Vec::new(), &mut table);
            let mut clauses = Vec::new();
            clausify(&prop, &mut table, &mut clauses);
            premise_clauses.push(clauses);
        }
        let prop = ground_nnf(&negated, &universe, &mut Vec::new(), &mut table);
        let mut conclusion_clauses = Vec::new();
        clausify(&prop, &mut table, &mut conclusion_clauses);

        Ok(GroundedProblem {
            table,
            premise_clauses,
            conclusion_clauses,
        })
    }

    pub(super) fn check_all(&self) -> ValidityVerdict {
        let all: Vec<usize> = (0..self.premise_clauses.len()).collect();
        self.check_subset(&all)
    }

    /// Validity of the premise subset given by indices (sorted or not).
    pub(super) fn check_subset(&self, subset: &[usize]) -> ValidityVerdict {
        let mut clauses: Vec<Vec<i32>> = Vec::new();
        for &i in subset {
            clauses.extend(self.premise_clauses[i].iter().cloned());
        }
        clauses.extend(self.conclusion_clauses.iter().cloned());
        match super::sat::solve(self.table.entries.len(), &clauses) {
            None => ValidityVerdict {
                status: ValidityStatus::Valid,
                countermodel: None,
            },
            Some(assignment) => {
                let mut model = BTreeMap::new();
                for (i, entry) in self.table.entries.iter().enumerate() {
                    if !entry.aux {
                        model.insert(entry.name.clone(), assignment[i].unwrap_or(false));
                    }
                }
                ValidityVerdict {
                    status: ValidityStatus::Invalid,
                    countermodel: Some(model),
                }
            }
        }
    }
}

/// The ground clause set of `premises ∧ ¬conclusion`: the atom table and
/// DIMACS-style integer clauses (1-based, negative = negated).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundClauseSet {
    pub atoms: Vec<AtomEntry>,
    pub clauses: Vec<Vec<i32>>,
}

impl GroundClauseSet {
    /// Render a clause like `¬P(C) ∨ M(C)` for diagnostics and tests.
    pub fn clause_text(&self, clause: &[i32]) -> String {
        clause
            .iter()
            .map(|&l| {
                let name = &self.atoms[(l.unsigned_abs() - 1) as usize].name;
                if l < 0 {
                    format!("¬{name}")
                } else {
                    name.clone()
                }
            })
            .collect::<Vec<_>>()
            .join(" ∨ ")
    }
}

/// Ground `premises ∧ ¬conclusion` into a propositional clause set.
pub fn ground(
    premises: &LabeledPremises,
    conclusion: &Formula,
) -> Result<GroundClauseSet, SolverError> {
    let problem = GroundedProblem::build(premises, conclusion)?;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    for group in &problem.premise_clauses {
        clauses.extend(group.iter().cloned());
    }
    clauses.extend(problem.conclusion_clauses.iter().cloned());
    Ok(GroundClauseSet {
        atoms: problem.table.entries,
        clauses,
    })
}

/// Decide satisfiability of a ground clause set. A satisfiable outcome
/// carries a total model over the non-auxiliary atoms.
pub fn sat(cs: &GroundClauseSet) -> SatOutcome {
    match super::sat::solve(cs.atoms.len(), &cs.clauses) {
        None => SatOutcome::Unsatisfiable,
        Some(assignment) => {
            let mut model = BTreeMap::new();
            for (i, entry) in cs.atoms.iter().enumerate() {
                if !entry.aux {
                    model.insert(entry.name.clone(), assignment[i].unwrap_or(false));
                }
            }
            SatOutcome::Satisfiable(model)
        }
    }
}
