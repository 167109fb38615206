//! A small DPLL solver: unit propagation plus chronological branching.
//! Deterministic: branch on the lowest unassigned variable, trying true
//! first, so identical clause sets always yield identical models.

use std::collections::BTreeMap;

/// Satisfiability outcome over the non-auxiliary atoms of a clause set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatOutcome {
    Satisfiable(BTreeMap<String, bool>),
    Unsatisfiable,
}

impl SatOutcome {
    pub fn is_satisfiable(&self) -> bool {
        matches!(self, SatOutcome::Satisfiable(_))
    }
}

/// Returns `None` if unsatisfiable, otherwise a (possibly partial)
/// assignment indexed by 0-based variable id. Unassigned variables are
/// unconstrained; any completion satisfies the clauses.
pub(super) fn solve(n_vars: usize, clauses: &[Vec<i32>]) -> Option<Vec<Option<bool>>> {
    if clauses.iter().any(|c| c.is_empty()) {
        return None;
    }
    let mut assignment: Vec<Option<bool>> = vec![None; n_vars];
    if dpll(clauses, &mut assignment) {
        Some(assignment)
    } else {
        None
    }
}

fn lit_value(lit: i32, assignment: &[Option<bool>]) -> Option<bool> {
    let v = (lit.unsigned_abs() - 1) as usize;
    assignment[v].map(|b| if lit > 0 { b } else { !b })
}

fn dpll(clauses: &[Vec<i32>], assignment: &mut Vec<Option<bool>>) -> bool {
    let mut trail: Vec<usize> = Vec::new();

    // Unit propagation to fixpoint.
    loop {
        let mut propagated = false;
        for clause in clauses {
            let mut unassigned: Option<i32> = None;
            let mut n_unassigned = 0;
            let mut satisfied = false;
            for &lit in clause {
                match lit_value(lit, assignment) {
                    Some(true) => {
                        satisfied = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        n_unassigned += 1;
                        unassigned = Some(lit);
                    }
                }
            }
            if satisfied {
                continue;
            }
            match n_unassigned {
                0 => {
                    // conflict; undo propagation before returning
                    for &v in &trail {
                        assignment[v] = None;
                    }
                    return false;
                }
                1 => {
                    let lit = unassigned.unwrap();
                    let v = (lit.unsigned_abs() - 1) as usize;
                    assignment[v] = Some(lit > 0);
                    trail.push(v);
                    propagated = true;
                }
                _ => {}
            }
        }
        if !propagated {
            break;
        }
    }

    // Branch on the lowest unassigned variable of an unsatisfied clause.
    let mut branch_var: Option<usize> = None;
    for clause in clauses {
        if clause
            .iter()
            .any(|&l| lit_value(l, assignment) == Some(true))
        {
            continue;
        }
        for &lit in clause {
            let v = (lit.unsigned_abs() - 1) as usize;
            if assignment[v].is_none() {
                branch_var = Some(branch_var.map_or(v, |b| b.min(v)));
            }
        }
    }

    let Some(v) = branch_var else {
        return true; // every clause satisfied
    };

    for value in [true, false] {
        assignment[v] = Some(value);
        if dpll(clauses, assignment) {
            return true;
        }
        assignment[v] = None;
    }

    for &v in &trail {
        assignment[v] = None;
    }
    false
}
