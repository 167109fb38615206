//! Formula rendering. The operator table is normative: rendering followed by
//! parsing reproduces the formula structurally, in either style.

use super::{Formula, Term};

/// Output operator spelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderStyle {
    Unicode,
    Ascii,
}

struct Ops {
    not: &'static str,
    and: &'static str,
    or: &'static str,
    implies: &'static str,
    iff: &'static str,
    forall: &'static str,
    exists: &'static str,
    // whether a space separates quantifier keyword and variable
    quant_space: bool,
}

const UNICODE: Ops = Ops {
    not: "¬",
    and: "∧",
    or: "∨",
    implies: "→",
    iff: "↔",
    forall: "∀",
    exists: "∃",
    quant_space: false,
};

const ASCII: Ops = Ops {
    not: "~",
    and: "&",
    or: "|",
    implies: "->",
    iff: "<->",
    forall: "forall",
    exists: "exists",
    quant_space: true,
};

// Precedence: atoms and bracket-scoped quantifiers bind tightest.
fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Atom { .. } | Formula::ForAll(..) | Formula::Exists(..) => 100,
        Formula::Not(_) => 90,
        Formula::And(_) => 80,
        Formula::Or(_) => 70,
        Formula::Implies(..) => 60,
        Formula::Iff(..) => 50,
    }
}

/// Render `f` in the given style. No simplification is performed: double
/// negations and nested conjunctions are emitted as written.
pub fn render_formula(f: &Formula, style: RenderStyle) -> String {
    let ops = match style {
        RenderStyle::Unicode => &UNICODE,
        RenderStyle::Ascii => &ASCII,
    };
    let mut out = String::new();
    write_formula(f, ops, &mut out);
    out
}

fn write_formula(f: &Formula, ops: &Ops, out: &mut String) {
    match f {
        Formula::Atom { predicate, args } => {
            out.push_str(predicate);
            if !args.is_empty() {
                out.push('(');
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    match t {
                        Term::Constant(n) | Term::Variable(n) => out.push_str(n),
                    }
                }
                out.push(')');
            }
        }
        Formula::Not(inner) => {
            out.push_str(ops.not);
            write_child(inner, prec(f), ops, out);
        }
        Formula::And(fs) => write_nary(fs, ops.and, prec(f), ops, out),
        Formula::Or(fs) => write_nary(fs, ops.or, prec(f), ops, out),
        Formula::Implies(a, b) => {
            // Right-associative: the antecedent needs brackets at equal
            // precedence, the consequent does not.
            write_child_cmp(a, prec(f), true, ops, out);
            out.push(' ');
            out.push_str(ops.implies);
            out.push(' ');
            write_child_cmp(b, prec(f), false, ops, out);
        }
        Formula::Iff(a, b) => {
            write_child_cmp(a, prec(f), true, ops, out);
            out.push(' ');
            out.push_str(ops.iff);
            out.push(' ');
            write_child_cmp(b, prec(f), false, ops, out);
        }
        Formula::ForAll(v, body) | Formula::Exists(v, body) => {
            let kw = if matches!(f, Formula::ForAll(..)) {
                ops.forall
            } else {
                ops.exists
            };
            out.push_str(kw);
            if ops.quant_space {
                out.push(' ');
            }
            out.push_str(v);
            out.push_str(" [");
            write_formula(body, ops, out);
            out.push(']');
        }
    }
}

fn write_nary(fs: &[Formula], sep: &str, parent: u8, ops: &Ops, out: &mut String) {
    for (i, g) in fs.iter().enumerate() {
        if i > 0 {
            out.push(' ');
            out.push_str(sep);
            out.push(' ');
        }
        // Equal precedence means a nested same-connective node, which must
        // keep its brackets to survive the round trip unflattened.
        write_child_cmp(g, parent, true, ops, out);
    }
}

fn write_child(f: &Formula, parent: u8, ops: &Ops, out: &mut String) {
    write_child_cmp(f, parent, false, ops, out)
}

fn write_child_cmp(f: &Formula, parent: u8, bracket_equal: bool, ops: &Ops, out: &mut String) {
    let p = prec(f);
    let needs = p < parent || (bracket_equal && p == parent);
    if needs {
        out.push('(');
        write_formula(f, ops, out);
        out.push(')');
    } else {
        write_formula(f, ops, out);
    }
}
