//! The plain-text problem file accepted by `validate` and `prune`: one
//! formula per line (optionally labeled `P1: ...`), the last line prefixed
//! `CONCLUSION:`. Blank lines and `#` comments are skipped.

use anyhow::{bail, Context, Result};

use gaar::fol::{parse_formula, Formula};
use gaar::solver::LabeledPremises;

pub struct Problem {
    pub premises: LabeledPremises,
    pub conclusion: Formula,
}

pub fn parse_problem(text: &str) -> Result<Problem> {
    let mut premises: Vec<(String, Formula)> = Vec::new();
    let mut conclusion: Option<Formula> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if conclusion.is_some() {
            bail!("line {}: content after the CONCLUSION line", idx + 1);
        }
        if let Some(rest) = line.strip_prefix("CONCLUSION:") {
            let f = parse_formula(rest.trim())
                .with_context(|| format!("line {}: conclusion", idx + 1))?;
            conclusion = Some(f);
            continue;
        }
        let (label, body) = match split_label(line) {
            Some((label, body)) => (label, body),
            None => (format!("P{}", premises.len() + 1), line.to_string()),
        };
        let f = parse_formula(&body).with_context(|| format!("line {}: {label}", idx + 1))?;
        premises.push((label, f));
    }
    let Some(conclusion) = conclusion else {
        bail!("the problem file has no CONCLUSION line");
    };
    let premises = LabeledPremises::from_pairs(premises)?;
    Ok(Problem {
        premises,
        conclusion,
    })
}

fn split_label(line: &str) -> Option<(String, String)> {
    let rest = line.strip_prefix('P')?;
    let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
    if digits.is_empty() {
        return None;
    }
    let after = rest[digits.len()..].strip_prefix(':')?;
    Some((format!("P{digits}"), after.trim().to_string()))
}
