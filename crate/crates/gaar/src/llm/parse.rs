//! Parsers for the structured sections the stage prompts ask for.
//!
//! Section extraction tolerates leading and trailing chatter but is strict on
//! the required headers themselves.

use serde::{Deserialize, Serialize};

use crate::fol::{parse_formula, SymbolKeys};
use crate::pipeline::{
    Criterion, CriterionVerdict, FaithfulnessJudgment, FallacyFinding, FallacyReport,
    Formalization, Premise, Reconstruction,
};
use crate::solver::LabeledPremises;

use super::ParseError;

/// Content of the section starting at a line equal to `header`, up to the
/// next heading line.
fn find_section(text: &str, header: &str) -> Option<String> {
    let all: Vec<&str> = text.lines().collect();
    let start = all.iter().position(|l| l.trim() == header)?;
    let mut out = Vec::new();
    for line in &all[start + 1..] {
        if line.trim_start().starts_with('#') {
            break;
        }
        out.push(*line);
    }
    Some(out.join("\n").trim().to_string())
}

fn require_section(text: &str, header: &str) -> Result<String, ParseError> {
    find_section(text, header).ok_or_else(|| ParseError::new(header, "section not found"))
}

/// Split `P<k>: value` lines; non-matching nonempty lines continue the
/// previous value.
fn labeled_lines(section: &str) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    for raw in section.lines() {
        let line = raw.trim().trim_start_matches("- ").trim();
        if line.is_empty() {
            continue;
        }
        if let Some((label, rest)) = split_premise_label(line) {
            out.push((label, rest.trim().to_string()));
        } else if let Some(last) = out.last_mut() {
            last.1.push(' ');
            last.1.push_str(line);
        }
    }
    out
}

fn split_premise_label(line: &str) -> Option<(String, String)> {
    let rest = line.strip_prefix('P')?;
    let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
    if digits.is_empty() {
        return None;
    }
    let after = &rest[digits.len()..];
    let after = after.strip_prefix(':')?;
    Some((format!("P{digits}"), after.to_string()))
}

fn strip_conclusion_label(text: &str) -> &str {
    let t = text.trim();
    t.strip_prefix("C:").map(str::trim).unwrap_or(t)
}

/// Parse the reconstruction sections (`## Premises`, `## Conclusion`, plus
/// optional intermediate conclusions and logical connections). An
/// `(Implicit)` prefix on a premise sets its implicit flag.
pub fn parse_reconstruction(text: &str) -> Result<Reconstruction, ParseError> {
    let premises_section = require_section(text, "## Premises")?;
    let mut premises = Vec::new();
    for (label, value) in labeled_lines(&premises_section) {
        let (implicit, text) = match strip_implicit_marker(&value) {
            Some(rest) => (true, rest),
            None => (false, value.clone()),
        };
        premises.push(Premise {
            label,
            text: text.trim().to_string(),
            implicit,
        });
    }
    if premises.is_empty() {
        return Err(ParseError::new("## Premises", "no labeled premises found"));
    }

    let intermediate_conclusions = match find_section(text, "## Intermediate Conclusions") {
        None => Vec::new(),
        Some(s) if s.eq_ignore_ascii_case("none") || s.is_empty() => Vec::new(),
        Some(s) => s
            .lines()
            .map(|l| l.trim().trim_start_matches("- ").trim().to_string())
            .filter(|l| !l.is_empty() && !l.eq_ignore_ascii_case("none"))
            .collect(),
    };

    let conclusion_section = require_section(text, "## Conclusion")?;
    let conclusion = strip_conclusion_label(&conclusion_section.replace('\n', " "))
        .trim()
        .to_string();
    if conclusion.is_empty() {
        return Err(ParseError::new("## Conclusion", "empty conclusion"));
    }

    let connections = find_section(text, "## Logical Connections").unwrap_or_default();

    let reconstruction = Reconstruction {
        premises,
        intermediate_conclusions,
        conclusion,
        connections,
    };
    reconstruction
        .validate()
        .map_err(|e| ParseError::new("## Premises", e))?;
    Ok(reconstruction)
}

fn strip_implicit_marker(value: &str) -> Option<String> {
    let t = value.trim_start();
    for marker in ["(Implicit)", "(implicit)", "(IMPLICIT)"] {
        if let Some(rest) = t.strip_prefix(marker) {
            return Some(rest.trim_start().to_string());
        }
    }
    None
}

/// Render a reconstruction back into the documented section format; the
/// inverse of [`parse_reconstruction`].
pub fn render_reconstruction_sections(r: &Reconstruction) -> String {
    let mut out = String::from("## Premises\n");
    for p in &r.premises {
        if p.implicit {
            out.push_str(&format!("{}: (Implicit) {}\n", p.label, p.text));
        } else {
            out.push_str(&format!("{}: {}\n", p.label, p.text));
        }
    }
    out.push_str("\n## Intermediate Conclusions\n");
    if r.intermediate_conclusions.is_empty() {
        out.push_str("None\n");
    } else {
        for ic in &r.intermediate_conclusions {
            out.push_str(&format!("- {ic}\n"));
        }
    }
    out.push_str("\n## Conclusion\n");
    out.push_str(&r.conclusion);
    out.push('\n');
    if !r.connections.is_empty() {
        out.push_str("\n## Logical Connections\n");
        out.push_str(&r.connections);
        out.push('\n');
    }
    out
}

/// Parse the fallacy-detection sections. Every named fallacy needs a
/// rationale; `None` marks an explicit non-detection.
pub fn parse_fallacy(text: &str) -> Result<FallacyReport, ParseError> {
    let formal_section = require_section(text, "## Formal Fallacy")?;
    let informal_section = require_section(text, "## Informal Fallacies")?;

    let formal = parse_fallacy_entries("## Formal Fallacy", &formal_section)?;
    if formal.len() > 1 {
        return Err(ParseError::new(
            "## Formal Fallacy",
            "at most one formal fallacy is expected",
        ));
    }
    let informal = parse_fallacy_entries("## Informal Fallacies", &informal_section)?;

    Ok(FallacyReport {
        formal: formal.into_iter().next(),
        informal,
    })
}

fn parse_fallacy_entries(header: &str, section: &str) -> Result<Vec<FallacyFinding>, ParseError> {
    let mut out = Vec::new();
    for raw in section.lines() {
        let line = raw.trim().trim_start_matches("- ").trim();
        if line.is_empty() || line.eq_ignore_ascii_case("none") {
            continue;
        }
        let Some((name, rationale)) = line.split_once(':') else {
            return Err(ParseError::new(
                header,
                format!("expected 'name: rationale', got '{line}'"),
            ));
        };
        let (name, rationale) = (name.trim(), rationale.trim());
        if name.is_empty() || rationale.is_empty() {
            return Err(ParseError::new(
                header,
                format!("fallacy entry '{line}' is missing its rationale"),
            ));
        }
        out.push(FallacyFinding {
            name: name.to_string(),
            rationale: rationale.to_string(),
        });
    }
    Ok(out)
}

/// Parse the formalization sections: symbol keys, formalized premises, and
/// the formalized conclusion. Formula syntax errors surface with the
/// offending line.
pub fn parse_formalization(text: &str) -> Result<Formalization, ParseError> {
    let keys_header = "## Defined Variables/Predicates";
    let keys_section = require_section(text, keys_header)?;
    let mut keys = SymbolKeys::default();
    let mut last_symbol: Option<String> = None;
    for raw in keys_section.lines() {
        let line = raw.trim().trim_start_matches("- ").trim();
        if line.is_empty() {
            continue;
        }
        let Some((symbol, phrase)) = line.split_once('=') else {
            // Keys may wrap onto continuation lines; append to the last one.
            if let Some(last) = &last_symbol {
                let joined = format!("{} {}", keys.0[last], line);
                keys.0.insert(last.clone(), joined);
                continue;
            }
            return Err(ParseError::new(
                keys_header,
                format!("expected 'symbol = phrase', got '{line}'"),
            ));
        };
        let symbol = symbol.trim();
        let symbol = symbol.split('(').next().unwrap_or(symbol).trim();
        let phrase = phrase.trim();
        if symbol.is_empty() || phrase.is_empty() {
            return Err(ParseError::new(
                keys_header,
                format!("empty symbol or phrase in '{line}'"),
            ));
        }
        keys.insert(symbol, phrase);
        last_symbol = Some(symbol.to_string());
    }

    let premises_section = require_section(text, "## Formalized Premises")?;
    let mut premises = Vec::new();
    for (label, value) in labeled_lines(&premises_section) {
        // The "fol-syntax" tag lets the pipeline route persistent formula
        // errors into feedback instead of aborting the run.
        let formula = parse_formula(&value)
            .map_err(|e| ParseError::new("fol-syntax", format!("{label}: {value}: {e}")))?;
        premises.push((label, formula));
    }
    if premises.is_empty() {
        return Err(ParseError::new(
            "## Formalized Premises",
            "no labeled formulas found",
        ));
    }
    let premises = LabeledPremises::from_pairs(premises)
        .map_err(|e| ParseError::new("## Formalized Premises", e.to_string()))?;

    let conclusion_section = require_section(text, "## Formalized Conclusion")?;
    let joined = conclusion_section.replace('\n', " ");
    let conclusion_text = strip_conclusion_label(&joined);
    let conclusion = parse_formula(conclusion_text)
        .map_err(|e| ParseError::new("fol-syntax", format!("conclusion: {conclusion_text}: {e}")))?;

    Ok(Formalization {
        keys,
        premises,
        conclusion,
    })
}

/// Parse the streamlined reconstruction: labeled NL premises plus the NL
/// conclusion.
pub fn parse_streamline(text: &str) -> Result<(Vec<(String, String)>, String), ParseError> {
    let premises_section = require_section(text, "### NL Premises")?;
    let premises = labeled_lines(&premises_section);
    if premises.is_empty() {
        return Err(ParseError::new(
            "### NL Premises",
            "no labeled premises found",
        ));
    }
    let conclusion_section = require_section(text, "### NL Conclusion")?;
    let conclusion = strip_conclusion_label(&conclusion_section.replace('\n', " "))
        .trim()
        .to_string();
    if conclusion.is_empty() {
        return Err(ParseError::new("### NL Conclusion", "empty conclusion"));
    }
    Ok((premises, conclusion))
}

/// Parse the stage-6 verdicts.
///
/// With `criteria` nonempty, per-criterion `Name: Yes|No [- rationale]`
/// lines are expected inside `# Faithfulness`; a bare `Yes`/`No` applies to
/// every criterion. With `criteria` empty (coarse mode), a single verdict is
/// read and the `# Reasoning` section supplies the rationale.
pub fn parse_faithfulness(
    text: &str,
    criteria: &[Criterion],
) -> Result<FaithfulnessJudgment, ParseError> {
    let section = require_section(text, "# Faithfulness")?;
    let reasoning = find_section(text, "# Reasoning").unwrap_or_default();

    if criteria.is_empty() {
        let (passed, rationale) = parse_verdict_word(section.trim()).ok_or_else(|| {
            ParseError::new("# Faithfulness", "expected a Yes or No verdict")
        })?;
        let rationale = if rationale.is_empty() { reasoning } else { rationale };
        return Ok(FaithfulnessJudgment {
            verdicts: vec![CriterionVerdict {
                criterion: None,
                passed,
                rationale,
            }],
        });
    }

    let mut verdicts = Vec::new();
    let mut found_any = false;
    for &criterion in criteria {
        let needle = format!("{}:", criterion.name().to_ascii_lowercase());
        let line = section
            .lines()
            .map(str::trim)
            .find(|l| l.to_ascii_lowercase().starts_with(&needle));
        if let Some(line) = line {
            found_any = true;
            let value = line[needle.len()..].trim();
            let (passed, rationale) = parse_verdict_word(value).ok_or_else(|| {
                ParseError::new(
                    "# Faithfulness",
                    format!("criterion {}: expected Yes or No, got '{value}'", criterion.name()),
                )
            })?;
            verdicts.push(CriterionVerdict {
                criterion: Some(criterion),
                passed,
                rationale,
            });
        }
    }

    if !found_any {
        // A bare overall verdict stands for every enabled criterion.
        if let Some((passed, rationale)) = parse_verdict_word(section.trim()) {
            let rationale = if rationale.is_empty() {
                reasoning
            } else {
                rationale
            };
            return Ok(FaithfulnessJudgment {
                verdicts: criteria
                    .iter()
                    .map(|&criterion| CriterionVerdict {
                        criterion: Some(criterion),
                        passed,
                        rationale: rationale.clone(),
                    })
                    .collect(),
            });
        }
        return Err(ParseError::new(
            "# Faithfulness",
            "no criterion verdicts found",
        ));
    }
    if verdicts.len() != criteria.len() {
        let missing: Vec<&str> = criteria
            .iter()
            .filter(|c| !verdicts.iter().any(|v| v.criterion == Some(**c)))
            .map(|c| c.name())
            .collect();
        return Err(ParseError::new(
            "# Faithfulness",
            format!("missing verdict for {}", missing.join(", ")),
        ));
    }
    Ok(FaithfulnessJudgment { verdicts })
}

fn parse_verdict_word(value: &str) -> Option<(bool, String)> {
    let lower = value.to_ascii_lowercase();
    let (passed, rest) = if lower.starts_with("yes") {
        (true, &value[3..])
    } else if lower.starts_with("no") {
        (false, &value[2..])
    } else {
        return None;
    };
    let rationale = rest
        .trim_start_matches(|c: char| {
            c.is_whitespace() || c == '-' || c == '—' || c == ':' || c == ',' || c == '.'
        })
        .trim()
        .to_string();
    Some((passed, rationale))
}

/// Which side a pairwise judgment favors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

/// Per-criterion pairwise outcome: a winner with a disparity rating of one to
/// five plusses, or a tie.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriterionOutcome {
    Win { side: Side, disparity: u8 },
    Tie,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairwiseJudgment {
    pub accuracy: CriterionOutcome,
    pub completeness: CriterionOutcome,
    pub parsimony: CriterionOutcome,
    /// `None` means an overall tie.
    pub overall: Option<Side>,
}

/// Parse the judge's structured pairwise response: a JSON object with
/// `accuracy`, `completeness`, `parsimony` (each `A`/`B` plus `+`…`+++++`,
/// or `TIE`) and `overall_winner` (`A`, `B`, or `TIE`).
pub fn parse_pairwise_judgment(text: &str) -> Result<PairwiseJudgment, ParseError> {
    let object = extract_json_object(text)
        .ok_or_else(|| ParseError::new("pairwise judgment", "no JSON object found"))?;
    let value: serde_json::Value = serde_json::from_str(&object)
        .map_err(|e| ParseError::new("pairwise judgment", format!("malformed JSON: {e}")))?;

    let field = |name: &str| -> Result<&str, ParseError> {
        value
            .get(name)
            .and_then(|v| v.as_str())
            .ok_or_else(|| ParseError::new("pairwise judgment", format!("missing field '{name}'")))
    };

    let accuracy = parse_criterion_outcome(field("accuracy")?)?;
    let completeness = parse_criterion_outcome(field("completeness")?)?;
    let parsimony = parse_criterion_outcome(field("parsimony")?)?;
    let overall = match field("overall_winner")?.trim() {
        "A" => Some(Side::A),
        "B" => Some(Side::B),
        tie if tie.eq_ignore_ascii_case("tie") => None,
        other => {
            return Err(ParseError::new(
                "pairwise judgment",
                format!("illegal overall_winner '{other}'"),
            ))
        }
    };
    Ok(PairwiseJudgment {
        accuracy,
        completeness,
        parsimony,
        overall,
    })
}

fn parse_criterion_outcome(value: &str) -> Result<CriterionOutcome, ParseError> {
    let v = value.trim();
    if v.eq_ignore_ascii_case("tie") {
        return Ok(CriterionOutcome::Tie);
    }
    let mut chars = v.chars();
    let side = match chars.next() {
        Some('A') => Side::A,
        Some('B') => Side::B,
        _ => {
            return Err(ParseError::new(
                "pairwise judgment",
                format!("illegal criterion value '{v}'"),
            ))
        }
    };
    let plusses: Vec<char> = chars.collect();
    let disparity = plusses.len() as u8;
    if plusses.iter().any(|&c| c != '+') || !(1..=5).contains(&disparity) {
        return Err(ParseError::new(
            "pairwise judgment",
            format!("illegal disparity rating '{v}'"),
        ));
    }
    Ok(CriterionOutcome::Win { side, disparity })
}

fn extract_json_object(text: &str) -> Option<String> {
    let start = text.find('{')?;
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in text[start..].char_indices() {
        if in_string {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(text[start..start + i + 1].to_string());
                }
            }
            _ => {}
        }
    }
    None
}
