//! Match schedulers: knockout tournaments over a bracket and full
//! round-robin leagues, both driven by a pairwise judge.

use std::collections::BTreeMap;

use crate::llm::{
    parse_pairwise_judgment, render_prompt, Backend, CompletionRequest, DecodingParams,
    PromptTemplate, Side,
};

use super::{EvalError, MatchRecord, Outcome};

/// Judges one item between two methods. `Some(Side::A)` means the first
/// named method wins, `None` a tie.
pub trait PairwiseJudge {
    fn judge(&self, item: &str, method_a: &str, method_b: &str)
        -> Result<Option<Side>, EvalError>;
}

impl<F> PairwiseJudge for F
where
    F: Fn(&str, &str, &str) -> Result<Option<Side>, EvalError>,
{
    fn judge(
        &self,
        item: &str,
        method_a: &str,
        method_b: &str,
    ) -> Result<Option<Side>, EvalError> {
        self(item, method_a, method_b)
    }
}

/// Round-robin league: every unordered method pair is judged on every item.
///
/// With `swap_sides` enabled each pair is judged twice per item, once in
/// each presentation order, to average out A/B position bias. Disabled by
/// default because it doubles judge cost.
pub fn run_league(
    methods: &[String],
    items: &[String],
    judge: &dyn PairwiseJudge,
    swap_sides: bool,
) -> Result<Vec<MatchRecord>, EvalError> {
    if methods.len() < 2 {
        return Err(EvalError::NotEnoughData(format!(
            "a league needs at least two methods, got {}",
            methods.len()
        )));
    }
    let mut records = Vec::new();
    for (i, a) in methods.iter().enumerate() {
        for b in &methods[i + 1..] {
            for item in items {
                records.push(judged_record(judge, item, a, b)?);
                if swap_sides {
                    records.push(judged_record(judge, item, b, a)?);
                }
            }
        }
    }
    Ok(records)
}

fn judged_record(
    judge: &dyn PairwiseJudge,
    item: &str,
    a: &str,
    b: &str,
) -> Result<MatchRecord, EvalError> {
    let outcome = match judge.judge(item, a, b)? {
        Some(Side::A) => Outcome::AWins,
        Some(Side::B) => Outcome::BWins,
        None => Outcome::Tie,
    };
    MatchRecord::new(item, a, b, outcome)
}

/// One bracket slot: a named method, or the winner of an earlier match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BracketSlot {
    Method(String),
    WinnerOf { round: usize, match_index: usize },
}

/// An ordered knockout bracket: rounds of matches, later rounds may
/// reference earlier winners.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bracket {
    pub rounds: Vec<Vec<(BracketSlot, BracketSlot)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchSummary {
    pub round: usize,
    pub match_index: usize,
    pub side_a: String,
    pub side_b: String,
    pub wins_a: u64,
    pub wins_b: u64,
    pub ties: u64,
    /// Winning rate of the winner, excluding ties; `None` when every item
    /// tied and the cost tie-break decided.
    pub winning_rate: Option<f64>,
    pub winner: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TournamentResult {
    pub matches: Vec<MatchSummary>,
    pub records: Vec<MatchRecord>,
    pub winner: String,
}

/// Run a knockout tournament. Each match judges every item; the method with
/// the per-match winning-rate majority advances, and an exact 50:50 advances
/// the method with the lower token cost.
pub fn run_tournament(
    bracket: &Bracket,
    items: &[String],
    judge: &dyn PairwiseJudge,
    costs: &BTreeMap<String, f64>,
) -> Result<TournamentResult, EvalError> {
    if bracket.rounds.is_empty() || bracket.rounds.iter().any(|r| r.is_empty()) {
        return Err(EvalError::MalformedBracket(
            "bracket must have at least one round and no empty rounds".into(),
        ));
    }
    let mut winners: Vec<Vec<String>> = Vec::new();
    let mut matches = Vec::new();
    let mut records = Vec::new();

    for (round_idx, round) in bracket.rounds.iter().enumerate() {
        let mut round_winners = Vec::new();
        for (match_idx, (slot_a, slot_b)) in round.iter().enumerate() {
            let a = resolve_slot(slot_a, &winners, round_idx)?;
            let b = resolve_slot(slot_b, &winners, round_idx)?;
            if a == b {
                return Err(EvalError::SelfMatch(a));
            }
            let mut wins_a = 0u64;
            let mut wins_b = 0u64;
            let mut ties = 0u64;
            for item in items {
                let record = judged_record(judge, item, &a, &b)?;
                match record.outcome {
                    Outcome::AWins => wins_a += 1,
                    Outcome::BWins => wins_b += 1,
                    Outcome::Tie => ties += 1,
                }
                records.push(record);
            }
            let winner = if wins_a != wins_b {
                if wins_a > wins_b { a.clone() } else { b.clone() }
            } else {
                // Exact 50:50 (or all ties): the lower-cost method advances.
                let cost_of = |m: &str| {
                    costs.get(m).copied().ok_or_else(|| {
                        EvalError::MalformedBracket(format!(
                            "tie-break needs a token cost for '{m}'"
                        ))
                    })
                };
                if cost_of(&a)? <= cost_of(&b)? {
                    a.clone()
                } else {
                    b.clone()
                }
            };
            let winner_rate = if wins_a + wins_b > 0 {
                let winner_wins = wins_a.max(wins_b);
                Some(100.0 * winner_wins as f64 / (wins_a + wins_b) as f64)
            } else {
                None
            };
            matches.push(MatchSummary {
                round: round_idx,
                match_index: match_idx,
                side_a: a,
                side_b: b,
                wins_a,
                wins_b,
                ties,
                winning_rate: winner_rate,
                winner: winner.clone(),
            });
            round_winners.push(winner);
        }
        winners.push(round_winners);
    }

    let winner = winners
        .last()
        .and_then(|r| r.last())
        .cloned()
        .expect("nonempty bracket has a final winner");
    Ok(TournamentResult {
        matches,
        records,
        winner,
    })
}

fn resolve_slot(
    slot: &BracketSlot,
    winners: &[Vec<String>],
    current_round: usize,
) -> Result<String, EvalError> {
    match slot {
        BracketSlot::Method(m) => Ok(m.clone()),
        BracketSlot::WinnerOf { round, match_index } => {
            if *round >= current_round {
                return Err(EvalError::MalformedBracket(format!(
                    "round {current_round} references the winner of round {round}, which has \
                     not been played"
                )));
            }
            winners
                .get(*round)
                .and_then(|r| r.get(*match_index))
                .cloned()
                .ok_or_else(|| {
                    EvalError::MalformedBracket(format!(
                        "no match {match_index} in round {round}"
                    ))
                })
        }
    }
}

/// An item a judge can be asked about: the debate topic and argument text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JudgeItem {
    pub id: String,
    pub topic: String,
    pub argument: String,
}

/// LLM-backed pairwise judge: renders the pairwise faithfulness prompt over
/// stored reconstruction texts and parses the structured judgment.
pub struct LlmPairwiseJudge<'a> {
    pub backend: &'a dyn Backend,
    pub template: PromptTemplate,
    pub model: String,
    pub params: DecodingParams,
    pub items: BTreeMap<String, JudgeItem>,
    /// Reconstruction section text per (method, item id).
    pub reconstructions: BTreeMap<(String, String), String>,
}

impl PairwiseJudge for LlmPairwiseJudge<'_> {
    fn judge(
        &self,
        item: &str,
        method_a: &str,
        method_b: &str,
    ) -> Result<Option<Side>, EvalError> {
        let info = self.items.get(item).ok_or_else(|| EvalError::Judge {
            item: item.to_string(),
            detail: "unknown item".into(),
        })?;
        let lookup = |method: &str| {
            self.reconstructions
                .get(&(method.to_string(), item.to_string()))
                .cloned()
                .ok_or_else(|| EvalError::Judge {
                    item: item.to_string(),
                    detail: format!("no reconstruction for method '{method}'"),
                })
        };
        let bindings = [
            ("TOPIC".to_string(), info.topic.clone()),
            ("ARGUMENT".to_string(), info.argument.clone()),
            ("RECONSTRUCTION_A".to_string(), lookup(method_a)?),
            ("RECONSTRUCTION_B".to_string(), lookup(method_b)?),
        ]
        .into_iter()
        .collect();
        let prompt = render_prompt(&self.template, &bindings).map_err(|e| EvalError::Judge {
            item: item.to_string(),
            detail: e.to_string(),
        })?;
        let request = CompletionRequest {
            template: self.template.name.clone(),
            bindings,
            prompt,
            model: self.model.clone(),
            params: self.params.clone(),
        };
        let response = self.backend.complete(&request).map_err(|e| EvalError::Judge {
            item: item.to_string(),
            detail: e.to_string(),
        })?;
        let judgment = parse_pairwise_judgment(&response.text).map_err(|e| EvalError::Judge {
            item: item.to_string(),
            detail: e.to_string(),
        })?;
        Ok(judgment.overall)
    }
}
