//! Reconstruction-quality evaluation: pairwise winning rates, Bradley–Terry
//! ratings on an Elo-like scale, TOPSIS selection scores, and the
//! tournament/league match schedulers.

mod bradley_terry;
mod schedule;
mod topsis;

pub use bradley_terry::{fit_bradley_terry, log_likelihood, RatingTable};
pub use schedule::{
    run_league, run_tournament, Bracket, BracketSlot, JudgeItem, LlmPairwiseJudge, MatchSummary,
    PairwiseJudge, TournamentResult,
};
pub use topsis::{topsis, TopsisRow};

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::pipeline::Formalization;
use crate::solver::check_validity;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("no non-tie records between '{a}' and '{b}'")]
    AllTies { a: String, b: String },
    #[error("the non-tie comparison graph is disconnected: {detail}")]
    DisconnectedGraph { detail: String },
    #[error("criterion '{criterion}' is degenerate: every row has the same value")]
    DegenerateColumn { criterion: String },
    #[error("not enough data: {0}")]
    NotEnoughData(String),
    #[error("malformed bracket: {0}")]
    MalformedBracket(String),
    #[error("a match pairs a method against itself: '{0}'")]
    SelfMatch(String),
    #[error("judge failure on item '{item}': {detail}")]
    Judge { item: String, detail: String },
    #[error("io: {0}")]
    Io(String),
}

/// The outcome of one pairwise judgment between two methods on one item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    AWins,
    BWins,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub item: String,
    pub side_a: String,
    pub side_b: String,
    pub outcome: Outcome,
}

impl MatchRecord {
    pub fn new(
        item: impl Into<String>,
        side_a: impl Into<String>,
        side_b: impl Into<String>,
        outcome: Outcome,
    ) -> Result<Self, EvalError> {
        let record = MatchRecord {
            item: item.into(),
            side_a: side_a.into(),
            side_b: side_b.into(),
            outcome,
        };
        if record.side_a == record.side_b {
            return Err(EvalError::SelfMatch(record.side_a));
        }
        Ok(record)
    }
}

/// Winning rate of `a` against `b` as a percentage, computed excluding ties.
pub fn winning_rate(records: &[MatchRecord], a: &str, b: &str) -> Result<f64, EvalError> {
    let mut wins_a = 0u64;
    let mut wins_b = 0u64;
    for r in records {
        let (fa, fb) = (r.side_a.as_str(), r.side_b.as_str());
        if (fa, fb) == (a, b) {
            match r.outcome {
                Outcome::AWins => wins_a += 1,
                Outcome::BWins => wins_b += 1,
                Outcome::Tie => {}
            }
        } else if (fa, fb) == (b, a) {
            match r.outcome {
                Outcome::AWins => wins_b += 1,
                Outcome::BWins => wins_a += 1,
                Outcome::Tie => {}
            }
        }
    }
    if wins_a + wins_b == 0 {
        return Err(EvalError::AllTies {
            a: a.to_string(),
            b: b.to_string(),
        });
    }
    Ok(100.0 * wins_a as f64 / (wins_a + wins_b) as f64)
}

/// Fraction of formalizations whose premises entail their conclusion, as a
/// percentage. Fragment errors count as invalid and are logged.
pub fn validity_rate(formalizations: &[Formalization]) -> Result<f64, EvalError> {
    if formalizations.is_empty() {
        return Err(EvalError::NotEnoughData(
            "validity rate over an empty set".into(),
        ));
    }
    let mut valid = 0usize;
    for f in formalizations {
        match check_validity(&f.premises, &f.conclusion) {
            Ok(v) if v.is_valid() => valid += 1,
            Ok(_) => {}
            Err(e) => log::warn!("validity check failed, counting as invalid: {e}"),
        }
    }
    Ok(100.0 * valid as f64 / formalizations.len() as f64)
}

/// Append match records to a line-delimited file.
pub fn write_match_log(records: &[MatchRecord], path: &Path) -> Result<(), EvalError> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| EvalError::Io(e.to_string()))?,
    );
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| EvalError::Io(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| EvalError::Io(e.to_string()))?;
    }
    Ok(())
}

pub fn read_match_log(path: &Path) -> Result<Vec<MatchRecord>, EvalError> {
    let file = std::fs::File::open(path).map_err(|e| EvalError::Io(e.to_string()))?;
    let mut out = Vec::new();
    for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| EvalError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: MatchRecord = serde_json::from_str(&line)
            .map_err(|e| EvalError::Io(format!("match log line {}: {e}", lineno + 1)))?;
        out.push(record);
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
