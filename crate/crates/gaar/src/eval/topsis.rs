//! TOPSIS scores over the two-criterion (cost, quality) trade-off.
//!
//! Each column is min–max normalized to [0, 1]. The ideal point is
//! (cost 0, quality 1), the anti-ideal (cost 1, quality 0), and the score is
//! 100 · d(anti) / (d(ideal) + d(anti)) with Euclidean distances, so higher
//! is better.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopsisRow {
    pub method: String,
    /// Lower is better; must be nonnegative.
    pub cost: f64,
    /// Higher is better.
    pub quality: f64,
}

pub fn topsis(rows: &[TopsisRow]) -> Result<BTreeMap<String, f64>, EvalError> {
    if rows.len() < 2 {
        return Err(EvalError::NotEnoughData(format!(
            "TOPSIS needs at least two rows, got {}",
            rows.len()
        )));
    }
    let min_max = |values: &mut dyn Iterator<Item = f64>| -> (f64, f64) {
        values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
    };
    let (cost_min, cost_max) = min_max(&mut rows.iter().map(|r| r.cost));
    let (q_min, q_max) = min_max(&mut rows.iter().map(|r| r.quality));
    if cost_max == cost_min {
        return Err(EvalError::DegenerateColumn {
            criterion: "cost".into(),
        });
    }
    if q_max == q_min {
        return Err(EvalError::DegenerateColumn {
            criterion: "quality".into(),
        });
    }

    let mut scores = BTreeMap::new();
    for row in rows {
        let c = (row.cost - cost_min) / (cost_max - cost_min);
        let q = (row.quality - q_min) / (q_max - q_min);
        let d_ideal = (c.powi(2) + (1.0 - q).powi(2)).sqrt();
        let d_anti = ((1.0 - c).powi(2) + q.powi(2)).sqrt();
        scores.insert(row.method.clone(), 100.0 * d_anti / (d_ideal + d_anti));
    }
    Ok(scores)
}
