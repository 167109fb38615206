//! Bradley–Terry strength fitting with Elo-like scaling.
//!
//! P(a beats b) = s_a / (s_a + s_b). Ties count as half a win for each side.
//! Strengths are fitted by minorization–maximization iterations and mapped to
//! ratings r_i = 1000 + 400·log10(s_i / s̄) with geometric-mean anchoring, so
//! the mean rating is the initial rating 1000 and scaling every strength by a
//! constant leaves the table unchanged.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EvalError, MatchRecord, Outcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingTable(BTreeMap<String, f64>);

impl RatingTable {
    pub fn get(&self, method: &str) -> Option<f64> {
        self.0.get(method).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Methods sorted by descending rating.
    pub fn ranking(&self) -> Vec<(&str, f64)> {
        let mut rows: Vec<(&str, f64)> = self.iter().collect();
        rows.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        rows
    }

    pub fn write_to_file(&self, path: &Path) -> Result<(), EvalError> {
        let mut out = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| EvalError::Io(e.to_string()))?,
        );
        for (method, rating) in self.ranking() {
            let line = serde_json::json!({ "method": method, "rating": rating });
            writeln!(out, "{line}").map_err(|e| EvalError::Io(e.to_string()))?;
        }
        Ok(())
    }

    pub fn read_from_file(path: &Path) -> Result<Self, EvalError> {
        let file = std::fs::File::open(path).map_err(|e| EvalError::Io(e.to_string()))?;
        let mut map = BTreeMap::new();
        for line in std::io::BufReader::new(file).lines() {
            let line = line.map_err(|e| EvalError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let v: serde_json::Value =
                serde_json::from_str(&line).map_err(|e| EvalError::Io(e.to_string()))?;
            let method = v["method"]
                .as_str()
                .ok_or_else(|| EvalError::Io("rating line missing 'method'".into()))?;
            let rating = v["rating"]
                .as_f64()
                .ok_or_else(|| EvalError::Io("rating line missing 'rating'".into()))?;
            map.insert(method.to_string(), rating);
        }
        Ok(RatingTable(map))
    }
}

/// Pairwise win counts, ties folded in as half-wins.
struct WinMatrix {
    methods: Vec<String>,
    wins: Vec<Vec<f64>>, // wins[i][j] = (possibly fractional) wins of i over j
}

impl WinMatrix {
    fn from_records(records: &[MatchRecord]) -> Self {
        let methods: Vec<String> = records
            .iter()
            .flat_map(|r| [r.side_a.clone(), r.side_b.clone()])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: BTreeMap<&str, usize> = methods
            .iter()
            .enumerate()
            .map(|(i, m)| (m.as_str(), i))
            .collect();
        let n = methods.len();
        let mut wins = vec![vec![0.0; n]; n];
        for r in records {
            let a = index[r.side_a.as_str()];
            let b = index[r.side_b.as_str()];
            match r.outcome {
                Outcome::AWins => wins[a][b] += 1.0,
                Outcome::BWins => wins[b][a] += 1.0,
                Outcome::Tie => {
                    wins[a][b] += 0.5;
                    wins[b][a] += 0.5;
                }
            }
        }
        WinMatrix { methods, wins }
    }

    fn n(&self) -> usize {
        self.methods.len()
    }
}

/// Log-likelihood of the (tie-folded) win counts at the given strengths.
/// Exposed for the grid-search oracle in tests.
pub fn log_likelihood(records: &[MatchRecord], strengths: &BTreeMap<String, f64>) -> f64 {
    let m = WinMatrix::from_records(records);
    let mut ll = 0.0;
    for i in 0..m.n() {
        for j in 0..m.n() {
            if i == j || m.wins[i][j] == 0.0 {
                continue;
            }
            let si = strengths[&m.methods[i]];
            let sj = strengths[&m.methods[j]];
            ll += m.wins[i][j] * (si / (si + sj)).ln();
        }
    }
    ll
}

/// Fit maximum-likelihood Bradley–Terry strengths and return anchored
/// Elo-like ratings.
///
/// The comparison graph must be connected over non-tie records. A method
/// with no losses and no ties (or no wins and no ties) makes the bare MLE
/// unbounded; in that case a uniform pseudo-count of 0.5 wins is added
/// between every ordered pair to keep the fit finite.
pub fn fit_bradley_terry(records: &[MatchRecord]) -> Result<RatingTable, EvalError> {
    for r in records {
        if r.side_a == r.side_b {
            return Err(EvalError::SelfMatch(r.side_a.clone()));
        }
    }
    let mut matrix = WinMatrix::from_records(records);
    let n = matrix.n();
    if n < 2 {
        return Err(EvalError::DisconnectedGraph {
            detail: format!("need at least two methods, found {n}"),
        });
    }
    check_connected(records, &matrix.methods)?;

    // Degenerate undefeated (or never-scoring) methods: regularize.
    let degenerate = (0..n).any(|i| {
        let incoming: f64 = (0..n).map(|j| matrix.wins[j][i]).sum();
        let outgoing: f64 = (0..n).map(|j| matrix.wins[i][j]).sum();
        incoming == 0.0 || outgoing == 0.0
    });
    if degenerate {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    matrix.wins[i][j] += 0.5;
                }
            }
        }
    }

    let strengths = mm_fit(&matrix);
    let geo_mean = (strengths.iter().map(|s| s.ln()).sum::<f64>() / n as f64).exp();
    let table = matrix
        .methods
        .iter()
        .zip(&strengths)
        .map(|(m, &s)| (m.clone(), 1000.0 + 400.0 * (s / geo_mean).log10()))
        .collect();
    Ok(RatingTable(table))
}

fn check_connected(records: &[MatchRecord], methods: &[String]) -> Result<(), EvalError> {
    let index: BTreeMap<&str, usize> = methods
        .iter()
        .enumerate()
        .map(|(i, m)| (m.as_str(), i))
        .collect();
    let n = methods.len();
    let mut adjacency = vec![vec![false; n]; n];
    for r in records {
        if r.outcome != Outcome::Tie {
            let a = index[r.side_a.as_str()];
            let b = index[r.side_b.as_str()];
            adjacency[a][b] = true;
            adjacency[b][a] = true;
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if adjacency[i][j] && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    if let Some(unreached) = (0..n).find(|&i| !seen[i]) {
        return Err(EvalError::DisconnectedGraph {
            detail: format!(
                "'{}' is not reachable from '{}' via non-tie records",
                methods[unreached], methods[0]
            ),
        });
    }
    Ok(())
}

/// Zermelo/minorization–maximization iterations; monotone in likelihood and
/// convergent on connected data.
fn mm_fit(matrix: &WinMatrix) -> Vec<f64> {
    let n = matrix.n();
    let mut s = vec![1.0f64; n];
    let totals: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| matrix.wins[i][j]).sum())
        .collect();
    for _ in 0..20_000 {
        let mut next = vec![0.0f64; n];
        for i in 0..n {
            let mut denom = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let pair_count = matrix.wins[i][j] + matrix.wins[j][i];
                if pair_count > 0.0 {
                    denom += pair_count / (s[i] + s[j]);
                }
            }
            next[i] = if denom > 0.0 { totals[i] / denom } else { s[i] };
        }
        // Normalize by the geometric mean so the iteration cannot drift.
        let geo = (next.iter().map(|v| v.ln()).sum::<f64>() / n as f64).exp();
        for v in &mut next {
            *v /= geo;
        }
        let delta = s
            .iter()
            .zip(&next)
            .map(|(a, b)| (a.ln() - b.ln()).abs())
            .fold(0.0f64, f64::max);
        s = next;
        if delta < 1e-14 {
            break;
        }
    }
    s
}
