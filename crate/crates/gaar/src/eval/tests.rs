use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::*;
use crate::llm::Side;

fn record(item: &str, a: &str, b: &str, outcome: Outcome) -> MatchRecord {
    MatchRecord::new(item, a, b, outcome).unwrap()
}

fn one_sided_log(a: &str, b: &str, wins_a: usize, wins_b: usize, ties: usize) -> Vec<MatchRecord> {
    let mut out = Vec::new();
    for i in 0..wins_a {
        out.push(record(&format!("w{i}"), a, b, Outcome::AWins));
    }
    for i in 0..wins_b {
        out.push(record(&format!("l{i}"), a, b, Outcome::BWins));
    }
    for i in 0..ties {
        out.push(record(&format!("t{i}"), a, b, Outcome::Tie));
    }
    out
}

#[test]
fn winning_rate_excludes_ties() {
    let records = one_sided_log("minimal", "high", 1, 14, 5);
    // 14 wins / (14 + 1) decided matches.
    let rate = winning_rate(&records, "high", "minimal").unwrap();
    assert!((rate - 100.0 * 14.0 / 15.0).abs() < 1e-12);
    assert_eq!(format!("{rate:.1}"), "93.3");
}

#[test]
fn winning_rate_is_symmetric_to_100() {
    let records = one_sided_log("a", "b", 3, 3, 4);
    let ab = winning_rate(&records, "a", "b").unwrap();
    let ba = winning_rate(&records, "b", "a").unwrap();
    assert_eq!(ab, 50.0);
    assert!((ab + ba - 100.0).abs() < 1e-12);
}

#[test]
fn all_ties_is_an_error() {
    let records = one_sided_log("a", "b", 0, 0, 3);
    assert!(matches!(
        winning_rate(&records, "a", "b"),
        Err(EvalError::AllTies { .. })
    ));
}

#[test]
fn self_matches_are_rejected() {
    assert!(matches!(
        MatchRecord::new("i", "m", "m", Outcome::Tie),
        Err(EvalError::SelfMatch(_))
    ));
}

// --- Bradley–Terry ---

#[test]
fn symmetric_two_method_log_anchors_to_exactly_1000() {
    let records = one_sided_log("a", "b", 5, 5, 2);
    let table = fit_bradley_terry(&records).unwrap();
    assert_eq!(table.get("a"), Some(1000.0));
    assert_eq!(table.get("b"), Some(1000.0));
}

#[test]
fn disconnected_graph_is_an_error() {
    let mut records = one_sided_log("a", "b", 2, 1, 0);
    records.extend(one_sided_log("c", "d", 2, 1, 0));
    assert!(matches!(
        fit_bradley_terry(&records),
        Err(EvalError::DisconnectedGraph { .. })
    ));
}

#[test]
fn tie_only_edges_do_not_connect_the_graph() {
    let mut records = one_sided_log("a", "b", 2, 1, 0);
    records.extend(one_sided_log("b", "c", 0, 0, 4));
    assert!(matches!(
        fit_bradley_terry(&records),
        Err(EvalError::DisconnectedGraph { .. })
    ));
}

#[test]
fn undefeated_method_is_regularized_not_unbounded() {
    let mut records = one_sided_log("a", "b", 4, 0, 0);
    records.extend(one_sided_log("b", "c", 3, 1, 0));
    let table = fit_bradley_terry(&records).unwrap();
    let ra = table.get("a").unwrap();
    assert!(ra.is_finite());
    assert!(ra > table.get("b").unwrap());
    assert!(table.get("b").unwrap() > table.get("c").unwrap());
}

#[test]
fn adding_a_win_strictly_raises_the_winner_rating() {
    let mut records = one_sided_log("a", "b", 6, 4, 1);
    records.extend(one_sided_log("b", "c", 5, 5, 0));
    records.extend(one_sided_log("a", "c", 4, 6, 0));
    let before = fit_bradley_terry(&records).unwrap();
    records.push(record("extra", "a", "b", Outcome::AWins));
    let after = fit_bradley_terry(&records).unwrap();
    assert!(after.get("a").unwrap() > before.get("a").unwrap());
}

/// Coarse-to-fine grid search over the strengths of methods 2 and 3 with
/// method 1 pinned to 1.0; the independent likelihood-maximization oracle.
fn grid_search_oracle(records: &[MatchRecord], methods: [&str; 3]) -> BTreeMap<String, f64> {
    let mut center = (0.0f64, 0.0f64); // log10 strengths of methods 2 and 3
    let mut width = 2.0f64;
    let mut best = (f64::NEG_INFINITY, center);
    for _round in 0..5 {
        let steps = 40;
        for i in 0..=steps {
            for j in 0..=steps {
                let l2 = center.0 - width + 2.0 * width * (i as f64) / (steps as f64);
                let l3 = center.1 - width + 2.0 * width * (j as f64) / (steps as f64);
                let strengths: BTreeMap<String, f64> = [
                    (methods[0].to_string(), 1.0),
                    (methods[1].to_string(), 10f64.powf(l2)),
                    (methods[2].to_string(), 10f64.powf(l3)),
                ]
                .into_iter()
                .collect();
                let ll = log_likelihood(records, &strengths);
                if ll > best.0 {
                    best = (ll, (l2, l3));
                }
            }
        }
        center = best.1;
        width /= 10.0;
    }
    [
        (methods[0].to_string(), 1.0),
        (methods[1].to_string(), 10f64.powf(best.1 .0)),
        (methods[2].to_string(), 10f64.powf(best.1 .1)),
    ]
    .into_iter()
    .collect()
}

fn ratings_to_strength_ratios(table: &RatingTable, base: &str) -> BTreeMap<String, f64> {
    let r_base = table.get(base).unwrap();
    table
        .iter()
        .map(|(m, r)| (m.to_string(), 10f64.powf((r - r_base) / 400.0)))
        .collect()
}

#[test]
fn three_method_fit_matches_grid_search_oracle() {
    let mut records = Vec::new();
    records.extend(one_sided_log("a", "b", 8, 4, 2));
    records.extend(one_sided_log("b", "c", 7, 5, 1));
    records.extend(one_sided_log("a", "c", 6, 6, 0));
    let table = fit_bradley_terry(&records).unwrap();
    let got = ratings_to_strength_ratios(&table, "a");
    let oracle = grid_search_oracle(&records, ["a", "b", "c"]);
    for m in ["a", "b", "c"] {
        let want = oracle[m] / oracle["a"];
        assert!(
            (got[m] - want).abs() <= 1e-4,
            "method {m}: got ratio {}, oracle {}",
            got[m],
            want
        );
    }
    // The fitted likelihood is at least the best grid likelihood.
    let fitted: BTreeMap<String, f64> = got;
    assert!(log_likelihood(&records, &fitted) >= log_likelihood(&records, &oracle) - 1e-9);
}

#[test]
fn rating_anchoring_is_scale_invariant_and_means_1000() {
    let mut records = Vec::new();
    records.extend(one_sided_log("a", "b", 9, 3, 0));
    records.extend(one_sided_log("b", "c", 8, 4, 0));
    records.extend(one_sided_log("a", "c", 10, 2, 0));
    let table = fit_bradley_terry(&records).unwrap();
    let mean: f64 = table.iter().map(|(_, r)| r).sum::<f64>() / table.len() as f64;
    assert!((mean - 1000.0).abs() < 1e-9);

    // Translation invariance: the mapping from strengths to ratings ignores
    // a global scale factor, so refitting scaled data is unnecessary — the
    // anchor removes it. Check directly on the Elo map.
    let strengths = [1.0, 4.0, 0.25];
    let anchored = |s: &[f64]| -> Vec<f64> {
        let geo = (s.iter().map(|v| v.ln()).sum::<f64>() / s.len() as f64).exp();
        s.iter().map(|v| 1000.0 + 400.0 * (v / geo).log10()).collect()
    };
    let scaled: Vec<f64> = strengths.iter().map(|s| s * 37.5).collect();
    let a = anchored(&strengths);
    let b = anchored(&scaled);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-9);
    }
}

// --- TOPSIS ---

fn table6_rows() -> Vec<TopsisRow> {
    vec![
        TopsisRow {
            method: "GPT-5.2 (xhigh)".into(),
            cost: 0.8385,
            quality: 1131.07,
        },
        TopsisRow {
            method: "GPT-5.1 (high)".into(),
            cost: 0.3715,
            quality: 1003.13,
        },
        TopsisRow {
            method: "GPT-5 (high)".into(),
            cost: 0.4830,
            quality: 998.28,
        },
        TopsisRow {
            method: "Claude Sonnet 4.5 (no-think)".into(),
            cost: 0.1930,
            quality: 976.42,
        },
        TopsisRow {
            method: "Gemini 3 Flash (high)".into(),
            cost: 0.0945,
            quality: 897.10,
        },
    ]
}

#[test]
fn topsis_reproduces_the_published_scores() {
    let scores = topsis(&table6_rows()).unwrap();
    let expect = [
        ("GPT-5.2 (xhigh)", 50.00),
        ("GPT-5.1 (high)", 53.92),
        ("GPT-5 (high)", 45.52),
        ("Claude Sonnet 4.5 (no-think)", 58.01),
        ("Gemini 3 Flash (high)", 50.00),
    ];
    for (method, want) in expect {
        let got = scores[method];
        assert!(
            (got - want).abs() <= 0.01,
            "{method}: got {got:.4}, want {want}"
        );
    }
}

#[test]
fn dominating_row_scores_100_and_dominated_0() {
    let rows = vec![
        TopsisRow {
            method: "good".into(),
            cost: 0.1,
            quality: 9.0,
        },
        TopsisRow {
            method: "bad".into(),
            cost: 0.9,
            quality: 1.0,
        },
    ];
    let scores = topsis(&rows).unwrap();
    assert_eq!(scores["good"], 100.0);
    assert_eq!(scores["bad"], 0.0);
}

#[test]
fn topsis_is_order_invariant() {
    let mut rows = table6_rows();
    let forward = topsis(&rows).unwrap();
    rows.reverse();
    let backward = topsis(&rows).unwrap();
    assert_eq!(forward, backward);
}

#[test]
fn topsis_is_invariant_under_positive_affine_column_transforms() {
    let rows = table6_rows();
    let transformed: Vec<TopsisRow> = rows
        .iter()
        .map(|r| TopsisRow {
            method: r.method.clone(),
            cost: 3.0 * r.cost + 17.0,
            quality: 0.25 * r.quality - 100.0,
        })
        .collect();
    let a = topsis(&rows).unwrap();
    let b = topsis(&transformed).unwrap();
    for (method, score) in &a {
        assert!((score - b[method]).abs() < 1e-9, "{method}");
    }
}

#[test]
fn topsis_dominance_orders_scores() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..100 {
        let rows: Vec<TopsisRow> = (0..5)
            .map(|i| TopsisRow {
                method: format!("m{i}"),
                cost: rng.gen_range(0.0..1.0),
                quality: rng.gen_range(0.0..100.0),
            })
            .collect();
        let Ok(scores) = topsis(&rows) else { continue };
        for i in 0..rows.len() {
            for j in 0..rows.len() {
                if i == j {
                    continue;
                }
                let dominates = rows[i].cost <= rows[j].cost
                    && rows[i].quality >= rows[j].quality
                    && (rows[i].cost < rows[j].cost || rows[i].quality > rows[j].quality);
                if dominates {
                    assert!(
                        scores[&rows[i].method] > scores[&rows[j].method],
                        "{} should outscore {}",
                        rows[i].method,
                        rows[j].method
                    );
                }
            }
        }
    }
}

#[test]
fn degenerate_column_is_an_error() {
    let rows = vec![
        TopsisRow {
            method: "a".into(),
            cost: 0.5,
            quality: 1.0,
        },
        TopsisRow {
            method: "b".into(),
            cost: 0.5,
            quality: 2.0,
        },
    ];
    assert!(matches!(
        topsis(&rows),
        Err(EvalError::DegenerateColumn { criterion }) if criterion == "cost"
    ));
}

// --- schedulers ---

/// A deterministic judge: the method with the lexicographically smaller name
/// wins items whose id hashes even, the other wins odd ones, except that a
/// configured stronger method always wins.
struct ScriptedJudge {
    stronger: BTreeMap<(String, String), Side>,
}

impl PairwiseJudge for ScriptedJudge {
    fn judge(&self, _item: &str, a: &str, b: &str) -> Result<Option<Side>, EvalError> {
        if let Some(side) = self.stronger.get(&(a.to_string(), b.to_string())) {
            return Ok(Some(*side));
        }
        if let Some(side) = self.stronger.get(&(b.to_string(), a.to_string())) {
            return Ok(Some(match side {
                Side::A => Side::B,
                Side::B => Side::A,
            }));
        }
        Ok(None)
    }
}

#[test]
fn league_judges_every_unordered_pair() {
    let methods: Vec<String> = (0..5).map(|i| format!("m{i}")).collect();
    let items = vec!["item1".to_string()];
    let judge = ScriptedJudge {
        stronger: BTreeMap::new(),
    };
    let records = run_league(&methods, &items, &judge, false).unwrap();
    assert_eq!(records.len(), 10); // C(5,2)
    let mut pairs: Vec<(String, String)> = records
        .iter()
        .map(|r| (r.side_a.clone(), r.side_b.clone()))
        .collect();
    pairs.sort();
    pairs.dedup();
    assert_eq!(pairs.len(), 10);
}

#[test]
fn league_swap_mode_judges_both_orders() {
    let methods = vec!["a".to_string(), "b".to_string()];
    let items = vec!["i1".to_string(), "i2".to_string()];
    let judge = ScriptedJudge {
        stronger: BTreeMap::new(),
    };
    let records = run_league(&methods, &items, &judge, true).unwrap();
    assert_eq!(records.len(), 4);
    assert!(records.iter().any(|r| r.side_a == "a" && r.side_b == "b"));
    assert!(records.iter().any(|r| r.side_a == "b" && r.side_b == "a"));
}

#[test]
fn tournament_advances_majority_winners() {
    // Two first-round matches and a final; the scripted judge makes "s1"
    // and "s2" dominant, and "s2" beats "s1" in the final.
    let bracket = Bracket {
        rounds: vec![
            vec![
                (
                    BracketSlot::Method("s1".into()),
                    BracketSlot::Method("w1".into()),
                ),
                (
                    BracketSlot::Method("s2".into()),
                    BracketSlot::Method("w2".into()),
                ),
            ],
            vec![(
                BracketSlot::WinnerOf {
                    round: 0,
                    match_index: 0,
                },
                BracketSlot::WinnerOf {
                    round: 0,
                    match_index: 1,
                },
            )],
        ],
    };
    let judge = ScriptedJudge {
        stronger: [
            (("s1".to_string(), "w1".to_string()), Side::A),
            (("s2".to_string(), "w2".to_string()), Side::A),
            (("s1".to_string(), "s2".to_string()), Side::B),
        ]
        .into_iter()
        .collect(),
    };
    let items: Vec<String> = (0..4).map(|i| format!("i{i}")).collect();
    let costs = BTreeMap::new();
    let result = run_tournament(&bracket, &items, &judge, &costs).unwrap();
    assert_eq!(result.winner, "s2");
    assert_eq!(result.matches.len(), 3);
    assert_eq!(result.records.len(), 12);
    assert_eq!(result.matches[0].winner, "s1");
    assert_eq!(result.matches[0].winning_rate, Some(100.0));
}

#[test]
fn first_round_winners_advance_as_published() {
    // The six first-round pairings; two of them split 50:50 and fall to the
    // lower-cost side.
    let pairings: [(&str, &str, usize, usize); 6] = [
        ("GPT-5 (minimal)", "GPT-5 (high)", 1, 14),
        ("GPT-5.1 (none)", "GPT-5.1 (high)", 6, 11),
        ("Claude Sonnet 4.5 (think)", "Claude Sonnet 4.5 (no-think)", 5, 5),
        ("Gemini 3 Pro (high)", "Gemini 3 Pro (low)", 5, 5),
        ("GPT-5.2 (none)", "GPT-5.2 (xhigh)", 4, 10),
        ("Gemini 3 Flash (high)", "Gemini 3 Flash (low)", 9, 7),
    ];
    let outcomes: BTreeMap<(String, String), (usize, usize)> = pairings
        .iter()
        .map(|&(a, b, wa, wb)| ((a.to_string(), b.to_string()), (wa, wb)))
        .collect();
    let judge = move |item: &str, a: &str, b: &str| -> Result<Option<Side>, EvalError> {
        let idx: usize = item.trim_start_matches('i').parse().unwrap();
        let (&(wa, wb), flipped) = match outcomes.get(&(a.to_string(), b.to_string())) {
            Some(w) => (w, false),
            None => (&outcomes[&(b.to_string(), a.to_string())], true),
        };
        let a_wins = idx < wa;
        let b_wins = !a_wins && idx < wa + wb;
        Ok(match (a_wins ^ flipped, b_wins) {
            _ if !a_wins && !b_wins => None,
            (true, _) => Some(Side::A),
            _ => Some(Side::B),
        })
    };

    let bracket = Bracket {
        rounds: vec![pairings
            .iter()
            .map(|&(a, b, _, _)| {
                (
                    BracketSlot::Method(a.to_string()),
                    BracketSlot::Method(b.to_string()),
                )
            })
            .collect()],
    };
    let items: Vec<String> = (0..16).map(|i| format!("i{i}")).collect();
    // Costs only matter for the two 50:50 matches: the no-think and Pro-low
    // variants are the cheaper sides.
    let costs: BTreeMap<String, f64> = [
        ("Claude Sonnet 4.5 (think)", 0.30),
        ("Claude Sonnet 4.5 (no-think)", 0.19),
        ("Gemini 3 Pro (high)", 0.40),
        ("Gemini 3 Pro (low)", 0.25),
    ]
    .into_iter()
    .map(|(m, c)| (m.to_string(), c))
    .collect();

    let result = run_tournament(&bracket, &items, &judge, &costs).unwrap();
    let winners: Vec<&str> = result.matches.iter().map(|m| m.winner.as_str()).collect();
    assert_eq!(
        winners,
        vec![
            "GPT-5 (high)",
            "GPT-5.1 (high)",
            "Claude Sonnet 4.5 (no-think)",
            "Gemini 3 Pro (low)",
            "GPT-5.2 (xhigh)",
            "Gemini 3 Flash (high)",
        ]
    );
    // The first match reproduces the published 93.3% rate for the winner.
    assert_eq!(format!("{:.1}", result.matches[0].winning_rate.unwrap()), "93.3");
}

#[test]
fn exact_fifty_fifty_advances_the_cheaper_method() {
    struct Alternating;
    impl PairwiseJudge for Alternating {
        fn judge(&self, item: &str, _a: &str, _b: &str) -> Result<Option<Side>, EvalError> {
            Ok(Some(if item.ends_with(['0', '2']) {
                Side::A
            } else {
                Side::B
            }))
        }
    }
    let bracket = Bracket {
        rounds: vec![vec![(
            BracketSlot::Method("pricey".into()),
            BracketSlot::Method("cheap".into()),
        )]],
    };
    let items: Vec<String> = (0..4).map(|i| format!("i{i}")).collect();
    let costs: BTreeMap<String, f64> = [("pricey".to_string(), 0.5), ("cheap".to_string(), 0.2)]
        .into_iter()
        .collect();
    let result = run_tournament(&bracket, &items, &Alternating, &costs).unwrap();
    assert_eq!(result.winner, "cheap");
}

#[test]
fn forward_bracket_references_are_malformed() {
    let bracket = Bracket {
        rounds: vec![vec![(
            BracketSlot::WinnerOf {
                round: 0,
                match_index: 0,
            },
            BracketSlot::Method("a".into()),
        )]],
    };
    let judge = ScriptedJudge {
        stronger: BTreeMap::new(),
    };
    assert!(matches!(
        run_tournament(&bracket, &["i".to_string()], &judge, &BTreeMap::new()),
        Err(EvalError::MalformedBracket(_))
    ));
}

// --- validity rate ---

#[test]
fn validity_rate_over_scripted_formalizations() {
    use crate::fol::parse_formula;
    use crate::pipeline::Formalization;
    use crate::solver::LabeledPremises;

    let valid = |premise: &str, conclusion: &str| Formalization {
        keys: Default::default(),
        premises: LabeledPremises::from_pairs([("P1", parse_formula(premise).unwrap())]).unwrap(),
        conclusion: parse_formula(conclusion).unwrap(),
    };
    let batch = vec![
        valid("P(A)", "P(A)"),
        valid("P(A) ∧ Q(A)", "Q(A)"),
        valid("∀x [P(x) → Q(x)] ∧ P(A)", "Q(A)"),
        valid("P(A)", "Q(A)"), // invalid
    ];
    let rate = validity_rate(&batch).unwrap();
    assert_eq!(rate, 75.0);

    assert!(matches!(
        validity_rate(&[]),
        Err(EvalError::NotEnoughData(_))
    ));
}

#[test]
fn rating_table_round_trips_through_file() {
    let mut records = one_sided_log("a", "b", 9, 3, 0);
    records.extend(one_sided_log("b", "c", 8, 4, 0));
    records.extend(one_sided_log("a", "c", 10, 2, 0));
    let table = fit_bradley_terry(&records).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ratings.jsonl");
    table.write_to_file(&path).unwrap();
    let back = RatingTable::read_from_file(&path).unwrap();
    assert_eq!(back.len(), 3);
    for (method, rating) in table.iter() {
        assert!((back.get(method).unwrap() - rating).abs() < 1e-12);
    }
    // Ranking is by descending rating.
    let ranking: Vec<&str> = back.ranking().into_iter().map(|(m, _)| m).collect();
    assert_eq!(ranking, vec!["a", "b", "c"]);
}

#[test]
fn match_log_round_trips_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.jsonl");
    let records = one_sided_log("a", "b", 2, 1, 1);
    write_match_log(&records, &path).unwrap();
    let back = read_match_log(&path).unwrap();
    assert_eq!(back, records);
}
