//! Corpus records, serialization, statistics, splitting, and the batch
//! reconstruction driver.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::llm::Backend;
use crate::pipeline::{
    ArgumentInput, FallacyReport, PipelineConfig, Reconstruction, RunStatus,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DatasetError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("line {line}: {detail}")]
    Decode { line: usize, detail: String },
    #[error("insufficient data: need {need} records, have {have}")]
    InsufficientData { need: usize, have: usize },
    #[error("io: {0}")]
    Io(String),
}

/// The seven argument sources.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum SourceTag {
    #[serde(rename = "Procon.org")]
    ProconOrg,
    #[serde(rename = "Pros-and-cons-1950")]
    ProsAndCons1950,
    #[serde(rename = "Pros-and-cons-2010")]
    ProsAndCons2010,
    #[serde(rename = "NYT-room-for-debate")]
    NytRoomForDebate,
    #[serde(rename = "Anthropic-Persuasion")]
    AnthropicPersuasion,
    #[serde(rename = "Synthetic Arguments")]
    SyntheticArguments,
    #[serde(rename = "Synthetic Fallacious Arguments")]
    SyntheticFallaciousArguments,
}

impl SourceTag {
    pub const ALL: [SourceTag; 7] = [
        SourceTag::ProconOrg,
        SourceTag::ProsAndCons1950,
        SourceTag::ProsAndCons2010,
        SourceTag::NytRoomForDebate,
        SourceTag::AnthropicPersuasion,
        SourceTag::SyntheticArguments,
        SourceTag::SyntheticFallaciousArguments,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            SourceTag::ProconOrg => "Procon.org",
            SourceTag::ProsAndCons1950 => "Pros-and-cons-1950",
            SourceTag::ProsAndCons2010 => "Pros-and-cons-2010",
            SourceTag::NytRoomForDebate => "NYT-room-for-debate",
            SourceTag::AnthropicPersuasion => "Anthropic-Persuasion",
            SourceTag::SyntheticArguments => "Synthetic Arguments",
            SourceTag::SyntheticFallaciousArguments => "Synthetic Fallacious Arguments",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuthorKind {
    Human,
    Llm,
}

/// One dataset record: an argument and its reconstruction. Serialized with
/// flat field names: id, source, title, background, argument, premises,
/// conclusion, fallacy, author_kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArguinasRecord {
    pub id: String,
    pub source: SourceTag,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<String>,
    pub argument: String,
    #[serde(flatten)]
    pub reconstruction: Reconstruction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallacy: Option<FallacyReport>,
    pub author_kind: AuthorKind,
}

impl ArguinasRecord {
    pub fn validate(&self) -> Result<(), String> {
        if self.argument.trim().is_empty() {
            return Err(format!("record {}: empty argument", self.id));
        }
        if self.reconstruction.premises.is_empty() {
            return Err(format!("record {}: no premises", self.id));
        }
        Ok(())
    }
}

/// Read a line-delimited corpus, failing fast with the line number of the
/// first corrupt record.
pub fn read_corpus(path: &Path) -> Result<Vec<ArguinasRecord>, DatasetError> {
    let file = std::fs::File::open(path)
        .map_err(|e| DatasetError::Io(format!("{}: {e}", path.display())))?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| DatasetError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ArguinasRecord = serde_json::from_str(&line).map_err(|e| {
            DatasetError::Decode {
                line: idx + 1,
                detail: e.to_string(),
            }
        })?;
        record.validate().map_err(|detail| DatasetError::Decode {
            line: idx + 1,
            detail,
        })?;
        records.push(record);
    }
    Ok(records)
}

pub fn write_corpus(records: &[ArguinasRecord], path: &Path) -> Result<(), DatasetError> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path)
            .map_err(|e| DatasetError::Io(format!("{}: {e}", path.display())))?,
    );
    for record in records {
        let line = serde_json::to_string(record).map_err(|e| DatasetError::Io(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| DatasetError::Io(e.to_string()))?;
    }
    Ok(())
}

/// Mean and population standard deviation of words per argument, premises
/// per reconstruction, and implicit-premise percentage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatLine {
    pub count: usize,
    pub words_mean: f64,
    pub words_std: f64,
    pub premises_mean: f64,
    pub premises_std: f64,
    pub implicit_pct_mean: f64,
    pub implicit_pct_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub per_source: BTreeMap<SourceTag, StatLine>,
    pub total: StatLine,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn stat_line(records: &[&ArguinasRecord]) -> StatLine {
    let words: Vec<f64> = records
        .iter()
        .map(|r| r.argument.split_whitespace().count() as f64)
        .collect();
    let premises: Vec<f64> = records
        .iter()
        .map(|r| r.reconstruction.premises.len() as f64)
        .collect();
    let implicit: Vec<f64> = records
        .iter()
        .map(|r| {
            let total = r.reconstruction.premises.len() as f64;
            let implicit = r
                .reconstruction
                .premises
                .iter()
                .filter(|p| p.implicit)
                .count() as f64;
            100.0 * implicit / total
        })
        .collect();
    let (words_mean, words_std) = mean_std(&words);
    let (premises_mean, premises_std) = mean_std(&premises);
    let (implicit_pct_mean, implicit_pct_std) = mean_std(&implicit);
    StatLine {
        count: records.len(),
        words_mean,
        words_std,
        premises_mean,
        premises_std,
        implicit_pct_mean,
        implicit_pct_std,
    }
}

/// Corpus statistics per source and pooled. Word counts use whitespace
/// tokenization; implicit percentages are computed per record, then
/// averaged.
pub fn compute_stats(records: &[ArguinasRecord]) -> Result<CorpusStats, DatasetError> {
    if records.is_empty() {
        return Err(DatasetError::EmptyCorpus);
    }
    let mut by_source: BTreeMap<SourceTag, Vec<&ArguinasRecord>> = BTreeMap::new();
    for r in records {
        by_source.entry(r.source).or_default().push(r);
    }
    let per_source = by_source
        .into_iter()
        .map(|(tag, rs)| (tag, stat_line(&rs)))
        .collect();
    let all: Vec<&ArguinasRecord> = records.iter().collect();
    Ok(CorpusStats {
        per_source,
        total: stat_line(&all),
    })
}

/// Deterministic disjoint train/test split of exactly the requested sizes.
pub fn split(
    records: &[ArguinasRecord],
    train_n: usize,
    test_n: usize,
    seed: u64,
) -> Result<(Vec<ArguinasRecord>, Vec<ArguinasRecord>), DatasetError> {
    if train_n + test_n > records.len() {
        return Err(DatasetError::InsufficientData {
            need: train_n + test_n,
            have: records.len(),
        });
    }
    let mut indices: Vec<usize> = (0..records.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let train = indices[..train_n]
        .iter()
        .map(|&i| records[i].clone())
        .collect();
    let test = indices[train_n..train_n + test_n]
        .iter()
        .map(|&i| records[i].clone())
        .collect();
    Ok((train, test))
}

/// An input-corpus record for batch reconstruction: everything of an
/// [`ArguinasRecord`] except the reconstruction itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub id: String,
    pub source: SourceTag,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<String>,
    pub argument: String,
    pub author_kind: AuthorKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub converged: usize,
    pub exhausted: usize,
    pub failed: usize,
}

enum ItemOutcome {
    Record(Box<ArguinasRecord>),
    Skipped { id: String, status: String, detail: String },
}

/// Run the engine over an input corpus and write one record per converged
/// run. Exhausted and failed runs go to a `<out>.sidecar` file instead of
/// the corpus. Per-item errors never abort the batch. Items run on up to
/// `jobs` threads; output order follows input order.
pub fn batch_reconstruct(
    corpus_path: &Path,
    config: &PipelineConfig,
    backend: &dyn Backend,
    out_path: &Path,
    jobs: usize,
    trace_dir: Option<&Path>,
) -> Result<BatchSummary, DatasetError> {
    batch_reconstruct_with_model(corpus_path, config, backend, "default", out_path, jobs, trace_dir)
}

/// [`batch_reconstruct`] with an explicit model identifier for live backends.
pub fn batch_reconstruct_with_model(
    corpus_path: &Path,
    config: &PipelineConfig,
    backend: &dyn Backend,
    model: &str,
    out_path: &Path,
    jobs: usize,
    trace_dir: Option<&Path>,
) -> Result<BatchSummary, DatasetError> {
    let file = std::fs::File::open(corpus_path)
        .map_err(|e| DatasetError::Io(format!("{}: {e}", corpus_path.display())))?;
    let mut parsed: Vec<Result<InputRecord, (usize, String)>> = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| DatasetError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        parsed.push(
            serde_json::from_str::<InputRecord>(&line).map_err(|e| (idx + 1, e.to_string())),
        );
    }

    let jobs = jobs.max(1);
    let next = AtomicUsize::new(0);
    let outcomes: Mutex<Vec<Option<ItemOutcome>>> =
        Mutex::new((0..parsed.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..jobs.min(parsed.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= parsed.len() {
                    break;
                }
                let outcome = run_one(&parsed[i], config, backend, model, trace_dir);
                outcomes.lock().unwrap()[i] = Some(outcome);
            });
        }
    });

    let mut summary = BatchSummary::default();
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(out_path)
            .map_err(|e| DatasetError::Io(format!("{}: {e}", out_path.display())))?,
    );
    let sidecar_path = {
        let mut name = out_path.as_os_str().to_owned();
        name.push(".sidecar");
        std::path::PathBuf::from(name)
    };
    let mut sidecar = std::io::BufWriter::new(
        std::fs::File::create(&sidecar_path)
            .map_err(|e| DatasetError::Io(format!("{}: {e}", sidecar_path.display())))?,
    );

    for outcome in outcomes.into_inner().unwrap().into_iter().flatten() {
        match outcome {
            ItemOutcome::Record(record) => {
                summary.converged += 1;
                let line =
                    serde_json::to_string(&record).map_err(|e| DatasetError::Io(e.to_string()))?;
                writeln!(out, "{line}").map_err(|e| DatasetError::Io(e.to_string()))?;
            }
            ItemOutcome::Skipped { id, status, detail } => {
                match status.as_str() {
                    "exhausted" => summary.exhausted += 1,
                    _ => summary.failed += 1,
                }
                let line = serde_json::json!({ "id": id, "status": status, "detail": detail });
                writeln!(sidecar, "{line}").map_err(|e| DatasetError::Io(e.to_string()))?;
            }
        }
    }
    Ok(summary)
}

fn run_one(
    parsed: &Result<InputRecord, (usize, String)>,
    config: &PipelineConfig,
    backend: &dyn Backend,
    model: &str,
    trace_dir: Option<&Path>,
) -> ItemOutcome {
    let record = match parsed {
        Ok(r) => r,
        Err((line, detail)) => {
            return ItemOutcome::Skipped {
                id: format!("line-{line}"),
                status: "malformed".into(),
                detail: detail.clone(),
            }
        }
    };
    let input = match ArgumentInput::new(
        record.title.clone(),
        record.background.clone(),
        record.argument.clone(),
    ) {
        Ok(input) => input,
        Err(e) => {
            return ItemOutcome::Skipped {
                id: record.id.clone(),
                status: "malformed".into(),
                detail: e.to_string(),
            }
        }
    };
    let engine = match crate::pipeline::Engine::new(backend, config.clone()) {
        Ok(engine) => engine.with_model(model),
        Err(e) => {
            return ItemOutcome::Skipped {
                id: record.id.clone(),
                status: "failed".into(),
                detail: e.to_string(),
            }
        }
    };
    match engine.run(&input) {
        Ok(outcome) => {
            if let Some(dir) = trace_dir {
                let path = dir.join(format!("{}.trace.json", record.id));
                if let Err(e) = outcome.trace.write_to_file(&path) {
                    log::warn!("could not write trace for {}: {e}", record.id);
                }
            }
            match outcome.trace.status {
                RunStatus::Converged => ItemOutcome::Record(Box::new(ArguinasRecord {
                    id: record.id.clone(),
                    source: record.source,
                    title: record.title.clone(),
                    background: record.background.clone(),
                    argument: record.argument.clone(),
                    reconstruction: outcome.reconstruction,
                    fallacy: (!outcome.fallacy.none_detected()).then_some(outcome.fallacy),
                    author_kind: record.author_kind,
                })),
                status => ItemOutcome::Skipped {
                    id: record.id.clone(),
                    status: format!("{status:?}").to_lowercase(),
                    detail: "did not converge".into(),
                },
            }
        }
        Err(failure) => {
            if let Some(dir) = trace_dir {
                let path = dir.join(format!("{}.trace.json", record.id));
                let _ = failure.trace.write_to_file(&path);
            }
            ItemOutcome::Skipped {
                id: record.id.clone(),
                status: "failed".into(),
                detail: failure.error.to_string(),
            }
        }
    }
}
