//! `gaar` — argument reconstruction engine and evaluation tooling.
//!
//! Machine-readable results go to stdout, diagnostics to stderr. Exit codes:
//! 0 success, 1 domain error (invalid problem, non-converged run in strict
//! mode, runtime failure), 2 usage error.

mod problem;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use gaar::dataset::{
    batch_reconstruct_with_model, compute_stats, read_corpus, split, write_corpus, SourceTag,
};
use gaar::eval::{
    fit_bradley_terry, run_league, winning_rate, write_match_log, EvalError, JudgeItem,
    LlmPairwiseJudge, TopsisRow,
};
use gaar::fol::{render_formula, RenderStyle};
use gaar::llm::{
    render_reconstruction_sections, Backend, CassetteWriter, DecodingParams, LiveBackend,
    RecordingBackend, ReplayBackend, RetryPolicy, ScriptedBackend,
};
use gaar::pipeline::{
    ArgumentInput, Criterion, Engine, PipelineConfig, PromptSet, Reconstruction, RunStatus,
    SchemeTheory, Toggles,
};
use gaar::solver::{check_validity, minimal_premise_sets, prune_with_cap};

#[derive(Parser)]
#[command(
    name = "gaar",
    version,
    about = "Argument reconstruction engine with a native first-order validity checker"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct one argument or a whole corpus through the staged engine
    Reconstruct(ReconstructArgs),
    /// Decide validity of a premise/conclusion problem file and show pruning
    Validate(ProblemArgs),
    /// Print the premises that survive minimal-set pruning
    Prune(ProblemArgs),
    /// Pairwise-judge two reconstruction directories and report winning rates
    Evaluate(EvaluateArgs),
    /// Corpus statistics report (counts, word/premise/implicit distributions)
    Stats {
        /// Line-delimited corpus file
        corpus: PathBuf,
    },
    /// Deterministic train/test split of a corpus
    Split(SplitArgs),
    /// TOPSIS scores over a method,cost,quality table
    Topsis {
        /// CSV file with a method,cost,quality header
        table: PathBuf,
    },
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem file: one formula per line, last line "CONCLUSION: ..."
    problem: PathBuf,
    /// Exact minimal-set enumeration cap
    #[arg(long, default_value_t = gaar::solver::DEFAULT_ENUMERATION_CAP)]
    cap: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    Live,
    Replay,
    Scripted,
}

#[derive(Args)]
struct BackendArgs {
    /// Backend mode
    #[arg(long, value_enum, default_value_t = BackendKind::Replay)]
    backend: BackendKind,
    /// Model identifier sent to a live endpoint
    #[arg(long)]
    model: Option<String>,
    /// Cassette file (replay source; also the record target with --record)
    #[arg(long)]
    cassette: Option<PathBuf>,
    /// Scripted responses: a JSON array of strings
    #[arg(long)]
    script: Option<PathBuf>,
    /// Chat-completions endpoint URL for live mode
    #[arg(long)]
    endpoint: Option<String>,
    /// Environment variable holding the API credential
    #[arg(long, default_value = "GAAR_API_KEY")]
    credential_env: String,
    /// Record every live/scripted completion into this cassette
    #[arg(long)]
    record: Option<PathBuf>,
}

/// A wrong invocation, as opposed to a runtime failure; exits with 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (see 'gaar <subcommand> --help')", self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

impl BackendArgs {
    fn build(&self) -> Result<(Box<dyn Backend>, String)> {
        let model = self.model.clone().unwrap_or_else(|| "default".to_string());
        let backend: Box<dyn Backend> = match self.backend {
            BackendKind::Replay => {
                let Some(cassette) = &self.cassette else {
                    return Err(usage("--backend replay requires --cassette <file>"));
                };
                Box::new(ReplayBackend::load(cassette)?)
            }
            BackendKind::Scripted => {
                let Some(script) = &self.script else {
                    return Err(usage("--backend scripted requires --script <file>"));
                };
                let text = std::fs::read_to_string(script)
                    .with_context(|| format!("reading {}", script.display()))?;
                let responses: Vec<String> =
                    serde_json::from_str(&text).context("script file: JSON array of strings")?;
                let scripted = ScriptedBackend::new(responses);
                match &self.record {
                    Some(path) => Box::new(RecordingBackend::new(
                        scripted,
                        CassetteWriter::create(path)?,
                    )),
                    None => Box::new(scripted),
                }
            }
            BackendKind::Live => {
                let Some(endpoint) = &self.endpoint else {
                    return Err(usage("--backend live requires --endpoint <url>"));
                };
                if self.model.is_none() {
                    return Err(usage("--backend live requires --model <id>"));
                }
                let live =
                    LiveBackend::new(endpoint.clone(), &self.credential_env, RetryPolicy::default())?;
                match &self.record {
                    Some(path) => {
                        let writer = CassetteWriter::with_secrets(
                            path,
                            vec![live.credential().to_string()],
                        )?;
                        Box::new(RecordingBackend::new(live, writer))
                    }
                    None => Box::new(live),
                }
            }
        };
        Ok((backend, model))
    }
}

#[derive(Args)]
struct EngineArgs {
    /// Argument-type theory for the reconstruction instruction
    #[arg(long, default_value = "general")]
    scheme: String,
    /// Iteration budget
    #[arg(long, default_value_t = 10)]
    max_iter: usize,
    /// Re-run fallacy detection at iterations N and 2N without convergence
    #[arg(long, default_value_t = 3)]
    fallacy_n: usize,
    /// Disable the fallacy detection stage and its exceptional paths
    #[arg(long)]
    no_fallacy_path: bool,
    /// Replace the three fine-grained criteria with the coarse judgment
    #[arg(long)]
    coarse_faithfulness: bool,
    /// Remove one criterion from the fine-grained judgment (repeatable)
    #[arg(long, value_name = "CRITERION")]
    drop_criterion: Vec<String>,
    /// Disable premise pruning after a Valid verdict
    #[arg(long)]
    no_pruning: bool,
    /// Exact minimal-set enumeration cap inside the validity stage
    #[arg(long, default_value_t = gaar::solver::DEFAULT_ENUMERATION_CAP)]
    premise_cap: usize,
}

impl EngineArgs {
    fn to_config(&self) -> Result<PipelineConfig> {
        let scheme_theory: SchemeTheory = self.scheme.parse().map_err(usage)?;
        let mut criteria = Criterion::all();
        for name in &self.drop_criterion {
            let criterion: Criterion = name.parse().map_err(usage)?;
            criteria.remove(&criterion);
        }
        let config = PipelineConfig {
            max_iterations: self.max_iter,
            fallacy_revision_threshold: self.fallacy_n,
            scheme_theory,
            toggles: Toggles {
                fallacy_path: !self.no_fallacy_path,
                fine_grained_faithfulness: !self.coarse_faithfulness,
                criteria,
                scheme_instruction: true,
                pruning: !self.no_pruning,
            },
            premise_cap: self.premise_cap,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct ReconstructArgs {
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Debate topic for a single-argument run
    #[arg(long)]
    topic: Option<String>,
    /// Argument text inline
    #[arg(long)]
    argument: Option<String>,
    /// Argument text from a file
    #[arg(long)]
    argument_file: Option<PathBuf>,
    /// Optional background text file
    #[arg(long)]
    background_file: Option<PathBuf>,
    /// Batch mode: input corpus of argument records
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Batch mode: output corpus path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the run trace(s) here (a file for single runs, a directory for
    /// batches)
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Concurrent pipeline runs in batch mode
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Exit nonzero when a run does not converge
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    backend: BackendArgs,
    /// Directory of reconstruction files for the first method
    #[arg(long)]
    dir_a: PathBuf,
    /// Directory of reconstruction files for the second method
    #[arg(long)]
    dir_b: PathBuf,
    /// Method names in the report (default: directory names)
    #[arg(long)]
    method_a: Option<String>,
    #[arg(long)]
    method_b: Option<String>,
    /// Judge each item twice with sides swapped to cancel position bias
    #[arg(long)]
    swap_sides: bool,
    /// Write the full match log here (line-delimited records)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SplitArgs {
    /// Line-delimited corpus file
    corpus: PathBuf,
    #[arg(long)]
    train_n: usize,
    #[arg(long)]
    test_n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    train_out: PathBuf,
    #[arg(long)]
    test_out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("gaar: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate(args) => cmd_validate(&args),
        Command::Prune(args) => cmd_prune(&args),
        Command::Topsis { table } => cmd_topsis(&table),
        Command::Stats { corpus } => cmd_stats(&corpus),
        Command::Split(args) => cmd_split(&args),
        Command::Reconstruct(args) => cmd_reconstruct(&args),
        Command::Evaluate(args) => cmd_evaluate(&args),
    }
}

fn cmd_validate(args: &ProblemArgs) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&args.problem)
        .with_context(|| format!("reading {}", args.problem.display()))?;
    let problem = problem::parse_problem(&text)?;
    let verdict = check_validity(&problem.premises, &problem.conclusion)?;
    if !verdict.is_valid() {
        println!(
            "{}",
            json!({
                "verdict": "invalid",
                "countermodel": verdict.countermodel,
            })
        );
        eprintln!("invalid: a countermodel satisfies the premises and falsifies the conclusion");
        return Ok(ExitCode::from(1));
    }
    let sets = minimal_premise_sets(&problem.premises, &problem.conclusion, args.cap)?;
    let kept: Vec<&String> = sets.union.iter().collect();
    let pruned: Vec<String> = problem
        .premises
        .labels()
        .into_iter()
        .filter(|l| !kept.contains(&l))
        .collect();
    println!(
        "{}",
        json!({
            "verdict": "valid",
            "minimal_sets": sets.minimal_sets,
            "union": sets.union,
            "pruned": pruned,
            "exact": sets.exact,
        })
    );
    eprintln!(
        "valid; pruned away: {}",
        if pruned.is_empty() {
            "none".to_string()
        } else {
            pruned.join(", ")
        }
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_prune(args: &ProblemArgs) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&args.problem)
        .with_context(|| format!("reading {}", args.problem.display()))?;
    let problem = problem::parse_problem(&text)?;
    let kept = prune_with_cap(&problem.premises, &problem.conclusion, args.cap)?;
    let kept_labels = kept.labels();
    let pruned: Vec<String> = problem
        .premises
        .labels()
        .into_iter()
        .filter(|l| !kept_labels.contains(l))
        .collect();
    println!(
        "{}",
        json!({
            "kept": kept
                .iter()
                .map(|p| json!({
                    "label": p.label,
                    "formula": render_formula(&p.formula, RenderStyle::Unicode),
                }))
                .collect::<Vec<_>>(),
            "pruned": pruned,
        })
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_topsis(table: &Path) -> Result<ExitCode> {
    let mut reader = csv::Reader::from_path(table)
        .with_context(|| format!("reading {}", table.display()))?;
    let mut rows = Vec::new();
    for record in reader.deserialize() {
        let row: TopsisRow = record.context("topsis table row")?;
        rows.push(row);
    }
    let scores = gaar::eval::topsis(&rows)?;
    println!("method,score");
    for row in &rows {
        println!("{},{:.2}", row.method, scores[&row.method]);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_stats(corpus: &Path) -> Result<ExitCode> {
    let records = read_corpus(corpus)?;
    let stats = compute_stats(&records)?;
    println!(
        "source,count,words_mean,words_std,premises_mean,premises_std,implicit_pct_mean,implicit_pct_std"
    );
    let print_line = |name: &str, line: &gaar::dataset::StatLine| {
        println!(
            "{name},{},{:.2},{:.2},{:.2},{:.2},{:.2},{:.2}",
            line.count,
            line.words_mean,
            line.words_std,
            line.premises_mean,
            line.premises_std,
            line.implicit_pct_mean,
            line.implicit_pct_std
        );
    };
    for tag in SourceTag::ALL {
        if let Some(line) = stats.per_source.get(&tag) {
            print_line(tag.label(), line);
        }
    }
    print_line("Total", &stats.total);
    Ok(ExitCode::SUCCESS)
}

fn cmd_split(args: &SplitArgs) -> Result<ExitCode> {
    let records = read_corpus(&args.corpus)?;
    let (train, test) = split(&records, args.train_n, args.test_n, args.seed)?;
    write_corpus(&train, &args.train_out)?;
    write_corpus(&test, &args.test_out)?;
    println!(
        "{}",
        json!({ "train": train.len(), "test": test.len(), "seed": args.seed })
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_reconstruct(args: &ReconstructArgs) -> Result<ExitCode> {
    let (backend, model) = args.backend.build()?;
    let config = args.engine.to_config()?;

    if let Some(corpus) = &args.corpus {
        let Some(out) = &args.out else {
            return Err(usage("--corpus requires --out <file>"));
        };
        if let Some(dir) = &args.trace_out {
            std::fs::create_dir_all(dir)?;
        }
        let summary = batch_reconstruct_with_model(
            corpus,
            &config,
            backend.as_ref(),
            &model,
            out,
            args.jobs,
            args.trace_out.as_deref(),
        )?;
        println!("{}", serde_json::to_string(&summary)?);
        let all_converged = summary.exhausted == 0 && summary.failed == 0;
        return Ok(if args.strict && !all_converged {
            ExitCode::from(1)
        } else {
            ExitCode::SUCCESS
        });
    }

    let Some(topic) = &args.topic else {
        return Err(usage("single runs need --topic and --argument/--argument-file"));
    };
    let argument = match (&args.argument, &args.argument_file) {
        (Some(text), None) => text.clone(),
        (None, Some(path)) => std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?,
        _ => {
            return Err(usage(
                "provide exactly one of --argument or --argument-file",
            ))
        }
    };
    let background = args
        .background_file
        .as_ref()
        .map(std::fs::read_to_string)
        .transpose()?;
    let input = ArgumentInput::new(topic.clone(), background, argument)?;

    let engine = Engine::new(backend.as_ref(), config)?.with_model(&model);
    match engine.run(&input) {
        Ok(outcome) => {
            if let Some(path) = &args.trace_out {
                outcome.trace.write_to_file(path)?;
            }
            println!(
                "{}",
                json!({
                    "status": outcome.trace.status,
                    "iterations": outcome.trace.iterations.len(),
                    "reconstruction": outcome.reconstruction,
                    "formalization": {
                        "keys": outcome.formalization.keys,
                        "premises": outcome
                            .formalization
                            .premises
                            .iter()
                            .map(|p| json!({
                                "label": p.label,
                                "formula": render_formula(&p.formula, RenderStyle::Unicode),
                            }))
                            .collect::<Vec<_>>(),
                        "conclusion": render_formula(
                            &outcome.formalization.conclusion,
                            RenderStyle::Unicode
                        ),
                    },
                    "fallacy": outcome.fallacy,
                })
            );
            let exhausted = outcome.trace.status == RunStatus::Exhausted;
            if exhausted {
                eprintln!("run exhausted its iteration budget; returning the best attempt");
            }
            Ok(if args.strict && exhausted {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Err(failure) => {
            if let Some(path) = &args.trace_out {
                failure.trace.write_to_file(path)?;
            }
            Err(anyhow::Error::new(failure.error))
        }
    }
}

/// One reconstruction file in an evaluation directory: the debate topic and
/// argument plus the flat premise/conclusion fields.
#[derive(Deserialize)]
struct EvalEntry {
    topic: String,
    argument: String,
    #[serde(flatten)]
    reconstruction: Reconstruction,
}

fn read_eval_dir(dir: &Path) -> Result<BTreeMap<String, EvalEntry>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let text = std::fs::read_to_string(&path)?;
        let parsed: EvalEntry = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        out.insert(stem, parsed);
    }
    if out.is_empty() {
        return Err(usage(format!(
            "no .json reconstruction files in {}",
            dir.display()
        )));
    }
    Ok(out)
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<ExitCode> {
    let (backend, model) = args.backend.build()?;
    let dir_name = |p: &Path| {
        p.file_name()
            .and_then(|s| s.to_str())
            .unwrap_or("method")
            .to_string()
    };
    let method_a = args.method_a.clone().unwrap_or_else(|| dir_name(&args.dir_a));
    let method_b = args.method_b.clone().unwrap_or_else(|| dir_name(&args.dir_b));
    if method_a == method_b {
        return Err(usage("the two methods must have different names"));
    }

    let entries_a = read_eval_dir(&args.dir_a)?;
    let entries_b = read_eval_dir(&args.dir_b)?;
    let items_a: Vec<&String> = entries_a.keys().collect();
    let items_b: Vec<&String> = entries_b.keys().collect();
    if items_a != items_b {
        return Err(usage(format!(
            "the directories cover different items: {} vs {}",
            items_a.len(),
            items_b.len()
        )));
    }

    let mut items = BTreeMap::new();
    let mut reconstructions = BTreeMap::new();
    for (id, entry) in &entries_a {
        items.insert(
            id.clone(),
            JudgeItem {
                id: id.clone(),
                topic: entry.topic.clone(),
                argument: entry.argument.clone(),
            },
        );
        reconstructions.insert(
            (method_a.clone(), id.clone()),
            render_reconstruction_sections(&entry.reconstruction),
        );
    }
    for (id, entry) in &entries_b {
        reconstructions.insert(
            (method_b.clone(), id.clone()),
            render_reconstruction_sections(&entry.reconstruction),
        );
    }

    let judge = LlmPairwiseJudge {
        backend: backend.as_ref(),
        template: PromptSet::builtin().pairwise,
        model,
        params: DecodingParams::default(),
        items,
        reconstructions,
    };
    let item_ids: Vec<String> = entries_a.keys().cloned().collect();
    let methods = vec![method_a.clone(), method_b.clone()];
    let records = run_league(&methods, &item_ids, &judge, args.swap_sides)?;
    if let Some(out) = &args.out {
        write_match_log(&records, out)?;
    }

    let counts = records.iter().fold((0u64, 0u64, 0u64), |acc, r| {
        let a_won = match r.outcome {
            gaar::eval::Outcome::AWins => r.side_a == method_a,
            gaar::eval::Outcome::BWins => r.side_b == method_a,
            gaar::eval::Outcome::Tie => return (acc.0, acc.1, acc.2 + 1),
        };
        if a_won {
            (acc.0 + 1, acc.1, acc.2)
        } else {
            (acc.0, acc.1 + 1, acc.2)
        }
    });
    let rate = match winning_rate(&records, &method_a, &method_b) {
        Ok(r) => Some(r),
        Err(EvalError::AllTies { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let ratings = match fit_bradley_terry(&records) {
        Ok(table) => Some(
            table
                .iter()
                .map(|(m, r)| (m.to_string(), r))
                .collect::<BTreeMap<String, f64>>(),
        ),
        Err(e) => {
            eprintln!("ratings unavailable: {e}");
            None
        }
    };
    println!(
        "{}",
        json!({
            "method_a": method_a,
            "method_b": method_b,
            "items": item_ids.len(),
            "wins_a": counts.0,
            "wins_b": counts.1,
            "ties": counts.2,
            "winning_rate_a": rate,
            "ratings": ratings,
        })
    );
    if let Some(rate) = rate {
        eprintln!("{method_a} : {method_b} — {rate:.1}% (excluding ties)");
    } else {
        eprintln!("{method_a} : {method_b} — every judged item tied");
    }
    Ok(ExitCode::SUCCESS)
}
