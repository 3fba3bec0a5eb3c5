//! `ntopics` command line: preprocess complaint CSVs, train the topic
//! model, inspect topics, infer mixtures for new text, and export monthly
//! topic-popularity trends.
//!
//! Machine-readable output (tables, JSON) goes to stdout; progress and
//! summaries go to stderr. Exit codes: 0 success, 2 usage/config error,
//! 3 data error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ntopics::analytics::{
    documents_by_topic_rank, format_sig12, round_sig12, truncate_mixture, ExportFormat,
};
use ntopics::lda::{infer, InferOptions, TrainedModel};
use ntopics::pipeline::{
    cmd_popularity, cmd_preprocess, cmd_train, load_labels, read_model_file, run_all,
    stopword_policy_from, ConfigOverrides, PipelineConfig, PopularitySummary, PreprocessSummary,
    TrainSummary,
};
use ntopics::preprocess::preprocess_text;
use ntopics::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for ExportFormat {
    fn from(f: OutputFormat) -> ExportFormat {
        match f {
            OutputFormat::Csv => ExportFormat::Csv,
            OutputFormat::Json => ExportFormat::Json,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ntopics",
    version,
    about = "Topic-model consumer complaint narratives and track topic trends over time"
)]
struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Random seed for training and inference.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of topics K.
    #[arg(short = 'k', long = "topics", global = true, value_name = "K")]
    topics: Option<u32>,

    /// Dirichlet prior weight on document-topic mixtures.
    #[arg(long, global = true)]
    alpha: Option<f64>,

    /// Dirichlet prior weight on topic-term distributions.
    #[arg(long, global = true)]
    eta: Option<f64>,

    /// Total Gibbs sweeps (for `infer`: sweeps of the folding-in chain).
    #[arg(long, global = true)]
    sweeps: Option<u32>,

    /// Sweeps to discard before estimation.
    #[arg(long = "burn-in", global = true)]
    burn_in: Option<u32>,

    /// Keep only the m most probable topics per document (enables
    /// truncated popularity mode).
    #[arg(long = "top-m", global = true, value_name = "M")]
    top_m: Option<usize>,

    /// Renormalize truncated mixtures to sum to 1.
    #[arg(long, global = true)]
    renormalize: bool,

    /// Topic label file: one `topic_id<TAB>label` per line.
    #[arg(long, global = true, value_name = "FILE")]
    labels: Option<PathBuf>,

    /// Format of exported tables.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the complaint CSV, select narratives, write the term-document
    /// matrix and reports.
    Preprocess,
    /// Train the topic model on the preprocessed matrix.
    Train,
    /// Print the top-n terms of every topic as CSV on stdout.
    Topics {
        /// Terms to print per topic.
        #[arg(short = 'n', long, default_value_t = 10)]
        num_words: usize,
        /// Model file (defaults to `<output_dir>/model.json`).
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
    },
    /// Infer the topic mixture of one new narrative; JSON on stdout.
    Infer {
        /// Raw narrative text. Reads stdin when neither TEXT nor --file is
        /// given.
        text: Option<String>,
        /// Read the narrative from a file instead.
        #[arg(long, value_name = "FILE", conflicts_with = "text")]
        file: Option<PathBuf>,
        /// Report all K proportions instead of the top-m truncation.
        #[arg(long)]
        full: bool,
        /// Model file (defaults to `<output_dir>/model.json`).
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
    },
    /// Export the monthly topic-popularity table.
    Popularity {
        /// Restrict to one company (exact match, case-insensitive).
        #[arg(long)]
        company: Option<String>,
    },
    /// List training documents holding a topic at a given mixture rank.
    Similar {
        /// Topic id to look up.
        #[arg(long)]
        topic: u32,
        /// 1-based rank within each document's top-m topics.
        #[arg(long, default_value_t = 1)]
        rank: usize,
        /// Model file (defaults to `<output_dir>/model.json`).
        #[arg(long, value_name = "FILE")]
        model: Option<PathBuf>,
    },
    /// Run preprocess, train, and popularity in sequence.
    RunAll {
        /// Restrict the trend table to one company.
        #[arg(long)]
        company: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn effective_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    ConfigOverrides {
        seed: cli.seed,
        topics: cli.topics,
        alpha: cli.alpha,
        eta: cli.eta,
        sweeps: cli.sweeps,
        burn_in: cli.burn_in,
        top_m: cli.top_m,
        renormalize: cli.renormalize.then_some(true),
        labels: cli.labels.clone(),
    }
    .apply(&mut config);
    Ok(config)
}

fn model_from(config: &PipelineConfig, path_override: &Option<PathBuf>) -> Result<TrainedModel> {
    let path = path_override.clone().unwrap_or_else(|| config.model_path());
    read_model_file(&path)
}

fn print_preprocess(summary: &PreprocessSummary) {
    let r = &summary.report;
    eprintln!(
        "records: {} total, {} with narrative, {} duplicates removed, {} selected",
        r.total_records, r.with_narrative, r.duplicates_removed, r.final_documents
    );
    if !r.rejected_rows.is_empty() || !r.undated_rows.is_empty() {
        eprintln!(
            "rows without id (skipped): {}; rows without usable date (kept): {}",
            r.rejected_rows.len(),
            r.undated_rows.len()
        );
    }
    eprintln!(
        "vocabulary: {} terms, {} tokens; wrote {}",
        summary.vocabulary_size,
        summary.total_tokens,
        summary.matrix_path.display()
    );
}

fn print_train(summary: &TrainSummary) {
    eprintln!(
        "trained {} sweeps at {:.3} ms/sweep; final log-likelihood {:.6}",
        summary.sweeps,
        summary.seconds_per_sweep * 1e3,
        summary.log_likelihood
    );
    eprintln!("wrote {}", summary.model_path.display());
}

fn print_popularity(summary: &PopularitySummary) {
    eprintln!(
        "aggregated {} documents into {} month buckets ({} undated skipped); wrote {}",
        summary.dated_documents,
        summary.series.num_buckets(),
        summary.undated_skipped,
        summary.trends_path.display()
    );
}

fn run(cli: Cli) -> Result<()> {
    let config = effective_config(&cli)?;
    match &cli.command {
        Command::Preprocess => {
            let summary = cmd_preprocess(&config)?;
            print_preprocess(&summary);
            Ok(())
        }
        Command::Train => {
            let summary = cmd_train(&config)?;
            print_train(&summary);
            Ok(())
        }
        Command::RunAll { company } => {
            let (pre, train, pop) = run_all(&config, company.as_deref(), cli.format.into())?;
            print_preprocess(&pre);
            print_train(&train);
            print_popularity(&pop);
            Ok(())
        }
        Command::Popularity { company } => {
            let summary = cmd_popularity(&config, company.as_deref(), cli.format.into())?;
            print_popularity(&summary);
            Ok(())
        }
        Command::Topics { num_words, model } => {
            if *num_words < 1 {
                return Err(Error::Config("--num-words must be at least 1".into()));
            }
            let model = model_from(&config, model)?;
            let labels = load_labels(&config)?;
            labels.check_topic_range(model.num_topics())?;
            let stdout = std::io::stdout();
            let mut writer = csv::Writer::from_writer(stdout.lock());
            let as_csv = |e: csv::Error| Error::format("stdout CSV", e.to_string());
            writer
                .write_record(["topic_id", "label", "rank", "term", "probability"])
                .map_err(as_csv)?;
            for topic in 0..model.num_topics() as u32 {
                let label = labels.label_for(topic);
                for (rank, (term, probability)) in
                    model.top_words(topic, *num_words)?.iter().enumerate()
                {
                    writer
                        .write_record([
                            topic.to_string(),
                            label.clone(),
                            (rank + 1).to_string(),
                            term.clone(),
                            format_sig12(*probability),
                        ])
                        .map_err(as_csv)?;
                }
            }
            writer.flush().map_err(|e| Error::format("stdout CSV", e.to_string()))
        }
        Command::Infer { text, file, full, model } => {
            let raw = match (text, file) {
                (Some(text), None) => text.clone(),
                (None, Some(path)) => {
                    fs::read_to_string(path).map_err(|e| Error::io(path, e))?
                }
                (None, None) => std::io::read_to_string(std::io::stdin())
                    .map_err(|e| Error::format("stdin", e.to_string()))?,
                (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
            };
            let model = model_from(&config, model)?;
            let labels = load_labels(&config)?;
            labels.check_topic_range(model.num_topics())?;
            let policy = stopword_policy_from(&config.stopwords)?;
            let terms = preprocess_text(&raw, &policy);
            let options = InferOptions { sweeps: cli.sweeps, seed: cli.seed };
            let outcome = infer(&model, "query", &terms, &options)?;
            if terms.is_empty() {
                eprintln!("warning: no usable terms in the input; mixture is the uniform prior");
            } else if outcome.unknown_terms == outcome.total_terms {
                eprintln!(
                    "warning: none of the {} terms are in the model vocabulary; \
                     mixture is the uniform prior",
                    outcome.total_terms
                );
            } else if outcome.unknown_terms > 0 {
                eprintln!(
                    "warning: {} of {} terms are not in the model vocabulary and were skipped",
                    outcome.unknown_terms, outcome.total_terms
                );
            }
            let entries: Vec<(u32, f64)> = if *full {
                outcome
                    .mixture
                    .dominant_rank
                    .iter()
                    .map(|&t| (t, outcome.mixture.theta[t as usize]))
                    .collect()
            } else {
                truncate_mixture(&outcome.mixture, config.popularity.top_m, config.popularity.renormalize)?
                    .entries
            };
            let entries: Vec<serde_json::Value> = entries
                .into_iter()
                .map(|(topic, proportion)| {
                    serde_json::json!({
                        "topic_id": topic,
                        "label": labels.label_for(topic),
                        "proportion": serde_json::Number::from_f64(round_sig12(proportion))
                            .expect("proportions are finite"),
                    })
                })
                .collect();
            let output = serde_json::json!({
                "total_terms": outcome.total_terms,
                "unknown_terms": outcome.unknown_terms,
                "truncated": !*full,
                "entries": entries,
            });
            let text = serde_json::to_string_pretty(&output)
                .map_err(|e| Error::format("infer JSON", e.to_string()))?;
            println!("{text}");
            Ok(())
        }
        Command::Similar { topic, rank, model } => {
            let model = model_from(&config, model)?;
            if *topic as usize >= model.num_topics() {
                return Err(Error::Data(format!(
                    "topic {topic} out of range (model has {} topics)",
                    model.num_topics()
                )));
            }
            let m = config.popularity.top_m;
            let mixtures: Vec<_> = model.training_doc_mixtures.iter().collect();
            let hits = documents_by_topic_rank(&mixtures, *topic, *rank, m)?;
            let stdout = std::io::stdout();
            let mut writer = csv::Writer::from_writer(stdout.lock());
            let as_csv = |e: csv::Error| Error::format("stdout CSV", e.to_string());
            writer.write_record(["doc_id", "proportion"]).map_err(as_csv)?;
            for (doc_id, proportion) in &hits {
                writer
                    .write_record([doc_id.clone(), format_sig12(*proportion)])
                    .map_err(as_csv)?;
            }
            writer.flush().map_err(|e| Error::format("stdout CSV", e.to_string()))?;
            eprintln!(
                "{} documents have topic {} at rank {} (top-{})",
                hits.len(),
                topic,
                rank,
                m
            );
            Ok(())
        }
    }
}
