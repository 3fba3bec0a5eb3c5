//! Run configuration and the command bodies behind the CLI.
//!
//! A run is driven by one TOML config file; command-line flags override
//! individual values, and the effective config is written into the output
//! directory next to the artifacts so every run is self-describing.
//! Artifact layout inside `output_dir`:
//!
//! | file                    | content                                  |
//! |-------------------------|------------------------------------------|
//! | `run-config.toml`       | effective config of the producing run    |
//! | `matrix.json`           | term-document matrix                     |
//! | `corpus_meta.json`      | per-document id/date/company/issue       |
//! | `selection_report.json` | ingest selection arithmetic              |
//! | `model.json`            | trained model                            |
//! | `trends.csv` / `.json`  | monthly topic-popularity table           |

use std::collections::{HashMap, HashSet};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analytics::{
    company_filtered_popularity, export_series, topic_popularity, ExportFormat, PopularityMode,
    TopicLabelMap, TopicPopularitySeries,
};
use crate::corpus::{build_matrix, read_matrix_json, write_matrix_json, TermDocumentMatrix};
use crate::error::{Error, Result};
use crate::ingest::{load_complaints, select_corpus, ColumnMap, SelectionReport};
use crate::lda::{self, LdaConfig, TrainedModel};
use crate::preprocess::{
    default_generic_terms, load_stopword_file, preprocess_text, StopwordPolicy,
};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    /// Complaint CSV export. Required by `preprocess` and `run-all`.
    pub csv: PathBuf,
    pub columns: ColumnMap,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopwordsConfig {
    /// Generic English list; omitted means the built-in list.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generic: Option<PathBuf>,
    /// Domain list (company names, state names, ...); omitted means none.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<PathBuf>,
    /// Tokens shorter than this (in characters) are dropped before stemming.
    pub min_token_length: usize,
    /// Extra masking tokens joining the built-in `xx`/`xxxx`/`xxxxxxxx`.
    pub extra_masking: Vec<String>,
}

impl Default for StopwordsConfig {
    fn default() -> Self {
        StopwordsConfig {
            generic: None,
            domain: None,
            min_token_length: 2,
            extra_masking: Vec::new(),
        }
    }
}

/// Aggregation mode name; parameters live next to it in [`PopularityConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PopularityModeName {
    Full,
    Truncated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopularityConfig {
    pub mode: PopularityModeName,
    /// Truncation size, used when `mode = "truncated"`.
    pub top_m: usize,
    /// Renormalize kept proportions to sum to 1, in truncated mode.
    pub renormalize: bool,
}

impl Default for PopularityConfig {
    fn default() -> Self {
        PopularityConfig {
            mode: PopularityModeName::Full,
            top_m: 5,
            renormalize: false,
        }
    }
}

impl PopularityConfig {
    pub fn mode(&self) -> PopularityMode {
        match self.mode {
            PopularityModeName::Full => PopularityMode::Full,
            PopularityModeName::Truncated => PopularityMode::Truncated {
                top_m: self.top_m,
                renormalize: self.renormalize,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub output_dir: PathBuf,
    /// Topic label file (`topic_id<TAB>label` lines).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    pub input: InputConfig,
    pub stopwords: StopwordsConfig,
    pub model: LdaConfig,
    pub popularity: PopularityConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            output_dir: PathBuf::from("ntopics-out"),
            labels: None,
            input: InputConfig::default(),
            stopwords: StopwordsConfig::default(),
            model: LdaConfig::default(),
            popularity: PopularityConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Reads a TOML config. Relative paths inside the file are resolved
    /// against the file's directory, so a config travels with its data.
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: PipelineConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("cannot parse config {}: {e}", path.display())))?;
        if let Some(base) = path.parent() {
            config.resolve_paths(base);
        }
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let rebase = |p: &mut PathBuf| {
            if p.as_os_str().is_empty() || p.is_absolute() {
                return;
            }
            *p = base.join(&*p);
        };
        rebase(&mut self.output_dir);
        rebase(&mut self.input.csv);
        if let Some(p) = self.labels.as_mut() {
            rebase(p);
        }
        if let Some(p) = self.stopwords.generic.as_mut() {
            rebase(p);
        }
        if let Some(p) = self.stopwords.domain.as_mut() {
            rebase(p);
        }
    }

    /// Checks everything except the input CSV (which only the ingesting
    /// commands require; see [`PipelineConfig::validate_input`]).
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if matches!(self.popularity.mode, PopularityModeName::Truncated) && self.popularity.top_m < 1
        {
            return Err(Error::Config("popularity.top_m must be at least 1".into()));
        }
        for (name, path) in [
            ("labels", &self.labels),
            ("stopwords.generic", &self.stopwords.generic),
            ("stopwords.domain", &self.stopwords.domain),
        ] {
            if let Some(path) = path {
                if !path.is_file() {
                    return Err(Error::Config(format!(
                        "{name} file {} does not exist",
                        path.display()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn validate_input(&self) -> Result<()> {
        if self.input.csv.as_os_str().is_empty() {
            return Err(Error::Config(
                "input.csv is not set; pass --config with an [input] section".into(),
            ));
        }
        if !self.input.csv.is_file() {
            return Err(Error::Config(format!(
                "input CSV {} does not exist",
                self.input.csv.display()
            )));
        }
        Ok(())
    }

    pub fn matrix_path(&self) -> PathBuf {
        self.output_dir.join("matrix.json")
    }

    pub fn meta_path(&self) -> PathBuf {
        self.output_dir.join("corpus_meta.json")
    }

    pub fn report_path(&self) -> PathBuf {
        self.output_dir.join("selection_report.json")
    }

    pub fn model_path(&self) -> PathBuf {
        self.output_dir.join("model.json")
    }

    pub fn trends_path(&self, format: ExportFormat) -> PathBuf {
        match format {
            ExportFormat::Csv => self.output_dir.join("trends.csv"),
            ExportFormat::Json => self.output_dir.join("trends.json"),
        }
    }

    pub fn config_copy_path(&self) -> PathBuf {
        self.output_dir.join("run-config.toml")
    }
}

/// Command-line overrides; `None` keeps the config value. Flags always win.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub seed: Option<u64>,
    pub topics: Option<u32>,
    pub alpha: Option<f64>,
    pub eta: Option<f64>,
    pub sweeps: Option<u32>,
    pub burn_in: Option<u32>,
    pub top_m: Option<usize>,
    pub renormalize: Option<bool>,
    pub labels: Option<PathBuf>,
}

impl ConfigOverrides {
    pub fn apply(&self, config: &mut PipelineConfig) {
        if let Some(seed) = self.seed {
            config.model.seed = seed;
        }
        if let Some(topics) = self.topics {
            config.model.num_topics = topics;
        }
        if let Some(alpha) = self.alpha {
            config.model.alpha = alpha;
        }
        if let Some(eta) = self.eta {
            config.model.eta = eta;
        }
        if let Some(sweeps) = self.sweeps {
            config.model.sweeps = sweeps;
        }
        if let Some(burn_in) = self.burn_in {
            config.model.burn_in = burn_in;
        }
        if let Some(top_m) = self.top_m {
            config.popularity.top_m = top_m;
            config.popularity.mode = PopularityModeName::Truncated;
        }
        if let Some(renormalize) = self.renormalize {
            config.popularity.renormalize = renormalize;
        }
        if let Some(labels) = &self.labels {
            config.labels = Some(labels.clone());
        }
    }
}

/// Builds the token filter from the config: explicit list files when given,
/// the built-in generic list otherwise.
pub fn stopword_policy_from(config: &StopwordsConfig) -> Result<StopwordPolicy> {
    let generic = match &config.generic {
        Some(path) => load_stopword_file(path)?,
        None => default_generic_terms(),
    };
    let domain = match &config.domain {
        Some(path) => load_stopword_file(path)?,
        None => HashSet::new(),
    };
    let mut policy = StopwordPolicy::new(generic, domain)?
        .with_extra_masking(config.extra_masking.iter().cloned())?;
    policy.min_token_length = config.min_token_length;
    Ok(policy)
}

/// Per-document fields the analytics stage needs alongside the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocMeta {
    pub doc_id: String,
    /// Missing when the source row's date failed to parse; such documents
    /// are modeled but excluded from the time series.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub date: Option<chrono::NaiveDate>,
    pub company: String,
    pub issue: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusMeta {
    format: String,
    format_version: u32,
    pub documents: Vec<DocMeta>,
}

const META_FORMAT: &str = "ntopics-corpus-meta";
const META_VERSION: u32 = 1;

impl CorpusMeta {
    pub fn new(documents: Vec<DocMeta>) -> CorpusMeta {
        CorpusMeta {
            format: META_FORMAT.into(),
            format_version: META_VERSION,
            documents,
        }
    }
}

fn create_file(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn open_file(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut writer = create_file(path)?;
    serde_json::to_writer_pretty(&mut writer, value)
        .map_err(|e| Error::format(path.display().to_string(), e.to_string()))?;
    writer
        .write_all(b"\n")
        .and_then(|_| writer.flush())
        .map_err(|e| Error::io(path, e))
}

fn write_run_config(config: &PipelineConfig) -> Result<()> {
    let text = toml::to_string_pretty(config)
        .map_err(|e| Error::format("run config", e.to_string()))?;
    let path = config.config_copy_path();
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn ensure_output_dir(config: &PipelineConfig) -> Result<()> {
    fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;
    write_run_config(config)
}

pub fn read_matrix_file(path: &Path) -> Result<TermDocumentMatrix> {
    read_matrix_json(open_file(path)?)
}

pub fn read_model_file(path: &Path) -> Result<TrainedModel> {
    lda::load_model(open_file(path)?)
}

pub fn read_meta_file(path: &Path) -> Result<CorpusMeta> {
    let meta: CorpusMeta = serde_json::from_reader(open_file(path)?)
        .map_err(|e| Error::format(path.display().to_string(), e.to_string()))?;
    if meta.format != META_FORMAT || meta.format_version != META_VERSION {
        return Err(Error::format(
            path.display().to_string(),
            "unexpected corpus-meta format or version",
        ));
    }
    Ok(meta)
}

/// Loads the label file named by the config (or an empty map).
pub fn load_labels(config: &PipelineConfig) -> Result<TopicLabelMap> {
    match &config.labels {
        Some(path) => TopicLabelMap::parse(open_file(path)?),
        None => Ok(TopicLabelMap::default()),
    }
}

#[derive(Debug)]
pub struct PreprocessSummary {
    pub report: SelectionReport,
    pub vocabulary_size: usize,
    pub total_tokens: u64,
    pub matrix_path: PathBuf,
}

/// Ingest + select + tokenize + matrix build, writing all artifacts.
pub fn cmd_preprocess(config: &PipelineConfig) -> Result<PreprocessSummary> {
    config.validate()?;
    config.validate_input()?;
    ensure_output_dir(config)?;

    let outcome = load_complaints(open_file(&config.input.csv)?, &config.input.columns)?;
    let (documents, report) = select_corpus(&outcome);
    let policy = stopword_policy_from(&config.stopwords)?;
    let token_docs: Vec<Vec<String>> = documents
        .iter()
        .map(|d| preprocess_text(&d.raw_text, &policy))
        .collect();
    let doc_ids: Vec<String> = documents.iter().map(|d| d.complaint_id.clone()).collect();
    let matrix = build_matrix(doc_ids, &token_docs)?;

    let matrix_path = config.matrix_path();
    let mut writer = create_file(&matrix_path)?;
    write_matrix_json(&matrix, &mut writer)?;
    writer
        .write_all(b"\n")
        .and_then(|_| writer.flush())
        .map_err(|e| Error::io(&matrix_path, e))?;

    let meta = CorpusMeta::new(
        documents
            .iter()
            .map(|d| DocMeta {
                doc_id: d.complaint_id.clone(),
                date: d.date_received,
                company: d.company.clone(),
                issue: d.issue.clone(),
            })
            .collect(),
    );
    write_json_pretty(&config.meta_path(), &meta)?;
    write_json_pretty(&config.report_path(), &report)?;

    Ok(PreprocessSummary {
        report,
        vocabulary_size: matrix.num_terms(),
        total_tokens: matrix.total_tokens(),
        matrix_path,
    })
}

#[derive(Debug)]
pub struct TrainSummary {
    pub model_path: PathBuf,
    pub log_likelihood: f64,
    pub sweeps: u32,
    pub seconds_per_sweep: f64,
}

/// Trains on the preprocessed matrix and writes the model file.
pub fn cmd_train(config: &PipelineConfig) -> Result<TrainSummary> {
    config.validate()?;
    ensure_output_dir(config)?;
    let matrix = read_matrix_file(&config.matrix_path())?;
    let started = Instant::now();
    let model = lda::train(&matrix, &config.model)?;
    let elapsed = started.elapsed().as_secs_f64();
    let model_path = config.model_path();
    let mut writer = create_file(&model_path)?;
    lda::save_model(&model, &mut writer)?;
    writer
        .write_all(b"\n")
        .and_then(|_| writer.flush())
        .map_err(|e| Error::io(&model_path, e))?;
    let log_likelihood = lda::log_likelihood(&model, &matrix)?;
    Ok(TrainSummary {
        model_path,
        log_likelihood,
        sweeps: config.model.sweeps,
        seconds_per_sweep: elapsed / config.model.sweeps as f64,
    })
}

#[derive(Debug)]
pub struct PopularitySummary {
    pub trends_path: PathBuf,
    pub series: TopicPopularitySeries,
    pub dated_documents: usize,
    pub undated_skipped: usize,
}

/// Joins the trained mixtures with the per-document dates and exports the
/// monthly trend table.
pub fn cmd_popularity(
    config: &PipelineConfig,
    company: Option<&str>,
    format: ExportFormat,
) -> Result<PopularitySummary> {
    config.validate()?;
    ensure_output_dir(config)?;
    let model = read_model_file(&config.model_path())?;
    let meta = read_meta_file(&config.meta_path())?;
    let labels = load_labels(config)?;
    labels.check_topic_range(model.num_topics())?;

    let by_id: HashMap<&str, &crate::lda::DocTopicMixture> = model
        .training_doc_mixtures
        .iter()
        .map(|m| (m.doc_id.as_str(), m))
        .collect();
    let mut dated = Vec::new();
    let mut undated_skipped = 0usize;
    for doc in &meta.documents {
        let mixture = by_id.get(doc.doc_id.as_str()).ok_or_else(|| {
            Error::Data(format!(
                "document {:?} in corpus meta has no trained mixture; \
                 matrix and model are from different runs",
                doc.doc_id
            ))
        })?;
        match doc.date {
            Some(date) => dated.push((*mixture, date, doc.company.as_str())),
            None => undated_skipped += 1,
        }
    }

    let mode = config.popularity.mode();
    let series = match company {
        Some(filter) => company_filtered_popularity(&dated, filter, mode)?,
        None => {
            let plain: Vec<_> = dated.iter().map(|&(m, d, _)| (m, d)).collect();
            topic_popularity(&plain, mode)?
        }
    };

    let trends_path = config.trends_path(format);
    let mut writer = create_file(&trends_path)?;
    export_series(&series, &labels, format, &mut writer)?;
    writer.flush().map_err(|e| Error::io(&trends_path, e))?;

    Ok(PopularitySummary {
        trends_path,
        dated_documents: dated.len(),
        undated_skipped,
        series,
    })
}

/// `preprocess` then `train` then `popularity`: the whole monthly run.
pub fn run_all(
    config: &PipelineConfig,
    company: Option<&str>,
    format: ExportFormat,
) -> Result<(PreprocessSummary, TrainSummary, PopularitySummary)> {
    let preprocess = cmd_preprocess(config)?;
    let train = cmd_train(config)?;
    let popularity = cmd_popularity(config, company, format)?;
    Ok((preprocess, train, popularity))
}
