//! Topic trend analytics over calendar months.
//!
//! Popularity of topic `i` in month `t` is the mean of `theta[i]` across the
//! documents received that month. Mixtures can be truncated to their top-`m`
//! topics (optionally renormalized) before aggregation; months inside the
//! observed range with no documents are kept as flagged zero columns so the
//! time axis stays contiguous.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};
use crate::lda::DocTopicMixture;

/// How document mixtures enter the monthly aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PopularityMode {
    /// Use full mixtures; per-month popularities then sum to 1.
    Full,
    /// Zero out everything below the `top_m` largest proportions;
    /// with `renormalize`, the kept entries are rescaled to sum to 1.
    Truncated { top_m: usize, renormalize: bool },
}

/// A mixture reduced to its largest entries, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedMixture {
    pub doc_id: String,
    /// `(topic_id, proportion)` pairs, positive, descending by proportion.
    pub entries: Vec<(u32, f64)>,
}

/// Keeps the `m` largest-proportion topics (ties by ascending topic id,
/// inherited from the mixture's ranking); zero-proportion topics are never
/// emitted. With `renormalize`, kept proportions are divided by their sum.
pub fn truncate_mixture(
    mixture: &DocTopicMixture,
    m: usize,
    renormalize: bool,
) -> Result<TruncatedMixture> {
    if m < 1 {
        return Err(Error::Config("truncation size must be at least 1".into()));
    }
    let mut entries: Vec<(u32, f64)> = mixture
        .dominant_rank
        .iter()
        .take(m)
        .map(|&t| (t, mixture.theta[t as usize]))
        .filter(|&(_, p)| p > 0.0)
        .collect();
    if renormalize {
        let sum: f64 = entries.iter().map(|&(_, p)| p).sum();
        if sum > 0.0 {
            for entry in &mut entries {
                entry.1 /= sum;
            }
        }
    }
    Ok(TruncatedMixture {
        doc_id: mixture.doc_id.clone(),
        entries,
    })
}

/// Monthly popularity series for every topic.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicPopularitySeries {
    /// `(year, month)` buckets, strictly increasing, contiguous.
    pub buckets: Vec<(i32, u32)>,
    /// Documents aggregated per bucket; 0 marks an empty month.
    pub n_per_bucket: Vec<usize>,
    /// `values[topic][bucket]`, each in `[0, 1]`.
    pub values: Vec<Vec<f64>>,
    pub mode: PopularityMode,
}

impl TopicPopularitySeries {
    pub fn num_topics(&self) -> usize {
        self.values.len()
    }

    pub fn num_buckets(&self) -> usize {
        self.buckets.len()
    }
}

fn month_index(origin: (i32, u32), date: NaiveDate) -> usize {
    let months = (date.year() - origin.0) as i64 * 12 + date.month() as i64 - origin.1 as i64;
    months as usize
}

/// Aggregates dated mixtures into a monthly series covering the full
/// min..max month range. Within a bucket, documents are summed in ascending
/// `doc_id` order, so the result is exactly invariant under input
/// permutation. Fails on an empty input or inconsistent topic counts.
pub fn topic_popularity(
    docs: &[(&DocTopicMixture, NaiveDate)],
    mode: PopularityMode,
) -> Result<TopicPopularitySeries> {
    if docs.is_empty() {
        return Err(Error::Data("no dated documents to aggregate".into()));
    }
    if let PopularityMode::Truncated { top_m, .. } = mode {
        if top_m < 1 {
            return Err(Error::Config("truncation size must be at least 1".into()));
        }
    }
    let k = docs[0].0.num_topics();
    for (mixture, _) in docs {
        if mixture.num_topics() != k {
            return Err(Error::Data(format!(
                "mixture {:?} has {} topics, expected {k}",
                mixture.doc_id,
                mixture.num_topics()
            )));
        }
    }

    let origin_date = docs.iter().map(|&(_, d)| d).min().expect("non-empty");
    let last_date = docs.iter().map(|&(_, d)| d).max().expect("non-empty");
    let origin = (origin_date.year(), origin_date.month());
    let num_buckets = month_index(origin, last_date) + 1;

    let mut buckets = Vec::with_capacity(num_buckets);
    let (mut year, mut month) = origin;
    for _ in 0..num_buckets {
        buckets.push((year, month));
        month += 1;
        if month > 12 {
            month = 1;
            year += 1;
        }
    }

    let mut members: Vec<Vec<&DocTopicMixture>> = vec![Vec::new(); num_buckets];
    for &(mixture, date) in docs {
        members[month_index(origin, date)].push(mixture);
    }
    let mut n_per_bucket = vec![0usize; num_buckets];
    let mut values = vec![vec![0.0f64; num_buckets]; k];
    for (t, bucket) in members.iter_mut().enumerate() {
        bucket.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        n_per_bucket[t] = bucket.len();
        for mixture in bucket.iter() {
            match mode {
                PopularityMode::Full => {
                    for (i, &p) in mixture.theta.iter().enumerate() {
                        values[i][t] += p;
                    }
                }
                PopularityMode::Truncated { top_m, renormalize } => {
                    let truncated = truncate_mixture(mixture, top_m, renormalize)?;
                    for (topic, p) in truncated.entries {
                        values[topic as usize][t] += p;
                    }
                }
            }
        }
        if !bucket.is_empty() {
            for row in values.iter_mut() {
                row[t] /= bucket.len() as f64;
            }
        }
    }

    Ok(TopicPopularitySeries {
        buckets,
        n_per_bucket,
        values,
        mode,
    })
}

/// [`topic_popularity`] restricted to one company (exact match ignoring
/// case). A filter matching nothing is an error naming the filter.
pub fn company_filtered_popularity(
    docs: &[(&DocTopicMixture, NaiveDate, &str)],
    company: &str,
    mode: PopularityMode,
) -> Result<TopicPopularitySeries> {
    let wanted = company.to_lowercase();
    let matching: Vec<(&DocTopicMixture, NaiveDate)> = docs
        .iter()
        .filter(|(_, _, c)| c.to_lowercase() == wanted)
        .map(|&(m, d, _)| (m, d))
        .collect();
    if matching.is_empty() {
        return Err(Error::Data(format!(
            "company filter {company:?} matches no documents"
        )));
    }
    topic_popularity(&matching, mode)
}

/// Documents whose `rank`-th topic (1-based, within the top-`m` truncation)
/// is `topic`, as `(doc_id, proportion)` ordered by descending proportion;
/// proportion ties fall back to ascending doc id.
pub fn documents_by_topic_rank(
    mixtures: &[&DocTopicMixture],
    topic: u32,
    rank: usize,
    m: usize,
) -> Result<Vec<(String, f64)>> {
    if rank < 1 || rank > m {
        return Err(Error::Config(format!(
            "rank must satisfy 1 <= rank <= m (got rank {rank}, m {m})"
        )));
    }
    let mut hits = Vec::new();
    for mixture in mixtures {
        let truncated = truncate_mixture(mixture, m, false)?;
        if let Some(&(t, p)) = truncated.entries.get(rank - 1) {
            if t == topic {
                hits.push((mixture.doc_id.clone(), p));
            }
        }
    }
    hits.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite").then(a.0.cmp(&b.0)));
    Ok(hits)
}

/// Human topic labels; topics without one render as `topic-<id>`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TopicLabelMap {
    labels: BTreeMap<u32, String>,
}

impl TopicLabelMap {
    pub fn label_for(&self, topic: u32) -> String {
        self.labels
            .get(&topic)
            .cloned()
            .unwrap_or_else(|| format!("topic-{topic}"))
    }

    pub fn insert(&mut self, topic: u32, label: String) {
        self.labels.insert(topic, label);
    }

    /// All ids must lie under the model's topic count.
    pub fn check_topic_range(&self, num_topics: usize) -> Result<()> {
        if let Some((&id, _)) = self.labels.iter().find(|(&id, _)| id as usize >= num_topics) {
            return Err(Error::Data(format!(
                "label refers to topic {id}, but the model has {num_topics} topics"
            )));
        }
        Ok(())
    }

    /// Parses `topic_id<TAB>label` lines. Blank lines and `#` comments are
    /// allowed; duplicate ids and empty labels are errors.
    pub fn parse<R: BufRead>(reader: R) -> Result<TopicLabelMap> {
        let mut labels = BTreeMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::format("label file", e.to_string()))?;
            let line_no = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (id, label) = trimmed.split_once('\t').ok_or_else(|| {
                Error::format("label file", format!("line {line_no}: expected <id><TAB><label>"))
            })?;
            let id: u32 = id.trim().parse().map_err(|_| {
                Error::format("label file", format!("line {line_no}: bad topic id {id:?}"))
            })?;
            let label = label.trim();
            if label.is_empty() {
                return Err(Error::format(
                    "label file",
                    format!("line {line_no}: empty label for topic {id}"),
                ));
            }
            if labels.insert(id, label.to_string()).is_some() {
                return Err(Error::format(
                    "label file",
                    format!("line {line_no}: duplicate label for topic {id}"),
                ));
            }
        }
        Ok(TopicLabelMap { labels })
    }
}

/// Output format for [`export_series`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

/// Rounds to 12 significant decimal digits, then prints the shortest string
/// that round-trips to the rounded value. Keeps exported numbers stable and
/// readable without dumping full float noise.
pub fn format_sig12(x: f64) -> String {
    round_sig12(x).to_string()
}

/// The rounding behind [`format_sig12`], for callers emitting JSON numbers.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0; // normalizes -0
    }
    format!("{x:.11e}").parse().expect("scientific form parses")
}

/// Writes `topic_id,label,year,month,n_docs,popularity` rows, one per
/// (topic, bucket), sorted by topic then bucket. JSON mirrors the rows as an
/// array of objects with the same keys.
pub fn export_series<W: Write>(
    series: &TopicPopularitySeries,
    labels: &TopicLabelMap,
    format: ExportFormat,
    writer: W,
) -> Result<()> {
    labels.check_topic_range(series.num_topics())?;
    match format {
        ExportFormat::Csv => {
            let mut csv_writer = csv::Writer::from_writer(writer);
            csv_writer
                .write_record(["topic_id", "label", "year", "month", "n_docs", "popularity"])
                .map_err(|e| Error::format("trend CSV", e.to_string()))?;
            for topic in 0..series.num_topics() {
                for (t, &(year, month)) in series.buckets.iter().enumerate() {
                    csv_writer
                        .write_record([
                            topic.to_string(),
                            labels.label_for(topic as u32),
                            year.to_string(),
                            month.to_string(),
                            series.n_per_bucket[t].to_string(),
                            format_sig12(series.values[topic][t]),
                        ])
                        .map_err(|e| Error::format("trend CSV", e.to_string()))?;
                }
            }
            csv_writer
                .flush()
                .map_err(|e| Error::format("trend CSV", e.to_string()))
        }
        ExportFormat::Json => {
            let mut rows = Vec::new();
            for topic in 0..series.num_topics() {
                for (t, &(year, month)) in series.buckets.iter().enumerate() {
                    let popularity = serde_json::Number::from_f64(round_sig12(
                        series.values[topic][t],
                    ))
                    .expect("popularity is finite");
                    rows.push(serde_json::json!({
                        "topic_id": topic,
                        "label": labels.label_for(topic as u32),
                        "year": year,
                        "month": month,
                        "n_docs": series.n_per_bucket[t],
                        "popularity": popularity,
                    }));
                }
            }
            let mut writer = writer;
            serde_json::to_writer_pretty(&mut writer, &rows)
                .map_err(|e| Error::format("trend JSON", e.to_string()))?;
            writer
                .write_all(b"\n")
                .map_err(|e| Error::format("trend JSON", e.to_string()))
        }
    }
}
