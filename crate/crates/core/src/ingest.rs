//! Complaint CSV ingestion and corpus selection.
//!
//! [`load_complaints`] parses the public complaint-database export (quoted
//! fields, embedded newlines, both date formats the export has used).
//! [`select_corpus`] keeps records that actually have a narrative and drops
//! duplicate narratives, producing the working corpus plus a
//! [`SelectionReport`] of the arithmetic.

use std::collections::HashSet;
use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CSV header names, overridable for exports with renamed columns.
/// Matching is exact first, then ASCII-case-insensitive.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub complaint_id: String,
    pub date_received: String,
    pub product: String,
    pub issue: String,
    pub company: String,
    pub state: String,
    pub narrative: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            complaint_id: "Complaint ID".into(),
            date_received: "Date received".into(),
            product: "Product".into(),
            issue: "Issue".into(),
            company: "Company".into(),
            state: "State".into(),
            narrative: "Consumer complaint narrative".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplaintRecord {
    pub complaint_id: String,
    /// `None` when the date field was empty or unparseable; such records are
    /// still usable for topic fitting, only time-series analytics skip them.
    pub date_received: Option<NaiveDate>,
    pub product: String,
    pub issue: String,
    pub company: String,
    pub state: Option<String>,
    pub narrative: Option<String>,
}

/// One selected narrative with the fields analytics needs later.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusDocument {
    pub complaint_id: String,
    pub date_received: Option<NaiveDate>,
    pub raw_text: String,
    pub issue: String,
    pub company: String,
}

/// Parsed records plus per-row bookkeeping.
/// Row numbers are 1-based data rows (the header row is not counted).
#[derive(Debug, Default)]
pub struct LoadOutcome {
    pub records: Vec<ComplaintRecord>,
    pub total_rows: usize,
    /// Rows skipped entirely (no usable complaint id).
    pub rejected_rows: Vec<usize>,
    /// Rows kept without a parseable date.
    pub undated_rows: Vec<usize>,
}

impl LoadOutcome {
    pub fn from_records(records: Vec<ComplaintRecord>) -> Self {
        let total_rows = records.len();
        LoadOutcome {
            records,
            total_rows,
            rejected_rows: Vec::new(),
            undated_rows: Vec::new(),
        }
    }
}

/// Selection accounting. The count identity
/// `final_documents = with_narrative - duplicates_removed`
/// holds by construction and is asserted by tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub total_records: usize,
    pub with_narrative: usize,
    pub duplicates_removed: usize,
    pub final_documents: usize,
    pub rejected_rows: Vec<usize>,
    pub undated_rows: Vec<usize>,
}

/// Accepts the two formats the public export has used over time.
pub fn parse_received_date(raw: &str) -> Option<NaiveDate> {
    let raw = raw.trim();
    NaiveDate::parse_from_str(raw, "%m/%d/%Y")
        .or_else(|_| NaiveDate::parse_from_str(raw, "%Y-%m-%d"))
        .ok()
}

/// Duplicate-detection normalization: trim the ends, collapse every internal
/// whitespace run to a single space. Case is preserved.
pub fn normalize_narrative(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

struct ColumnIndices {
    complaint_id: usize,
    date_received: usize,
    product: usize,
    issue: usize,
    company: usize,
    state: Option<usize>,
    narrative: usize,
}

fn find_column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .or_else(|| headers.iter().position(|h| h.eq_ignore_ascii_case(name)))
}

fn resolve_columns(headers: &csv::StringRecord, columns: &ColumnMap) -> Result<ColumnIndices> {
    let required = |name: &str| {
        find_column(headers, name)
            .ok_or_else(|| Error::Data(format!("required column {name:?} not found in CSV header")))
    };
    Ok(ColumnIndices {
        complaint_id: required(&columns.complaint_id)?,
        date_received: required(&columns.date_received)?,
        product: required(&columns.product)?,
        issue: required(&columns.issue)?,
        company: required(&columns.company)?,
        state: find_column(headers, &columns.state),
        narrative: required(&columns.narrative)?,
    })
}

/// Parses the CSV into records. Structural CSV errors abort with the row
/// number; rows without a complaint id are skipped and reported; rows with an
/// unparseable date are kept and flagged (see [`ComplaintRecord`]).
pub fn load_complaints<R: Read>(reader: R, columns: &ColumnMap) -> Result<LoadOutcome> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| csv_error_at(0, e))?
        .clone();
    let idx = resolve_columns(&headers, columns)?;

    let mut outcome = LoadOutcome::default();
    for (i, row) in csv_reader.records().enumerate() {
        let row_number = i + 1;
        let row = row.map_err(|e| csv_error_at(row_number as u64, e))?;
        outcome.total_rows += 1;

        let field = |j: usize| row.get(j).unwrap_or("").to_string();
        let complaint_id = field(idx.complaint_id).trim().to_string();
        if complaint_id.is_empty() {
            outcome.rejected_rows.push(row_number);
            continue;
        }
        let date_received = parse_received_date(&field(idx.date_received));
        if date_received.is_none() {
            outcome.undated_rows.push(row_number);
        }
        let state = idx.state.map(field).filter(|s| !s.trim().is_empty());
        let narrative = Some(field(idx.narrative)).filter(|s| !s.trim().is_empty());
        outcome.records.push(ComplaintRecord {
            complaint_id,
            date_received,
            product: field(idx.product),
            issue: field(idx.issue),
            company: field(idx.company),
            state,
            narrative,
        });
    }
    Ok(outcome)
}

fn csv_error_at(fallback_row: u64, e: csv::Error) -> Error {
    let row = e
        .position()
        .map(|p| p.record())
        .unwrap_or(fallback_row);
    Error::Csv {
        row,
        message: e.to_string(),
    }
}

/// Keeps records with non-empty narratives, drops duplicate narratives
/// (first occurrence wins, in file order), and returns the corpus with its
/// report. Order of survivors is a stable subsequence of the input.
pub fn select_corpus(outcome: &LoadOutcome) -> (Vec<CorpusDocument>, SelectionReport) {
    let mut seen: HashSet<String> = HashSet::new();
    let mut documents = Vec::new();
    let mut with_narrative = 0usize;
    for record in &outcome.records {
        let Some(narrative) = record.narrative.as_deref() else {
            continue;
        };
        if narrative.trim().is_empty() {
            continue;
        }
        with_narrative += 1;
        if !seen.insert(normalize_narrative(narrative)) {
            continue;
        }
        documents.push(CorpusDocument {
            complaint_id: record.complaint_id.clone(),
            date_received: record.date_received,
            raw_text: narrative.to_string(),
            issue: record.issue.clone(),
            company: record.company.clone(),
        });
    }
    let report = SelectionReport {
        total_records: outcome.total_rows,
        with_narrative,
        duplicates_removed: with_narrative - documents.len(),
        final_documents: documents.len(),
        rejected_rows: outcome.rejected_rows.clone(),
        undated_rows: outcome.undated_rows.clone(),
    };
    (documents, report)
}
