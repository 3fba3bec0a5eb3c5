//! Vocabulary and sparse term-document counts.
//!
//! The matrix is stored as sorted `(term_id, doc_index, count)` triples;
//! term ids are ranks in the lexicographically sorted vocabulary, so equal
//! token input always produces byte-identical serialized output.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sorted, deduplicated term list with reverse lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Builds from any iterable of terms; duplicates collapse, order is
    /// lexicographic by Unicode scalar values.
    pub fn from_terms<I, S>(terms: I) -> Vocabulary
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set: HashSet<String> = terms.into_iter().map(|t| t.as_ref().to_string()).collect();
        let mut terms: Vec<String> = set.into_iter().collect();
        terms.sort_unstable();
        Vocabulary::from_sorted_unique(terms).expect("sorted+deduped by construction")
    }

    /// Accepts an already sorted, duplicate-free list (e.g. from a file).
    pub fn from_sorted_unique(terms: Vec<String>) -> Result<Vocabulary> {
        if terms.len() > u32::MAX as usize {
            return Err(Error::Data("vocabulary exceeds u32 term-id range".into()));
        }
        for pair in terms.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::Data(format!(
                    "vocabulary must be strictly sorted; saw {:?} before {:?}",
                    pair[0], pair[1]
                )));
            }
        }
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Ok(Vocabulary { terms, index })
    }

    pub fn id(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: u32) -> &str {
        &self.terms[id as usize]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// One nonzero count. Sorted by `(term_id, doc_index)` inside the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixCell {
    pub term_id: u32,
    pub doc_index: u32,
    pub count: u32,
}

/// Sparse term-document count matrix plus the document ids it describes.
#[derive(Debug, Clone, PartialEq)]
pub struct TermDocumentMatrix {
    pub vocabulary: Vocabulary,
    pub doc_ids: Vec<String>,
    /// Sorted by `(term_id, doc_index)`; counts are strictly positive.
    pub cells: Vec<MatrixCell>,
    /// Token total per document; zero for documents with no surviving tokens.
    pub doc_lengths: Vec<u32>,
}

impl TermDocumentMatrix {
    pub fn num_terms(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn num_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn total_tokens(&self) -> u64 {
        self.doc_lengths.iter().map(|&n| n as u64).sum()
    }

    /// Per-document `(term_id, count)` lists, ascending by term id.
    /// Built in one pass over the sorted cells.
    pub fn docs_as_term_counts(&self) -> Vec<Vec<(u32, u32)>> {
        let mut docs = vec![Vec::new(); self.num_docs()];
        for cell in &self.cells {
            docs[cell.doc_index as usize].push((cell.term_id, cell.count));
        }
        docs
    }

    /// Checks every structural invariant; load paths call this so corrupt
    /// files fail with a named check instead of downstream panics.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Data(format!("invalid matrix: {msg}")));
        if self.doc_ids.len() != self.doc_lengths.len() {
            return fail(format!(
                "{} doc ids but {} doc lengths",
                self.doc_ids.len(),
                self.doc_lengths.len()
            ));
        }
        let mut seen = HashSet::new();
        for id in &self.doc_ids {
            if !seen.insert(id.as_str()) {
                return fail(format!("duplicate document id {id:?}"));
            }
        }
        let mut recount = vec![0u64; self.doc_ids.len()];
        let mut prev: Option<(u32, u32)> = None;
        for cell in &self.cells {
            if cell.count == 0 {
                return fail("zero count stored".into());
            }
            if cell.term_id as usize >= self.vocabulary.len() {
                return fail(format!("term id {} out of range", cell.term_id));
            }
            let Some(slot) = recount.get_mut(cell.doc_index as usize) else {
                return fail(format!("doc index {} out of range", cell.doc_index));
            };
            *slot += cell.count as u64;
            let key = (cell.term_id, cell.doc_index);
            if prev.is_some_and(|p| p >= key) {
                return fail("cells not strictly sorted by (term_id, doc_index)".into());
            }
            prev = Some(key);
        }
        for (i, (&len, &sum)) in self.doc_lengths.iter().zip(&recount).enumerate() {
            if len as u64 != sum {
                return fail(format!(
                    "doc {i} length {len} disagrees with cell sum {sum}"
                ));
            }
        }
        Ok(())
    }
}

/// Builds the matrix from per-document token lists. Token order within a
/// document is irrelevant (only counts are kept). Documents whose token list
/// is empty stay in the matrix as zero-length columns. Duplicate document
/// ids are an error.
pub fn build_matrix(doc_ids: Vec<String>, token_docs: &[Vec<String>]) -> Result<TermDocumentMatrix> {
    if doc_ids.len() != token_docs.len() {
        return Err(Error::Data(format!(
            "{} doc ids but {} token lists",
            doc_ids.len(),
            token_docs.len()
        )));
    }
    if doc_ids.len() > u32::MAX as usize {
        return Err(Error::Data("document count exceeds u32 range".into()));
    }
    let mut seen = HashSet::new();
    for id in &doc_ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::Data(format!("duplicate document id {id:?}")));
        }
    }

    let vocabulary = Vocabulary::from_terms(token_docs.iter().flatten());
    let mut cells = Vec::new();
    let mut doc_lengths = vec![0u32; doc_ids.len()];
    for (d, tokens) in token_docs.iter().enumerate() {
        let mut counts: HashMap<u32, u32> = HashMap::new();
        for token in tokens {
            let id = vocabulary.id(token).expect("built from these tokens");
            *counts.entry(id).or_insert(0) += 1;
        }
        doc_lengths[d] = tokens.len() as u32;
        cells.extend(counts.into_iter().map(|(term_id, count)| MatrixCell {
            term_id,
            doc_index: d as u32,
            count,
        }));
    }
    cells.sort_unstable_by_key(|c| (c.term_id, c.doc_index));
    let matrix = TermDocumentMatrix {
        vocabulary,
        doc_ids,
        cells,
        doc_lengths,
    };
    matrix.validate()?;
    Ok(matrix)
}

/// On-disk JSON form. Cells are `[term_id, doc_index, count]` triples to keep
/// large matrices readable without ballooning the file.
#[derive(Serialize, Deserialize)]
struct MatrixFile {
    format: String,
    format_version: u32,
    vocabulary: Vec<String>,
    doc_ids: Vec<String>,
    doc_lengths: Vec<u32>,
    cells: Vec<(u32, u32, u32)>,
}

const MATRIX_FORMAT: &str = "ntopics-matrix";
const MATRIX_VERSION: u32 = 1;

pub fn write_matrix_json<W: Write>(matrix: &TermDocumentMatrix, writer: W) -> Result<()> {
    let file = MatrixFile {
        format: MATRIX_FORMAT.into(),
        format_version: MATRIX_VERSION,
        vocabulary: matrix.vocabulary.terms().to_vec(),
        doc_ids: matrix.doc_ids.clone(),
        doc_lengths: matrix.doc_lengths.clone(),
        cells: matrix
            .cells
            .iter()
            .map(|c| (c.term_id, c.doc_index, c.count))
            .collect(),
    };
    serde_json::to_writer_pretty(writer, &file)
        .map_err(|e| Error::format("matrix JSON", e.to_string()))
}

pub fn read_matrix_json<R: Read>(reader: R) -> Result<TermDocumentMatrix> {
    let file: MatrixFile = serde_json::from_reader(reader)
        .map_err(|e| Error::format("matrix JSON", e.to_string()))?;
    if file.format != MATRIX_FORMAT {
        return Err(Error::format(
            "matrix JSON",
            format!("unexpected format tag {:?}", file.format),
        ));
    }
    if file.format_version != MATRIX_VERSION {
        return Err(Error::format(
            "matrix JSON",
            format!("unsupported format version {}", file.format_version),
        ));
    }
    let matrix = TermDocumentMatrix {
        vocabulary: Vocabulary::from_sorted_unique(file.vocabulary)?,
        doc_ids: file.doc_ids,
        doc_lengths: file.doc_lengths,
        cells: file
            .cells
            .into_iter()
            .map(|(term_id, doc_index, count)| MatrixCell {
                term_id,
                doc_index,
                count,
            })
            .collect(),
    };
    matrix.validate()?;
    Ok(matrix)
}

const MATRIX_MAGIC: &[u8; 4] = b"NTMX";

/// Compact little-endian binary form: magic, version, then length-prefixed
/// string tables and the cell triples. Exact same information as the JSON.
pub fn write_matrix_binary<W: Write>(matrix: &TermDocumentMatrix, mut writer: W) -> Result<()> {
    let ctx = "matrix binary";
    let io = |e: std::io::Error| Error::format(ctx, e.to_string());
    writer.write_all(MATRIX_MAGIC).map_err(io)?;
    writer.write_all(&MATRIX_VERSION.to_le_bytes()).map_err(io)?;

    let write_u32 = |w: &mut W, v: u32| w.write_all(&v.to_le_bytes()).map_err(io);
    let write_str = |w: &mut W, s: &str| -> Result<()> {
        w.write_all(&(s.len() as u32).to_le_bytes()).map_err(io)?;
        w.write_all(s.as_bytes()).map_err(io)
    };

    write_u32(&mut writer, matrix.vocabulary.len() as u32)?;
    for term in matrix.vocabulary.terms() {
        write_str(&mut writer, term)?;
    }
    write_u32(&mut writer, matrix.doc_ids.len() as u32)?;
    for id in &matrix.doc_ids {
        write_str(&mut writer, id)?;
    }
    for &len in &matrix.doc_lengths {
        write_u32(&mut writer, len)?;
    }
    write_u32(&mut writer, matrix.cells.len() as u32)?;
    for cell in &matrix.cells {
        write_u32(&mut writer, cell.term_id)?;
        write_u32(&mut writer, cell.doc_index)?;
        write_u32(&mut writer, cell.count)?;
    }
    Ok(())
}

pub fn read_matrix_binary<R: Read>(mut reader: R) -> Result<TermDocumentMatrix> {
    let ctx = "matrix binary";
    let io = |e: std::io::Error| Error::format(ctx, e.to_string());
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic).map_err(io)?;
    if &magic != MATRIX_MAGIC {
        return Err(Error::format(ctx, "bad magic bytes"));
    }

    fn read_u32<R: Read>(reader: &mut R, ctx: &str) -> Result<u32> {
        let mut buf = [0u8; 4];
        reader
            .read_exact(&mut buf)
            .map_err(|e| Error::format(ctx, e.to_string()))?;
        Ok(u32::from_le_bytes(buf))
    }
    fn read_str<R: Read>(reader: &mut R, ctx: &str) -> Result<String> {
        let len = read_u32(reader, ctx)? as usize;
        if len > 1 << 24 {
            return Err(Error::format(ctx, format!("string length {len} implausible")));
        }
        let mut buf = vec![0u8; len];
        reader
            .read_exact(&mut buf)
            .map_err(|e| Error::format(ctx, e.to_string()))?;
        String::from_utf8(buf).map_err(|e| Error::format(ctx, e.to_string()))
    }

    let version = read_u32(&mut reader, ctx)?;
    if version != MATRIX_VERSION {
        return Err(Error::format(ctx, format!("unsupported version {version}")));
    }
    let n_terms = read_u32(&mut reader, ctx)? as usize;
    let mut terms = Vec::with_capacity(n_terms.min(1 << 20));
    for _ in 0..n_terms {
        terms.push(read_str(&mut reader, ctx)?);
    }
    let n_docs = read_u32(&mut reader, ctx)? as usize;
    let mut doc_ids = Vec::with_capacity(n_docs.min(1 << 20));
    for _ in 0..n_docs {
        doc_ids.push(read_str(&mut reader, ctx)?);
    }
    let mut doc_lengths = Vec::with_capacity(n_docs.min(1 << 20));
    for _ in 0..n_docs {
        doc_lengths.push(read_u32(&mut reader, ctx)?);
    }
    let n_cells = read_u32(&mut reader, ctx)? as usize;
    let mut cells = Vec::with_capacity(n_cells.min(1 << 20));
    for _ in 0..n_cells {
        cells.push(MatrixCell {
            term_id: read_u32(&mut reader, ctx)?,
            doc_index: read_u32(&mut reader, ctx)?,
            count: read_u32(&mut reader, ctx)?,
        });
    }
    let matrix = TermDocumentMatrix {
        vocabulary: Vocabulary::from_sorted_unique(terms)?,
        doc_ids,
        cells,
        doc_lengths,
    };
    matrix.validate()?;
    Ok(matrix)
}
