//! Topic modeling toolkit for consumer-complaint narratives.
//!
//! The pipeline runs in four stages, each usable on its own:
//!
//! 1. [`ingest`] — read the public complaints CSV, keep records with
//!    narratives, and drop duplicate narratives.
//! 2. [`preprocess`] — lowercase, tokenize, filter stopwords, Porter-stem,
//!    and build a sparse term–document matrix ([`corpus`]).
//! 3. [`lda`] — fit latent Dirichlet allocation by collapsed Gibbs sampling;
//!    infer mixtures for unseen documents by folding in.
//! 4. [`analytics`] — monthly topic-popularity series, top-m mixture
//!    truncation, rank-based document grouping, and CSV/JSON trend export.
//!
//! [`pipeline`] wires the stages together behind a single config file; the
//! `ntopics` binary is a thin CLI over it. Every stage is deterministic:
//! identical inputs, config, and seed reproduce identical output bytes.

pub mod analytics;
pub mod corpus;
pub mod error;
pub mod ingest;
pub mod lda;
pub mod pipeline;
pub mod preprocess;

pub use error::{Error, Result};
