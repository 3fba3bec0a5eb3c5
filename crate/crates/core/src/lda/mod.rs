//! Latent Dirichlet allocation by collapsed Gibbs sampling.
//!
//! [`sampler::train`] fits the model; [`infer`](infer::infer) folds unseen
//! documents into a trained model; [`io`] persists models as versioned JSON.
//! Everything is deterministic given the seed in [`LdaConfig`]: one seeded
//! generator, fixed token visit order (document index, then token position).

pub mod infer;
pub mod io;
pub mod sampler;

use serde::{Deserialize, Serialize};

use crate::corpus::{TermDocumentMatrix, Vocabulary};
use crate::error::{Error, Result};

pub use infer::{infer, InferOptions, InferOutcome};
pub use io::{load_model, save_model};
pub use sampler::{train, train_with_observer, SweepView};

/// Sampler hyperparameters and schedule.
///
/// A sweep resamples every token once. Sweep `s` (0-based) is retained for
/// estimation iff `s >= burn_in` and `(s - burn_in) % sample_lag == 0`; the
/// validity rule `sweeps > burn_in` guarantees at least one retained sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaConfig {
    pub num_topics: u32,
    pub alpha: f64,
    pub eta: f64,
    pub sweeps: u32,
    pub burn_in: u32,
    pub sample_lag: u32,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            num_topics: 40,
            alpha: 0.1,
            eta: 0.1,
            sweeps: 1000,
            burn_in: 800,
            sample_lag: 10,
            seed: 0,
        }
    }
}

impl LdaConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(format!("invalid model config: {msg}")));
        if self.num_topics < 1 {
            return fail("num_topics must be at least 1");
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return fail("alpha must be a positive finite number");
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return fail("eta must be a positive finite number");
        }
        if self.sweeps <= self.burn_in {
            return fail("sweeps must exceed burn_in");
        }
        if self.sample_lag < 1 {
            return fail("sample_lag must be at least 1");
        }
        Ok(())
    }

    pub(crate) fn retains(&self, sweep: u32) -> bool {
        sweep >= self.burn_in && (sweep - self.burn_in).is_multiple_of(self.sample_lag)
    }
}

/// Per-document topic proportions with a precomputed ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocTopicMixture {
    pub doc_id: String,
    pub theta: Vec<f64>,
    /// Topic ids sorted by descending proportion, ties by ascending id;
    /// always a full permutation of `0..K`.
    pub dominant_rank: Vec<u32>,
}

impl DocTopicMixture {
    pub fn from_theta(doc_id: String, theta: Vec<f64>) -> DocTopicMixture {
        let mut dominant_rank: Vec<u32> = (0..theta.len() as u32).collect();
        dominant_rank.sort_by(|&a, &b| {
            theta[b as usize]
                .partial_cmp(&theta[a as usize])
                .expect("theta entries are finite")
                .then(a.cmp(&b))
        });
        DocTopicMixture {
            doc_id,
            theta,
            dominant_rank,
        }
    }

    pub fn num_topics(&self) -> usize {
        self.theta.len()
    }
}

/// A fitted model: final-state counts, averaged smoothed estimates, and the
/// per-token assignments of the last sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub config: LdaConfig,
    pub vocabulary: Vocabulary,
    /// `K x V` topic-term counts from the final sweep.
    pub topic_term_counts: Vec<Vec<u32>>,
    /// Row sums of `topic_term_counts`.
    pub topic_totals: Vec<u64>,
    /// `K x V` posterior-mean topic-term probabilities, averaged over
    /// retained sweeps.
    pub beta_hat: Vec<Vec<f64>>,
    /// One mixture per training document, in matrix document order.
    pub training_doc_mixtures: Vec<DocTopicMixture>,
    /// Final topic assignment per token, per document; token order is
    /// ascending term id with repeats (the matrix expansion order).
    pub assignments: Vec<Vec<u32>>,
}

impl TrainedModel {
    pub fn num_topics(&self) -> usize {
        self.topic_term_counts.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    /// Checks every structural invariant, naming the failed check.
    /// Called after deserialization so corrupt files are rejected early.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Data(format!("invalid model: {msg}")));
        self.config.validate()?;
        let k = self.config.num_topics as usize;
        let v = self.vocabulary.len();
        if self.topic_term_counts.len() != k || self.beta_hat.len() != k || self.topic_totals.len() != k {
            return fail(format!("expected {k} topic rows"));
        }
        let mut assigned_per_topic = vec![0u64; k];
        for z_doc in &self.assignments {
            for &z in z_doc {
                let Some(slot) = assigned_per_topic.get_mut(z as usize) else {
                    return fail(format!("assignment {z} out of topic range"));
                };
                *slot += 1;
            }
        }
        for (topic, &assigned) in assigned_per_topic.iter().enumerate() {
            if self.topic_term_counts[topic].len() != v || self.beta_hat[topic].len() != v {
                return fail(format!("topic {topic} rows must have {v} terms"));
            }
            let total: u64 = self.topic_term_counts[topic].iter().map(|&c| c as u64).sum();
            if total != self.topic_totals[topic] {
                return fail(format!(
                    "topic {topic} total {} disagrees with count sum {total}",
                    self.topic_totals[topic]
                ));
            }
            if assigned != self.topic_totals[topic] {
                return fail(format!(
                    "topic {topic} has {assigned} assignments but total {}",
                    self.topic_totals[topic]
                ));
            }
            let row_sum: f64 = self.beta_hat[topic].iter().sum();
            if (row_sum - 1.0).abs() > 1e-9 {
                return fail(format!("beta_hat row {topic} sums to {row_sum}"));
            }
            if self.beta_hat[topic].iter().any(|p| !p.is_finite() || *p < 0.0) {
                return fail(format!("beta_hat row {topic} has an invalid entry"));
            }
        }
        if self.training_doc_mixtures.len() != self.assignments.len() {
            return fail(format!(
                "{} mixtures but {} assignment lists",
                self.training_doc_mixtures.len(),
                self.assignments.len()
            ));
        }
        let mut seen_ids = std::collections::HashSet::new();
        for mixture in &self.training_doc_mixtures {
            if !seen_ids.insert(mixture.doc_id.as_str()) {
                return fail(format!("duplicate document id {:?}", mixture.doc_id));
            }
            validate_mixture(mixture, k).map_err(|e| {
                Error::Data(format!("invalid model: document {:?}: {e}", mixture.doc_id))
            })?;
        }
        Ok(())
    }

    /// The `n` most probable terms of one topic, descending; ties broken by
    /// ascending term id. `n` larger than the vocabulary returns all terms.
    pub fn top_words(&self, topic: u32, n: usize) -> Result<Vec<(String, f64)>> {
        let row = self
            .beta_hat
            .get(topic as usize)
            .ok_or_else(|| {
                Error::Data(format!(
                    "topic {topic} out of range (model has {} topics)",
                    self.num_topics()
                ))
            })?;
        let mut order: Vec<u32> = (0..row.len() as u32).collect();
        order.sort_by(|&a, &b| {
            row[b as usize]
                .partial_cmp(&row[a as usize])
                .expect("beta entries are finite")
                .then(a.cmp(&b))
        });
        Ok(order
            .into_iter()
            .take(n)
            .map(|id| (self.vocabulary.term(id).to_string(), row[id as usize]))
            .collect())
    }
}

pub(crate) fn validate_mixture(mixture: &DocTopicMixture, k: usize) -> Result<()> {
    let fail = |msg: String| Err(Error::Data(msg));
    if mixture.theta.len() != k {
        return fail(format!("theta has {} entries, expected {k}", mixture.theta.len()));
    }
    if mixture.theta.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return fail("theta has a negative or non-finite entry".into());
    }
    let sum: f64 = mixture.theta.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return fail(format!("theta sums to {sum}"));
    }
    let mut seen = vec![false; k];
    for &t in &mixture.dominant_rank {
        match seen.get_mut(t as usize) {
            Some(slot) if !*slot => *slot = true,
            _ => return fail("dominant_rank is not a permutation of topic ids".into()),
        }
    }
    if mixture.dominant_rank.len() != k {
        return fail("dominant_rank is not a permutation of topic ids".into());
    }
    for pair in mixture.dominant_rank.windows(2) {
        if mixture.theta[pair[0] as usize] < mixture.theta[pair[1] as usize] {
            return fail("dominant_rank not sorted by descending proportion".into());
        }
    }
    Ok(())
}

/// Held-out log-likelihood of `matrix` under the model's point estimates:
/// the sum over tokens of `ln(sum_k theta[d][k] * beta_hat[k][w])`.
/// Smoothing keeps every mixture weight strictly positive, so the logs are
/// finite; documents are matched to trained mixtures by id.
pub fn log_likelihood(model: &TrainedModel, matrix: &TermDocumentMatrix) -> Result<f64> {
    if model.vocabulary != matrix.vocabulary {
        return Err(Error::Data(
            "matrix vocabulary differs from model vocabulary".into(),
        ));
    }
    let by_id: std::collections::HashMap<&str, &DocTopicMixture> = model
        .training_doc_mixtures
        .iter()
        .map(|m| (m.doc_id.as_str(), m))
        .collect();
    let mut thetas = Vec::with_capacity(matrix.num_docs());
    for doc_id in &matrix.doc_ids {
        let mixture = by_id.get(doc_id.as_str()).ok_or_else(|| {
            Error::Data(format!("no trained mixture for document {doc_id:?}"))
        })?;
        thetas.push(&mixture.theta);
    }
    let mut total = 0.0f64;
    for cell in &matrix.cells {
        let theta = thetas[cell.doc_index as usize];
        let mut p = 0.0f64;
        for (k, &t) in theta.iter().enumerate() {
            p += t * model.beta_hat[k][cell.term_id as usize];
        }
        total += cell.count as f64 * p.ln();
    }
    Ok(total)
}
