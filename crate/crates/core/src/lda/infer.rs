//! Folding-in inference for unseen documents.
//!
//! The trained topic-term counts stay frozen; only the new document's
//! assignments are resampled, so the conditional becomes
//! `p(z = k | rest) ∝ (n_dk + α) · (n_kw + η) / (n_k + Vη)`
//! with `n_kw`, `n_k` read from the model.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lda::{DocTopicMixture, TrainedModel};

/// Optional per-call overrides; everything else comes from the model config.
/// Overriding `sweeps` rescales `burn_in` by the original `burn_in/sweeps`
/// ratio so a shortened run still splits into warm-up and estimation phases.
#[derive(Debug, Clone, Default)]
pub struct InferOptions {
    pub sweeps: Option<u32>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferOutcome {
    pub mixture: DocTopicMixture,
    /// Terms passed in, including ones the model has never seen.
    pub total_terms: usize,
    /// Terms skipped because they are absent from the model vocabulary.
    pub unknown_terms: usize,
}

/// Infers a topic mixture for an already-preprocessed term sequence.
/// Unknown terms are skipped and counted; a document with no known terms
/// falls back to the exact uniform prior mean.
pub fn infer(
    model: &TrainedModel,
    doc_id: &str,
    terms: &[String],
    options: &InferOptions,
) -> Result<InferOutcome> {
    let mut schedule = model.config.clone();
    if let Some(sweeps) = options.sweeps {
        if sweeps == 0 {
            return Err(Error::Config("sweeps override must be at least 1".into()));
        }
        schedule.burn_in =
            (sweeps as u64 * model.config.burn_in as u64 / model.config.sweeps as u64) as u32;
        schedule.sweeps = sweeps;
    }
    if let Some(seed) = options.seed {
        schedule.seed = seed;
    }
    schedule.validate()?;

    let k = model.num_topics();
    let tokens: Vec<u32> = terms
        .iter()
        .filter_map(|t| model.vocabulary.id(t))
        .collect();
    let unknown_terms = terms.len() - tokens.len();

    if tokens.is_empty() {
        return Ok(InferOutcome {
            mixture: DocTopicMixture::from_theta(doc_id.to_string(), vec![1.0 / k as f64; k]),
            total_terms: terms.len(),
            unknown_terms,
        });
    }

    let alpha = schedule.alpha;
    let eta = schedule.eta;
    let v_eta = model.vocab_size() as f64 * eta;
    let k_alpha = k as f64 * alpha;
    let n_d = tokens.len() as f64;
    // Model counts never change here, so the per-topic denominator is fixed.
    let inv_denom: Vec<f64> = model
        .topic_totals
        .iter()
        .map(|&n| 1.0 / (n as f64 + v_eta))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let mut doc_topic = vec![0u32; k];
    let mut z: Vec<u32> = tokens
        .iter()
        .map(|_| {
            let topic = rng.random_range(0..k) as u32;
            doc_topic[topic as usize] += 1;
            topic
        })
        .collect();

    let mut weights = vec![0.0f64; k];
    let mut theta_acc = vec![0.0f64; k];
    let mut samples = 0u32;
    for sweep in 0..schedule.sweeps {
        for (n, &w) in tokens.iter().enumerate() {
            let old = z[n] as usize;
            doc_topic[old] -= 1;
            let mut total = 0.0f64;
            for (topic, weight) in weights.iter_mut().enumerate() {
                *weight = (doc_topic[topic] as f64 + alpha)
                    * (model.topic_term_counts[topic][w as usize] as f64 + eta)
                    * inv_denom[topic];
                total += *weight;
            }
            let target = rng.random::<f64>() * total;
            let mut new = k - 1;
            let mut running = 0.0f64;
            for (topic, &weight) in weights.iter().enumerate() {
                running += weight;
                if target < running {
                    new = topic;
                    break;
                }
            }
            doc_topic[new] += 1;
            z[n] = new as u32;
        }
        if schedule.retains(sweep) {
            samples += 1;
            for topic in 0..k {
                theta_acc[topic] += (doc_topic[topic] as f64 + alpha) / (n_d + k_alpha);
            }
        }
    }

    let theta = theta_acc.iter().map(|&t| t / samples as f64).collect();
    Ok(InferOutcome {
        mixture: DocTopicMixture::from_theta(doc_id.to_string(), theta),
        total_terms: terms.len(),
        unknown_terms,
    })
}
