//! Collapsed Gibbs training.
//!
//! The per-token conditional is
//! `p(z = k | rest) ∝ (n_dk + α) · (n_kw + η) / (n_k + Vη)`
//! with the token's own assignment removed from all counts. Point estimates
//! are the smoothed count ratios averaged over retained sweeps.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::corpus::TermDocumentMatrix;
use crate::error::{Error, Result};
use crate::lda::{DocTopicMixture, LdaConfig, TrainedModel};

/// Read-only snapshot handed to the sweep observer after each sweep.
/// Count slices are flattened row-major (`doc * K + topic`, `topic * V + term`).
pub struct SweepView<'a> {
    /// 0-based index of the sweep that just completed.
    pub sweep: u32,
    /// Whether this sweep's estimates were folded into the averages.
    pub retained: bool,
    pub num_topics: usize,
    pub num_terms: usize,
    pub doc_topic_counts: &'a [u32],
    pub topic_term_counts: &'a [u32],
    pub topic_totals: &'a [u64],
    pub assignments: &'a [Vec<u32>],
}

/// Expands each document into its token term-ids: ascending term id,
/// each repeated by its count. This fixed order makes runs reproducible.
fn expand_documents(matrix: &TermDocumentMatrix) -> Vec<Vec<u32>> {
    matrix
        .docs_as_term_counts()
        .into_iter()
        .map(|doc| {
            let mut tokens = Vec::with_capacity(doc.iter().map(|&(_, c)| c as usize).sum());
            for (term, count) in doc {
                tokens.extend(std::iter::repeat_n(term, count as usize));
            }
            tokens
        })
        .collect()
}

pub fn train(matrix: &TermDocumentMatrix, config: &LdaConfig) -> Result<TrainedModel> {
    train_with_observer(matrix, config, |_| {})
}

/// Like [`train`], invoking `observer` after every sweep. The observer sees
/// the live count tables, which lets tests assert conservation identities
/// sweep by sweep without slowing the release path.
pub fn train_with_observer<F>(
    matrix: &TermDocumentMatrix,
    config: &LdaConfig,
    mut observer: F,
) -> Result<TrainedModel>
where
    F: FnMut(&SweepView),
{
    config.validate()?;
    let num_docs = matrix.num_docs();
    if num_docs == 0 {
        return Err(Error::Data("cannot train on a matrix with no documents".into()));
    }
    if matrix.total_tokens() == 0 {
        return Err(Error::Data(
            "cannot train: every document in the matrix is empty".into(),
        ));
    }
    let k = config.num_topics as usize;
    let v = matrix.num_terms();
    let alpha = config.alpha;
    let eta = config.eta;
    let v_eta = v as f64 * eta;
    let k_alpha = k as f64 * alpha;

    let tokens = expand_documents(matrix);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut doc_topic = vec![0u32; num_docs * k];
    let mut topic_term = vec![0u32; k * v];
    let mut topic_total = vec![0u64; k];
    let mut assignments: Vec<Vec<u32>> = tokens
        .iter()
        .map(|doc| Vec::with_capacity(doc.len()))
        .collect();
    for (d, doc) in tokens.iter().enumerate() {
        for &w in doc {
            let z = rng.random_range(0..k) as u32;
            doc_topic[d * k + z as usize] += 1;
            topic_term[z as usize * v + w as usize] += 1;
            topic_total[z as usize] += 1;
            assignments[d].push(z);
        }
    }

    let mut theta_acc = vec![0.0f64; num_docs * k];
    let mut beta_acc = vec![0.0f64; k * v];
    let mut samples = 0u32;
    let mut weights = vec![0.0f64; k];

    for sweep in 0..config.sweeps {
        for (d, doc) in tokens.iter().enumerate() {
            let doc_row = d * k;
            for (n, &w) in doc.iter().enumerate() {
                let old = assignments[d][n] as usize;
                doc_topic[doc_row + old] -= 1;
                topic_term[old * v + w as usize] -= 1;
                topic_total[old] -= 1;

                let mut total = 0.0f64;
                for (topic, weight) in weights.iter_mut().enumerate() {
                    *weight = (doc_topic[doc_row + topic] as f64 + alpha)
                        * (topic_term[topic * v + w as usize] as f64 + eta)
                        / (topic_total[topic] as f64 + v_eta);
                    total += *weight;
                }
                debug_assert!(total.is_finite() && total > 0.0);

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

                doc_topic[doc_row + new] += 1;
                topic_term[new * v + w as usize] += 1;
                topic_total[new] += 1;
                assignments[d][n] = new as u32;
            }
        }

        let retained = config.retains(sweep);
        if retained {
            samples += 1;
            for d in 0..num_docs {
                let n_d = tokens[d].len() as f64;
                for topic in 0..k {
                    theta_acc[d * k + topic] +=
                        (doc_topic[d * k + topic] as f64 + alpha) / (n_d + k_alpha);
                }
            }
            for topic in 0..k {
                let denom = topic_total[topic] as f64 + v_eta;
                for w in 0..v {
                    beta_acc[topic * v + w] += (topic_term[topic * v + w] as f64 + eta) / denom;
                }
            }
        }
        observer(&SweepView {
            sweep,
            retained,
            num_topics: k,
            num_terms: v,
            doc_topic_counts: &doc_topic,
            topic_term_counts: &topic_term,
            topic_totals: &topic_total,
            assignments: &assignments,
        });
    }

    let samples = samples as f64;
    let training_doc_mixtures = matrix
        .doc_ids
        .iter()
        .enumerate()
        .map(|(d, id)| {
            let theta = theta_acc[d * k..(d + 1) * k]
                .iter()
                .map(|&t| t / samples)
                .collect();
            DocTopicMixture::from_theta(id.clone(), theta)
        })
        .collect();
    let beta_hat = (0..k)
        .map(|topic| {
            beta_acc[topic * v..(topic + 1) * v]
                .iter()
                .map(|&b| b / samples)
                .collect()
        })
        .collect();
    let topic_term_counts = (0..k)
        .map(|topic| topic_term[topic * v..(topic + 1) * v].to_vec())
        .collect();

    Ok(TrainedModel {
        config: config.clone(),
        vocabulary: matrix.vocabulary.clone(),
        topic_term_counts,
        topic_totals: topic_total,
        beta_hat,
        training_doc_mixtures,
        assignments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_matrix;

    fn matrix_from(docs: &[&[&str]]) -> TermDocumentMatrix {
        let token_docs: Vec<Vec<String>> = docs
            .iter()
            .map(|doc| doc.iter().map(|t| t.to_string()).collect())
            .collect();
        let ids = (0..docs.len()).map(|i| format!("doc{i}")).collect();
        build_matrix(ids, &token_docs).unwrap()
    }

    fn quick(k: u32, seed: u64) -> LdaConfig {
        LdaConfig {
            num_topics: k,
            sweeps: 30,
            burn_in: 10,
            sample_lag: 2,
            seed,
            ..LdaConfig::default()
        }
    }

    #[test]
    fn single_topic_has_closed_form() {
        let matrix = matrix_from(&[&["pay", "pay", "fee"], &["fee", "late"]]);
        let model = train(&matrix, &quick(1, 3)).unwrap();
        for mixture in &model.training_doc_mixtures {
            assert_eq!(mixture.theta, vec![1.0]);
            assert_eq!(mixture.dominant_rank, vec![0]);
        }
        // counts: fee 2, late 1, pay 2; total 5, V = 3.
        let expected = [2.0f64, 1.0, 2.0].map(|c| (c + 0.1) / (5.0 + 3.0 * 0.1));
        for (got, want) in model.beta_hat[0].iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        model.validate().unwrap();
    }

    #[test]
    fn same_seed_reproduces_bit_identical_models() {
        let matrix = matrix_from(&[
            &["loan", "car", "loan", "dealer"],
            &["card", "fee", "fee"],
            &["report", "score", "report", "error", "score"],
        ]);
        let a = train(&matrix, &quick(3, 42)).unwrap();
        let b = train(&matrix, &quick(3, 42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_diverge() {
        let matrix = matrix_from(&[
            &["loan", "car", "loan", "dealer", "loan", "title"],
            &["card", "fee", "fee", "annual", "card", "fee"],
            &["report", "score", "report", "error", "score", "bureau"],
            &["call", "phone", "call", "work", "call", "stop"],
        ]);
        let a = train(&matrix, &quick(3, 1)).unwrap();
        let b = train(&matrix, &quick(3, 2)).unwrap();
        assert_ne!(a.beta_hat, b.beta_hat);
    }

    #[test]
    fn counts_are_conserved_after_every_sweep() {
        let matrix = matrix_from(&[
            &["a", "b", "c", "a"],
            &[],
            &["c", "c", "d"],
            &["e", "a", "b", "d", "e", "e"],
        ]);
        let doc_lengths = matrix.doc_lengths.clone();
        let total: u64 = matrix.total_tokens();
        let mut sweeps_seen = 0;
        let model = train_with_observer(&matrix, &quick(2, 9), |view| {
            sweeps_seen += 1;
            let k = view.num_topics;
            for (d, &len) in doc_lengths.iter().enumerate() {
                let row_sum: u32 = view.doc_topic_counts[d * k..(d + 1) * k].iter().sum();
                assert_eq!(row_sum, len, "sweep {} doc {d}", view.sweep);
            }
            assert_eq!(view.topic_totals.iter().sum::<u64>(), total);
            for topic in 0..k {
                let row: u64 = view.topic_term_counts
                    [topic * view.num_terms..(topic + 1) * view.num_terms]
                    .iter()
                    .map(|&c| c as u64)
                    .sum();
                assert_eq!(row, view.topic_totals[topic], "sweep {}", view.sweep);
            }
            let mut per_topic = vec![0u64; k];
            for doc in view.assignments {
                for &z in doc {
                    per_topic[z as usize] += 1;
                }
            }
            assert_eq!(per_topic, view.topic_totals);
        })
        .unwrap();
        assert_eq!(sweeps_seen, 30);
        model.validate().unwrap();
    }

    #[test]
    fn estimates_are_proper_distributions() {
        let matrix = matrix_from(&[
            &["a", "b", "c", "a", "d"],
            &["c", "c", "d", "e"],
            &["e", "a", "b"],
        ]);
        let model = train(&matrix, &quick(4, 5)).unwrap();
        for mixture in &model.training_doc_mixtures {
            let sum: f64 = mixture.theta.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(mixture.theta.iter().all(|&p| p > 0.0));
        }
        for row in &model.beta_hat {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(row.iter().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn empty_document_keeps_exact_prior_mean() {
        let matrix = matrix_from(&[&["a", "b"], &[], &["c"]]);
        let model = train(&matrix, &quick(2, 8)).unwrap();
        assert_eq!(model.training_doc_mixtures[1].theta, vec![0.5, 0.5]);
    }

    #[test]
    fn two_topic_tiny_corpus_matches_enumerated_posterior() {
        // Symmetry of the two-topic posterior makes every exact mean 0.5;
        // the averaged sampler estimate must land near it.
        let matrix = matrix_from(&[&["t0", "t1"], &["t1"], &["t2"]]);
        let config = LdaConfig {
            num_topics: 2,
            sweeps: 2000,
            burn_in: 1000,
            sample_lag: 5,
            seed: 13,
            ..LdaConfig::default()
        };
        let model = train(&matrix, &config).unwrap();
        for mixture in &model.training_doc_mixtures {
            for &p in &mixture.theta {
                assert!((p - 0.5).abs() < 0.05, "theta entry {p}");
            }
        }
    }

    #[test]
    fn degenerate_matrices_are_rejected() {
        let empty = build_matrix(vec![], &[]).unwrap();
        assert!(train(&empty, &quick(2, 0)).is_err());
        let all_empty = matrix_from(&[&[], &[]]);
        assert!(train(&all_empty, &quick(2, 0)).is_err());
    }
}
