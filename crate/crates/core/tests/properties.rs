//! Randomized invariant checks. Each property encodes a contract that must
//! hold for *every* input, not just the worked examples in the unit tests:
//! cleaned tokens really are clean, reports really add up, serialization
//! really round-trips, aggregation really conserves mass, and the sampler
//! really keeps its books balanced.

use std::collections::HashSet;
use std::sync::OnceLock;

use chrono::NaiveDate;
use proptest::prelude::*;

use ntopics::analytics::{
    documents_by_topic_rank, format_sig12, round_sig12, topic_popularity, truncate_mixture,
    PopularityMode,
};
use ntopics::corpus::{
    build_matrix, read_matrix_binary, read_matrix_json, write_matrix_binary, write_matrix_json,
};
use ntopics::ingest::{normalize_narrative, select_corpus, ComplaintRecord, LoadOutcome};
use ntopics::lda::{
    infer, log_likelihood, train, train_with_observer, DocTopicMixture, InferOptions, LdaConfig,
    TrainedModel,
};
use ntopics::preprocess::{preprocess_text, StopwordPolicy};

// --- shared strategies -----------------------------------------------------

/// A normalized, strictly positive mixture over `k` topics.
fn mixture_strategy(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3..1.0f64, k).prop_map(|raw| {
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / sum).collect()
    })
}

/// `(theta, date, group)` rows for aggregation properties.
fn dated_docs_strategy(
    k: usize,
) -> impl Strategy<Value = Vec<(Vec<f64>, NaiveDate, u8)>> {
    prop::collection::vec(
        (mixture_strategy(k), 2014i32..2017, 1u32..=12, 1u32..=28, 0u8..3),
        1..40,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .map(|(theta, year, month, day, group)| {
                (theta, NaiveDate::from_ymd_opt(year, month, day).unwrap(), group)
            })
            .collect()
    })
}

/// Small token corpora over a six-term alphabet; never entirely empty.
fn token_docs_strategy() -> impl Strategy<Value = Vec<Vec<String>>> {
    let terms = ["apple", "bank", "card", "debt", "error", "fraud"];
    prop::collection::vec(prop::collection::vec(0usize..terms.len(), 0..7), 1..5).prop_map(
        move |docs| {
            let mut docs: Vec<Vec<String>> = docs
                .into_iter()
                .map(|doc| doc.into_iter().map(|t| terms[t].to_string()).collect())
                .collect();
            if docs.iter().all(Vec::is_empty) {
                docs[0].push(terms[0].to_string());
            }
            docs
        },
    )
}

fn mixtures_from(thetas: &[Vec<f64>]) -> Vec<DocTopicMixture> {
    thetas
        .iter()
        .enumerate()
        .map(|(i, theta)| DocTopicMixture::from_theta(format!("doc{i:03}"), theta.clone()))
        .collect()
}

// --- preprocessing ---------------------------------------------------------

proptest! {
    /// Whatever the input, surviving terms are alphabetic runs, stable
    /// under lowercasing (some uppercase letters — Greek ϒ for one — have
    /// no lowercase form and legitimately pass through), and unclaimed by
    /// every stop list.
    #[test]
    fn preprocessed_tokens_are_clean(text in ".{0,160}") {
        let policy = StopwordPolicy::default_english();
        for term in preprocess_text(&text, &policy) {
            prop_assert!(!term.is_empty());
            prop_assert!(
                term.chars().all(char::is_alphabetic),
                "term {term:?} is not an alphabetic run"
            );
            prop_assert_eq!(&term, &term.to_lowercase());
            prop_assert!(!policy.is_stopped(&term), "stopword {term:?} survived");
        }
    }

    /// Raw tokens below the length gate never survive, whatever their stem.
    #[test]
    fn short_tokens_never_survive(words in prop::collection::vec("[a-z]{1,3}", 0..20)) {
        let mut policy = StopwordPolicy::masking_only();
        policy.min_token_length = 4;
        let text = words.join(" ");
        prop_assert!(preprocess_text(&text, &policy).is_empty());
    }
}

// --- ingestion -------------------------------------------------------------

fn record(id: String, narrative: Option<String>) -> ComplaintRecord {
    ComplaintRecord {
        complaint_id: id,
        date_received: NaiveDate::from_ymd_opt(2016, 2, 5),
        product: "Product".into(),
        issue: "Issue".into(),
        company: "Company".into(),
        state: None,
        narrative,
    }
}

proptest! {
    /// Selection arithmetic holds on arbitrary inputs, survivors keep input
    /// order, and no two survivors share a normalized narrative.
    #[test]
    fn selection_report_always_adds_up(
        narratives in prop::collection::vec(
            prop::option::of(prop::sample::select(vec![
                "alpha beta", "alpha  beta ", "gamma", "delta", " ", "",
            ])),
            0..30,
        )
    ) {
        let records: Vec<ComplaintRecord> = narratives
            .iter()
            .enumerate()
            .map(|(i, n)| record(format!("id{i}"), n.map(str::to_string)))
            .collect();
        let (docs, report) = select_corpus(&LoadOutcome::from_records(records));

        prop_assert_eq!(report.total_records, narratives.len());
        prop_assert_eq!(
            report.final_documents,
            report.with_narrative - report.duplicates_removed
        );
        prop_assert_eq!(report.final_documents, docs.len());

        let mut seen = HashSet::new();
        let mut last_index = 0usize;
        for doc in &docs {
            prop_assert!(seen.insert(normalize_narrative(&doc.raw_text)));
            let index: usize = doc.complaint_id[2..].parse().unwrap();
            prop_assert!(docs.len() == 1 || index >= last_index, "order not preserved");
            last_index = index;
        }
    }
}

// --- corpus serialization --------------------------------------------------

proptest! {
    /// Both matrix formats round-trip losslessly and the counts they carry
    /// agree with the tokens that built them.
    #[test]
    fn matrix_roundtrips_through_both_formats(docs in token_docs_strategy()) {
        let doc_ids: Vec<String> = (0..docs.len()).map(|d| format!("d{d}")).collect();
        let matrix = build_matrix(doc_ids, &docs).unwrap();
        matrix.validate().unwrap();
        let tokens: usize = docs.iter().map(Vec::len).sum();
        prop_assert_eq!(matrix.total_tokens(), tokens as u64);

        let mut json = Vec::new();
        write_matrix_json(&matrix, &mut json).unwrap();
        prop_assert_eq!(&read_matrix_json(json.as_slice()).unwrap(), &matrix);

        let mut binary = Vec::new();
        write_matrix_binary(&matrix, &mut binary).unwrap();
        prop_assert_eq!(&read_matrix_binary(binary.as_slice()).unwrap(), &matrix);
    }
}

// --- analytics -------------------------------------------------------------

proptest! {
    /// Full-mode monthly columns are unit mass; permuting the input changes
    /// nothing, bit for bit.
    #[test]
    fn popularity_conserves_mass_and_ignores_order(docs in dated_docs_strategy(4)) {
        let mixtures = mixtures_from(
            &docs.iter().map(|(t, _, _)| t.clone()).collect::<Vec<_>>(),
        );
        let forward: Vec<(&DocTopicMixture, NaiveDate)> = mixtures
            .iter()
            .zip(&docs)
            .map(|(m, &(_, date, _))| (m, date))
            .collect();
        let series = topic_popularity(&forward, PopularityMode::Full).unwrap();
        for (t, &n) in series.n_per_bucket.iter().enumerate() {
            let column: f64 = (0..4).map(|i| series.values[i][t]).sum();
            if n > 0 {
                prop_assert!((column - 1.0).abs() <= 1e-9, "column sum {column}");
            } else {
                prop_assert_eq!(column, 0.0);
            }
        }

        let mut reversed = forward.clone();
        reversed.reverse();
        let again = topic_popularity(&reversed, PopularityMode::Full).unwrap();
        prop_assert_eq!(&again, &series);
    }

    /// Group-weighted monthly sums reassemble the whole-corpus sums.
    #[test]
    fn popularity_is_additive_over_partitions(docs in dated_docs_strategy(3)) {
        let mixtures = mixtures_from(
            &docs.iter().map(|(t, _, _)| t.clone()).collect::<Vec<_>>(),
        );
        let all: Vec<(&DocTopicMixture, NaiveDate)> = mixtures
            .iter()
            .zip(&docs)
            .map(|(m, &(_, date, _))| (m, date))
            .collect();
        let whole = topic_popularity(&all, PopularityMode::Full).unwrap();

        let groups: Vec<Vec<(&DocTopicMixture, NaiveDate)>> = (0..3)
            .map(|g| {
                mixtures
                    .iter()
                    .zip(&docs)
                    .filter(|(_, &(_, _, group))| group == g)
                    .map(|(m, &(_, date, _))| (m, date))
                    .collect()
            })
            .collect();
        let group_series: Vec<_> = groups
            .iter()
            .filter(|g| !g.is_empty())
            .map(|g| topic_popularity(g, PopularityMode::Full).unwrap())
            .collect();

        for (t, &bucket) in whole.buckets.iter().enumerate() {
            for topic in 0..3 {
                let total = whole.n_per_bucket[t] as f64 * whole.values[topic][t];
                let parts: f64 = group_series
                    .iter()
                    .filter_map(|s| {
                        s.buckets.iter().position(|&b| b == bucket).map(|g_t| {
                            s.n_per_bucket[g_t] as f64 * s.values[topic][g_t]
                        })
                    })
                    .sum();
                prop_assert!(
                    (total - parts).abs() <= 1e-12,
                    "bucket {bucket:?} topic {topic}: {total} vs {parts}"
                );
            }
        }
    }

    /// Truncation keeps a positive, descending subset of the original
    /// entries; renormalization rescales without reordering.
    #[test]
    fn truncation_keeps_an_ordered_subset(
        theta in mixture_strategy(6),
        m in 1usize..8,
    ) {
        let mixture = DocTopicMixture::from_theta("doc".into(), theta);
        let plain = truncate_mixture(&mixture, m, false).unwrap();
        prop_assert!(plain.entries.len() <= m);
        let mass: f64 = plain.entries.iter().map(|&(_, p)| p).sum();
        prop_assert!(mass <= 1.0 + 1e-9);
        for window in plain.entries.windows(2) {
            prop_assert!(window[0].1 >= window[1].1);
        }
        for &(topic, p) in &plain.entries {
            prop_assert!(p > 0.0);
            prop_assert_eq!(p, mixture.theta[topic as usize]);
        }

        let scaled = truncate_mixture(&mixture, m, true).unwrap();
        let scaled_mass: f64 = scaled.entries.iter().map(|&(_, p)| p).sum();
        prop_assert!((scaled_mass - 1.0).abs() <= 1e-9);
        for (a, b) in plain.entries.iter().zip(&scaled.entries) {
            prop_assert_eq!(a.0, b.0);
            prop_assert!((b.1 - a.1 / mass).abs() <= 1e-12);
        }
    }

    /// For every rank, the per-topic groups partition the document set:
    /// strictly positive mixtures give each document exactly one topic at
    /// each rank.
    #[test]
    fn rank_groups_partition_documents(
        thetas in prop::collection::vec(mixture_strategy(4), 1..25),
        rank in 1usize..=3,
    ) {
        let mixtures = mixtures_from(&thetas);
        let refs: Vec<&DocTopicMixture> = mixtures.iter().collect();
        let mut seen = HashSet::new();
        for topic in 0..4u32 {
            for (doc_id, proportion) in
                documents_by_topic_rank(&refs, topic, rank, 3).unwrap()
            {
                prop_assert!(proportion > 0.0);
                prop_assert!(seen.insert(doc_id), "document listed under two topics");
            }
        }
        prop_assert_eq!(seen.len(), mixtures.len());
    }

    /// The 12-significant-digit export encoding parses back to exactly the
    /// value it rounds to, and rounding is idempotent.
    #[test]
    fn sig12_export_roundtrips(x in 0.0..1.0f64) {
        let rounded = round_sig12(x);
        let reparsed: f64 = format_sig12(x).parse().unwrap();
        prop_assert_eq!(reparsed, rounded);
        prop_assert_eq!(round_sig12(rounded), rounded);
        prop_assert!((x - rounded).abs() <= 5e-12 * x.max(1e-300));
    }
}

// --- sampler ---------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// On arbitrary small corpora the count tables balance after every
    /// sweep, the finished model passes its own validation, and the
    /// training-data log-likelihood is a finite negative number.
    #[test]
    fn sampler_keeps_its_books_on_random_corpora(
        docs in token_docs_strategy(),
        k in 1u32..4,
        seed in 0u64..1000,
    ) {
        let doc_ids: Vec<String> = (0..docs.len()).map(|d| format!("d{d}")).collect();
        let matrix = build_matrix(doc_ids, &docs).unwrap();
        let config = LdaConfig {
            num_topics: k,
            sweeps: 8,
            burn_in: 2,
            sample_lag: 2,
            seed,
            ..LdaConfig::default()
        };
        let lengths = matrix.doc_lengths.clone();
        let total = matrix.total_tokens();
        let mut balanced = true;
        let model = train_with_observer(&matrix, &config, |view| {
            for (d, &len) in lengths.iter().enumerate() {
                let sum: u32 = view.doc_topic_counts
                    [d * view.num_topics..(d + 1) * view.num_topics]
                    .iter()
                    .sum();
                balanced &= sum == len;
            }
            balanced &= view.topic_totals.iter().sum::<u64>() == total;
        })
        .unwrap();
        prop_assert!(balanced);
        model.validate().unwrap();
        let ll = log_likelihood(&model, &matrix).unwrap();
        prop_assert!(ll.is_finite() && ll <= 0.0, "log-likelihood {ll}");
    }
}

// --- inference -------------------------------------------------------------

/// One short training run shared across inference properties.
fn shared_model() -> &'static TrainedModel {
    static MODEL: OnceLock<TrainedModel> = OnceLock::new();
    MODEL.get_or_init(|| {
        let docs: Vec<Vec<String>> = vec![
            vec!["apple".into(), "apple".into(), "bank".into()],
            vec!["bank".into(), "bank".into(), "card".into()],
            vec!["card".into(), "card".into(), "apple".into()],
        ];
        let matrix =
            build_matrix(vec!["x".into(), "y".into(), "z".into()], &docs).unwrap();
        let config = LdaConfig {
            num_topics: 2,
            sweeps: 60,
            burn_in: 20,
            sample_lag: 2,
            seed: 9,
            ..LdaConfig::default()
        };
        train(&matrix, &config).unwrap()
    })
}

proptest! {
    /// Folding-in is deterministic under a fixed seed, produces a proper
    /// mixture, and counts unknown terms exactly.
    #[test]
    fn inference_is_deterministic_and_proper(
        terms in prop::collection::vec(
            prop::sample::select(vec!["apple", "bank", "card", "zebra", "qq"]),
            0..12,
        ),
        seed in 0u64..500,
    ) {
        let model = shared_model();
        let term_vec: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
        let options = InferOptions { sweeps: Some(80), seed: Some(seed) };
        let first = infer(model, "doc", &term_vec, &options).unwrap();
        let second = infer(model, "doc", &term_vec, &options).unwrap();
        prop_assert_eq!(&second, &first);

        let unknown = terms.iter().filter(|t| ["zebra", "qq"].contains(t)).count();
        prop_assert_eq!(first.unknown_terms, unknown);
        prop_assert_eq!(first.total_terms, terms.len());

        let sum: f64 = first.mixture.theta.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-9);
        let mut ranks = first.mixture.dominant_rank.clone();
        ranks.sort_unstable();
        prop_assert_eq!(ranks, vec![0, 1]);
    }

    /// Top-word lists are descending, properly bounded, and as long as the
    /// vocabulary allows.
    #[test]
    fn top_words_are_ranked_and_bounded(topic in 0u32..2, n in 1usize..9) {
        let model = shared_model();
        let words = model.top_words(topic, n).unwrap();
        prop_assert_eq!(words.len(), n.min(model.vocab_size()));
        for pair in words.windows(2) {
            prop_assert!(pair[0].1 >= pair[1].1);
        }
        for (term, probability) in &words {
            prop_assert!(model.vocabulary.id(term).is_some());
            prop_assert!(*probability > 0.0 && *probability <= 1.0);
        }
    }
}
