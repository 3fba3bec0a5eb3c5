//! Model persistence: versioned JSON, validated on load.
//!
//! Counts are integers and probabilities are printed in shortest
//! round-trip form, so save -> load -> save is byte-stable and a loaded
//! model behaves bit-identically to the one in memory.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::lda::{DocTopicMixture, LdaConfig, TrainedModel};

const MODEL_FORMAT: &str = "ntopics-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    format_version: u32,
    config: LdaConfig,
    vocabulary: Vec<String>,
    topic_term_counts: Vec<Vec<u32>>,
    topic_totals: Vec<u64>,
    beta_hat: Vec<Vec<f64>>,
    training_doc_mixtures: Vec<DocTopicMixture>,
    assignments: Vec<Vec<u32>>,
}

pub fn save_model<W: Write>(model: &TrainedModel, writer: W) -> Result<()> {
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        format_version: MODEL_VERSION,
        config: model.config.clone(),
        vocabulary: model.vocabulary.terms().to_vec(),
        topic_term_counts: model.topic_term_counts.clone(),
        topic_totals: model.topic_totals.clone(),
        beta_hat: model.beta_hat.clone(),
        training_doc_mixtures: model.training_doc_mixtures.clone(),
        assignments: model.assignments.clone(),
    };
    serde_json::to_writer(writer, &file).map_err(|e| Error::format("model JSON", e.to_string()))
}

pub fn load_model<R: Read>(reader: R) -> Result<TrainedModel> {
    let file: ModelFile = serde_json::from_reader(reader)
        .map_err(|e| Error::format("model JSON", e.to_string()))?;
    if file.format != MODEL_FORMAT {
        return Err(Error::format(
            "model JSON",
            format!("unexpected format tag {:?}", file.format),
        ));
    }
    if file.format_version != MODEL_VERSION {
        return Err(Error::format(
            "model JSON",
            format!("unsupported format version {}", file.format_version),
        ));
    }
    let model = TrainedModel {
        config: file.config,
        vocabulary: Vocabulary::from_sorted_unique(file.vocabulary)?,
        topic_term_counts: file.topic_term_counts,
        topic_totals: file.topic_totals,
        beta_hat: file.beta_hat,
        training_doc_mixtures: file.training_doc_mixtures,
        assignments: file.assignments,
    };
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_matrix;
    use crate::lda::{infer, train, InferOptions};

    fn trained() -> TrainedModel {
        let docs = vec![
            vec!["loan".to_string(), "car".into(), "loan".into()],
            vec!["fee".into(), "card".into(), "fee".into(), "late".into()],
            vec!["report".into(), "score".into()],
        ];
        let matrix = build_matrix(
            vec!["d0".into(), "d1".into(), "d2".into()],
            &docs,
        )
        .unwrap();
        let config = LdaConfig {
            num_topics: 2,
            sweeps: 40,
            burn_in: 20,
            sample_lag: 2,
            seed: 21,
            ..LdaConfig::default()
        };
        train(&matrix, &config).unwrap()
    }

    #[test]
    fn round_trip_compares_equal() {
        let model = trained();
        let mut buf = Vec::new();
        save_model(&model, &mut buf).unwrap();
        let loaded = load_model(buf.as_slice()).unwrap();
        assert_eq!(loaded, model);
    }

    #[test]
    fn save_is_byte_stable_across_a_round_trip() {
        let model = trained();
        let mut first = Vec::new();
        save_model(&model, &mut first).unwrap();
        let loaded = load_model(first.as_slice()).unwrap();
        let mut second = Vec::new();
        save_model(&loaded, &mut second).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn corrupted_totals_are_rejected_by_name() {
        let model = trained();
        let mut buf = Vec::new();
        save_model(&model, &mut buf).unwrap();
        let mut value: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let totals = value["topic_totals"].as_array_mut().unwrap();
        let bumped = totals[0].as_u64().unwrap() + 1;
        totals[0] = bumped.into();
        let tampered = serde_json::to_vec(&value).unwrap();
        let err = load_model(tampered.as_slice()).unwrap_err().to_string();
        assert!(err.contains("topic 0"), "{err}");
    }

    #[test]
    fn format_tag_and_version_are_enforced() {
        let model = trained();
        let mut buf = Vec::new();
        save_model(&model, &mut buf).unwrap();
        let mut value: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        value["format_version"] = 99.into();
        let err = load_model(serde_json::to_vec(&value).unwrap().as_slice())
            .unwrap_err()
            .to_string();
        assert!(err.contains("version"), "{err}");

        let mut value: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        value["format"] = "something-else".into();
        assert!(load_model(serde_json::to_vec(&value).unwrap().as_slice()).is_err());
    }

    #[test]
    fn loaded_model_infers_identically_to_the_original() {
        let model = trained();
        let mut buf = Vec::new();
        save_model(&model, &mut buf).unwrap();
        let loaded = load_model(buf.as_slice()).unwrap();
        let doc: Vec<String> = vec!["loan".into(), "fee".into()];
        let opts = InferOptions { sweeps: Some(400), seed: Some(5) };
        let from_fresh = infer(&model, "q", &doc, &opts).unwrap();
        let from_loaded = infer(&loaded, "q", &doc, &opts).unwrap();
        assert_eq!(from_fresh, from_loaded);
    }
}
