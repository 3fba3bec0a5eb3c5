//! Shared fixtures for the integration suites: a synthetic complaints CSV
//! with known structure and a short-chain pipeline config pointing at it.

#![allow(dead_code)] // each test target uses a different subset

use std::fs;
use std::path::{Path, PathBuf};

use ntopics::ingest::ColumnMap;
use ntopics::lda::LdaConfig;
use ntopics::pipeline::{InputConfig, PipelineConfig};

/// Synthetic complaint CSV with three skewed vocabularies spread over four
/// months of 2016, with empty and duplicate narratives mixed in so the
/// selection stage has something to reject.
pub fn fixture_csv(rows: usize) -> String {
    let mut csv = String::from(
        "Complaint ID,Date received,Product,Issue,Company,State,Consumer complaint narrative\n",
    );
    let themes = [
        "payment late fee charged monthly balance",
        "collection agency calling threatening daily",
        "report shows wrong account identity stolen",
    ];
    for i in 0..rows {
        let theme = themes[i % 3];
        let month = i % 4 + 1;
        let company = if i % 2 == 0 { "Acme Bank" } else { "Bravo Card" };
        let narrative = if i % 11 == 7 {
            String::new()
        } else if i % 13 == 9 {
            themes[0].to_string()
        } else {
            format!("{theme} case number {i} XXXX")
        };
        csv.push_str(&format!(
            "c{i},0{month}/15/2016,Product,Issue {},{company},TX,\"{narrative}\"\n",
            i % 3,
        ));
    }
    csv
}

pub fn write_fixture_csv(dir: &Path, rows: usize) -> PathBuf {
    let path = dir.join("complaints.csv");
    fs::write(&path, fixture_csv(rows)).unwrap();
    path
}

/// Pipeline config over the fixture CSV: 3 topics, a short chain, fixed seed.
pub fn fixture_config(dir: &Path, rows: usize) -> PipelineConfig {
    PipelineConfig {
        output_dir: dir.join("out"),
        input: InputConfig {
            csv: write_fixture_csv(dir, rows),
            columns: ColumnMap::default(),
        },
        model: LdaConfig {
            num_topics: 3,
            sweeps: 40,
            burn_in: 20,
            sample_lag: 2,
            seed: 17,
            ..LdaConfig::default()
        },
        ..PipelineConfig::default()
    }
}

/// Writes `config` as a TOML file the CLI consumes via `--config`.
pub fn write_config_toml(dir: &Path, config: &PipelineConfig) -> PathBuf {
    let path = dir.join("ntopics.toml");
    fs::write(&path, toml::to_string_pretty(config).unwrap()).unwrap();
    path
}

pub fn read_bytes(path: &Path) -> Vec<u8> {
    fs::read(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}
