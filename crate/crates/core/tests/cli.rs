// Copyright 2026 The vrb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! End-to-end runs of the `vrb` binary on a small generated fixture.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn vrb(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vrb"))
        .current_dir(cwd)
        .args(args)
        .output()
        .expect("spawn vrb")
}

fn fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = vrb(
        dir.path(),
        &["--out", "fx", "synth", "--attractions", "60", "--prompts", "20", "--embedding-dim", "16"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

const INPUTS: [&str; 4] = ["--attractions", "fx/attractions.csv", "--prompts", "fx/prompts.json"];

#[test]
fn tfidf_only_bench_writes_every_config_and_leaves_gaps_empty() {
    let dir = fixture();
    let mut args = vec!["--out", "o", "bench"];
    args.extend(INPUTS);
    args.extend(["--arms", "tfidf"]);
    let out = vrb(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let results: Vec<_> = fs::read_dir(dir.path().join("o"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("tfidf_") && n.ends_with(".json"))
        .collect();
    assert_eq!(results.len(), 10, "{results:?}");

    let csv = fs::read_to_string(dir.path().join("o/summary.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 12);
    assert!(lines[0].ends_with("gap_pct"));
    for line in &lines[1..] {
        assert!(line.ends_with(",,,"), "{line}");
    }
    assert!(lines[11].starts_with("AVG,"));
}

#[test]
fn both_arms_fill_the_gap_column() {
    let dir = fixture();
    let mut args = vec!["--out", "o", "bench"];
    args.extend(INPUTS);
    args.extend([
        "--doc-embeddings",
        "fx/doc_embeddings.txt",
        "--query-embeddings",
        "fx/query_embeddings.txt",
        "--grid",
        "flat:l2,lsh:l2",
    ]);
    let out = vrb(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("o/summary.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let gap = line.rsplit(',').next().unwrap();
        assert!(gap.parse::<f64>().is_ok(), "{line}");
    }

    let report = vrb(dir.path(), &["--out", "r", "report", "--bench-dir", "o"]);
    assert!(report.status.success(), "{}", String::from_utf8_lossy(&report.stderr));
    assert_eq!(
        fs::read_to_string(dir.path().join("r/arms.csv")).unwrap(),
        csv,
    );
}

#[test]
fn missing_input_is_a_startup_error() {
    let dir = fixture();
    let out = vrb(
        dir.path(),
        &["--out", "o", "bench", "--attractions", "fx/attractions.csv", "--prompts", "nope.json"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.json"));
    assert!(!dir.path().join("o/summary.csv").exists());
}

#[test]
fn a_failing_config_is_recorded_and_exits_one() {
    let dir = fixture();
    fs::write(
        dir.path().join("bench.toml"),
        r#"
attractions = "fx/attractions.csv"
prompts = "fx/prompts.json"
arms = ["tfidf"]
[[grid]]
family = "flat"
metric = "l2"
[[grid]]
family = "ivfflat"
metric = "l2"
[grid.params.ivf]
nlist = 1000
"#,
    )
    .unwrap();
    let out = vrb(dir.path(), &["--config", "bench.toml", "--out", "o", "bench"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(dir.path().join("o/tfidf_flat_l2.json").exists());
    assert!(!dir.path().join("o/tfidf_ivfflat_l2.json").exists());
    let saved: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("o/reports.json")).unwrap()).unwrap();
    assert_eq!(saved["reports"].as_array().unwrap().len(), 1);
    assert_eq!(saved["failures"].as_array().unwrap().len(), 1);
}

#[test]
fn score_ranks_rag_rows_against_their_baseline() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("components.csv"),
        "model,group,fluency,accuracy,relevance\n\
         base-7b,Fine-tuning,0.80,0.40,0.50\n\
         ,RAG,0.90,0.70,0.60\n\
         other,RAG,0.5,0.5,1.5\n",
    )
    .unwrap();
    let out = vrb(dir.path(), &["--out", "scores.csv", "score", "--components", "components.csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped"));

    let mut reader = csv::Reader::from_path(dir.path().join("scores.csv")).unwrap();
    let header = reader.headers().unwrap().clone();
    let overall = header.iter().position(|h| h == "overall").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    let expect = |f: f64, a: f64, r: f64| 0.3 * f + 0.2 * (a + 1.0).log2() + 0.4 * r.exp();
    let base: f64 = rows[0][overall].parse().unwrap();
    let rag: f64 = rows[1][overall].parse().unwrap();
    assert!((base - expect(0.8, 0.4, 0.5)).abs() < 1e-4);
    assert!((rag - expect(0.9, 0.7, 0.6)).abs() < 1e-4);
    assert!(rag > base);
}

#[test]
fn bad_weights_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.csv"), "model,group,fluency,accuracy,relevance\nm,RAG,1,1,1\n").unwrap();
    let out = vrb(dir.path(), &["score", "--components", "c.csv", "--weights", "0.3", "0", "0.4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn index_round_trip_through_the_cli() {
    let dir = fixture();
    let build = vrb(
        dir.path(),
        &["--out", "idx.bin", "build-index", "--attractions", "fx/attractions.csv", "--family", "flat"],
    );
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let query = vrb(
        dir.path(),
        &["--k", "3", "query", "--index", "idx.bin", "--attractions", "fx/attractions.csv", "--text", "古寺"],
    );
    assert!(query.status.success(), "{}", String::from_utf8_lossy(&query.stderr));
    assert!(!query.stdout.is_empty());
}
