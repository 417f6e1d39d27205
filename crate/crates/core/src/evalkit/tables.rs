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

//! Tabulation of hit statistics and composite scores.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{composite_score, hit_rate, percentize, relative_gap, ComponentScores, CompositeWeights, EvalError, EvalReport, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmStats {
    pub avg_hit_count: f64,
    pub avg_hit_rate: f64,
}

impl ArmStats {
    pub fn from_avg(avg_hit_count: f64) -> Self {
        Self {
            avg_hit_count,
            avg_hit_rate: hit_rate(avg_hit_count),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableOneRow {
    pub label: String,
    pub tfidf: Option<ArmStats>,
    pub embedding: Option<ArmStats>,
    /// `(tfidf - embedding) / embedding`, as a fraction.
    pub gap: Option<f64>,
}

impl TableOneRow {
    fn new(label: String, tfidf: Option<f64>, embedding: Option<f64>) -> Self {
        let gap = match (tfidf, embedding) {
            (Some(a), Some(b)) => relative_gap(a, b).ok(),
            _ => None,
        };
        Self {
            label,
            tfidf: tfidf.map(ArmStats::from_avg),
            embedding: embedding.map(ArmStats::from_avg),
            gap,
        }
    }
}

/// Per-configuration comparison of the two vectorization arms plus an
/// average row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableOne {
    pub rows: Vec<TableOneRow>,
    pub average: TableOneRow,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl TableOne {
    /// Rows from raw averages; the average row is the plain mean of each arm.
    pub fn from_averages(rows: &[(String, Option<f64>, Option<f64>)]) -> Self {
        let average = TableOneRow::new(
            "AVG".into(),
            mean(rows.iter().filter_map(|r| r.1)),
            mean(rows.iter().filter_map(|r| r.2)),
        );
        Self {
            rows: rows
                .iter()
                .map(|(l, a, b)| TableOneRow::new(l.clone(), *a, *b))
                .collect(),
            average,
        }
    }

    /// Rows from evaluation reports; the average row pools hit totals over
    /// all results of an arm.
    pub fn from_reports(rows: &[(String, Option<&EvalReport>, Option<&EvalReport>)]) -> Self {
        let pooled = |arm: usize| {
            let (hits, n) = rows
                .iter()
                .filter_map(|r| if arm == 0 { r.1 } else { r.2 })
                .fold((0usize, 0usize), |(h, n), r| (h + r.total_hits, n + r.total_results));
            (n > 0).then(|| hits as f64 / n as f64)
        };
        let average = TableOneRow::new("AVG".into(), pooled(0), pooled(1));
        Self {
            rows: rows
                .iter()
                .map(|(l, a, b)| TableOneRow::new(l.clone(), a.map(|r| r.avg_hit_count), b.map(|r| r.avg_hit_count)))
                .collect(),
            average,
        }
    }

    fn all_rows(&self) -> impl Iterator<Item = &TableOneRow> {
        self.rows.iter().chain(std::iter::once(&self.average))
    }

    fn cells(row: &TableOneRow, missing: &str) -> [String; 6] {
        let f4 = |v: Option<f64>| v.map_or(missing.to_string(), |v| format!("{v:.4}"));
        [
            row.label.clone(),
            f4(row.tfidf.map(|s| s.avg_hit_count)),
            f4(row.tfidf.map(|s| s.avg_hit_rate * 100.0)),
            f4(row.embedding.map(|s| s.avg_hit_count)),
            f4(row.embedding.map(|s| s.avg_hit_rate * 100.0)),
            f4(row.gap.map(|g| g * 100.0)),
        ]
    }

    const HEADER: [&'static str; 6] = [
        "config",
        "tfidf_avg_hits",
        "tfidf_hit_rate_pct",
        "embedding_avg_hits",
        "embedding_hit_rate_pct",
        "gap_pct",
    ];

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(Self::HEADER).expect("in-memory write");
        for row in self.all_rows() {
            w.write_record(Self::cells(row, "")).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn to_text(&self) -> String {
        let body: Vec<[String; 6]> = self.all_rows().map(|r| Self::cells(r, "-")).collect();
        render_aligned(&Self::HEADER, &body)
    }
}

fn render_aligned<const N: usize>(header: &[&str; N], body: &[[String; N]]) -> String {
    let mut widths = header.map(|h| h.chars().count());
    for row in body {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| {
                if i == 0 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(header.to_vec());
    for row in body {
        line(row.iter().map(String::as_str).collect());
    }
    out
}

/// One line of a component-score file. A blank model repeats the model of
/// the previous line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRow {
    pub model: String,
    pub group: String,
    pub fluency: f64,
    pub accuracy: f64,
    pub relevance: f64,
}

pub fn parse_components(text: &str) -> Result<Vec<ComponentRow>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows: Vec<ComponentRow> = Vec::new();
    for record in reader.deserialize::<ComponentRow>() {
        let mut row = record.map_err(|e| EvalError::Components(e.to_string()))?;
        if row.model.is_empty() {
            row.model = rows
                .last()
                .map(|r| r.model.clone())
                .ok_or_else(|| EvalError::Components("first row has no model".into()))?;
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn load_components(path: impl AsRef<Path>) -> Result<Vec<ComponentRow>> {
    parse_components(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRow {
    pub model: String,
    pub group: String,
    pub scores: ComponentScores,
    pub overall: f64,
    /// `overall / full score`, as a fraction.
    pub overall_pct: f64,
    /// Relative improvement over the model's baseline row; set on `RAG` rows.
    pub improvement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableTwo {
    pub rows: Vec<ScoredRow>,
    /// Input line index and reason for rows that could not be scored.
    pub skipped: Vec<(usize, String)>,
}

fn is_rag(group: &str) -> bool {
    group.eq_ignore_ascii_case("rag")
}

/// Scores every row. A row whose group is `RAG` gets its improvement over
/// the first non-RAG row of the same model.
pub fn score_table(rows: &[ComponentRow], weights: &CompositeWeights) -> TableTwo {
    let mut scored = Vec::new();
    let mut skipped = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let s = ComponentScores {
            fluency: r.fluency,
            accuracy: r.accuracy,
            relevance: r.relevance,
        };
        match composite_score(&s, weights) {
            Ok(overall) => scored.push(ScoredRow {
                model: r.model.clone(),
                group: r.group.clone(),
                scores: s,
                overall,
                overall_pct: percentize(overall, weights),
                improvement: None,
            }),
            Err(e) => skipped.push((i, e.to_string())),
        }
    }
    for i in 0..scored.len() {
        if !is_rag(&scored[i].group) {
            continue;
        }
        let base = scored
            .iter()
            .find(|b| b.model == scored[i].model && !is_rag(&b.group))
            .map(|b| b.overall);
        scored[i].improvement = base.and_then(|b| relative_gap(scored[i].overall, b).ok());
    }
    TableTwo { rows: scored, skipped }
}

impl TableTwo {
    const HEADER: [&'static str; 8] = [
        "model",
        "group",
        "fluency",
        "accuracy",
        "relevance",
        "overall",
        "overall_pct",
        "improvement",
    ];

    fn cells(row: &ScoredRow, missing: &str) -> [String; 8] {
        [
            row.model.clone(),
            row.group.clone(),
            format!("{:.4}", row.scores.fluency),
            format!("{:.4}", row.scores.accuracy),
            format!("{:.4}", row.scores.relevance),
            format!("{:.4}", row.overall),
            format!("{:.2}", row.overall_pct * 100.0),
            row.improvement.map_or(missing.to_string(), |v| format!("{v:.4}")),
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(Self::HEADER).expect("in-memory write");
        for row in &self.rows {
            w.write_record(Self::cells(row, "")).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn to_text(&self) -> String {
        let body: Vec<[String; 8]> = self.rows.iter().map(|r| Self::cells(r, "-")).collect();
        render_aligned(&Self::HEADER, &body)
    }
}
