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

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use vrb::bench::{run_bench, Arm, BenchConfig};
use vrb::corpus::{load_attractions, load_knowledge, load_prompts, load_stopwords, Attraction, KnowledgeStore};
use vrb::evalkit::{
    assess_all_queries, assess_with_features, load_components, load_results, score_table, CompositeWeights, EvalReport,
    TableOne,
};
use vrb::index::{load_index, save_index, IndexParams, ScoreOrder};
use vrb::ragflow::{
    answer, extract_into_store, GenParams, HttpClient, HttpClientConfig, LlmClient, RagOptions, Retriever, StubClient,
    DEFAULT_IN_FLIGHT,
};
use vrb::synthetic::{generate, write_fixture, SyntheticConfig};
use vrb::vectorize::{load_embeddings, LogBase, TfIdfModel, TfIdfOptions, Vector};
use vrb::{Family, IndexSpec, Metric, TokenizerMode, TokenizerSpec, VectorIndex};

/// Exit code for unreadable inputs or invalid configuration.
const EXIT_STARTUP: u8 = 2;
/// Exit code when some sweep configurations failed.
const EXIT_PARTIAL: u8 = 1;

#[derive(Parser)]
#[command(name = "vrb", version, about = "Vector retrieval benchmark and RAG prompt tooling")]
struct Cli {
    /// TOML file with bench settings; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Results per query.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Parallel sweep configurations (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Vectorize the corpus and save one index.
    BuildIndex(BuildIndexArgs),
    /// Search a saved index.
    Query(QueryArgs),
    /// Run the full sweep: every arm and index configuration.
    Bench(BenchArgs),
    /// Count keyword hits in a results file.
    EvalHits(EvalHitsArgs),
    /// Composite scores from a fluency/accuracy/relevance CSV.
    Score(ScoreArgs),
    /// Arm comparison and score tables from earlier outputs.
    Report(ReportArgs),
    /// Fill the knowledge store with history and geography per attraction.
    ExtractKnowledge(ExtractArgs),
    /// Retrieve and generate an answer for one query.
    Answer(AnswerArgs),
    /// Write a seeded synthetic corpus, prompt set, knowledge store and embeddings.
    Synth(SynthArgs),
}

#[derive(Args, Clone)]
struct TextArgs {
    #[arg(long, default_value = "unicode_mixed")]
    tokenizer: TokenizerMode,
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

impl TextArgs {
    fn spec(&self) -> Result<TokenizerSpec> {
        let mut spec = TokenizerSpec::new(self.tokenizer);
        if let Some(p) = &self.stopwords {
            spec = spec.with_stopwords(load_stopwords(p)?);
        }
        Ok(spec)
    }
}

#[derive(Args)]
struct IndexChoice {
    #[arg(long, default_value = "hnsw")]
    family: Family,
    #[arg(long, default_value = "l2")]
    metric: Metric,
    /// JSON object of family parameters, e.g. '{"hnsw":{"ef_search":128}}'.
    #[arg(long)]
    params: Option<String>,
}

impl IndexChoice {
    fn spec(&self, seed: u64) -> Result<IndexSpec> {
        let params: IndexParams = match &self.params {
            Some(p) => serde_json::from_str(p).context("parsing --params")?,
            None => IndexParams::default(),
        };
        Ok(IndexSpec::new(self.family, self.metric).with_params(params).with_seed(seed))
    }
}

#[derive(Args)]
struct BuildIndexArgs {
    #[arg(long)]
    attractions: PathBuf,
    #[arg(long, default_value = "tfidf")]
    arm: Arm,
    #[arg(long)]
    doc_embeddings: Option<PathBuf>,
    #[command(flatten)]
    index: IndexChoice,
    #[command(flatten)]
    text: TextArgs,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    attractions: PathBuf,
    /// Query text, encoded with TF-IDF fitted on the corpus.
    #[arg(long, conflicts_with = "prompt_id")]
    text: Option<String>,
    /// Row of `--query-embeddings` to search with.
    #[arg(long, requires = "query_embeddings")]
    prompt_id: Option<usize>,
    #[arg(long)]
    doc_embeddings: Option<PathBuf>,
    #[arg(long)]
    query_embeddings: Option<PathBuf>,
    #[command(flatten)]
    text_args: TextArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    attractions: Option<PathBuf>,
    #[arg(long)]
    prompts: Option<PathBuf>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    doc_embeddings: Option<PathBuf>,
    #[arg(long)]
    query_embeddings: Option<PathBuf>,
    #[arg(long)]
    tokenizer: Option<TokenizerMode>,
    #[arg(long)]
    lowercase: Option<bool>,
    #[arg(long, value_parser = parse_log_base)]
    log_base: Option<LogBase>,
    #[arg(long)]
    normalize: Option<bool>,
    /// Comma-separated subset of tfidf,embedding.
    #[arg(long, value_delimiter = ',')]
    arms: Option<Vec<Arm>>,
    /// Comma-separated family:metric pairs, e.g. flat:l2,hnsw:ip.
    #[arg(long, value_delimiter = ',', value_parser = parse_grid_entry)]
    grid: Option<Vec<IndexSpec>>,
    #[arg(long)]
    use_declared_features: Option<bool>,
}

#[derive(Args)]
struct EvalHitsArgs {
    #[arg(long)]
    results: PathBuf,
    /// Score prompts against their declared features.
    #[arg(long)]
    prompts: Option<PathBuf>,
    #[command(flatten)]
    text: TextArgs,
}

#[derive(Args)]
struct ScoreArgs {
    /// CSV with columns model,group,fluency,accuracy,relevance.
    #[arg(long)]
    components: PathBuf,
    #[arg(long, num_args = 3, value_names = ["D1", "D2", "D3"])]
    weights: Option<Vec<f64>>,
}

#[derive(Args)]
struct ReportArgs {
    /// A bench output directory (reads reports.json).
    #[arg(long)]
    bench_dir: Option<PathBuf>,
    #[arg(long)]
    components: Option<PathBuf>,
}

#[derive(Args)]
struct LlmArgs {
    /// Chat-completions base URL; without it an offline stub is used.
    #[arg(long)]
    llm_base_url: Option<String>,
    #[arg(long, default_value = "default")]
    llm_model: String,
    #[arg(long, default_value_t = 60)]
    llm_timeout_secs: u64,
}

impl LlmArgs {
    fn client(&self) -> Result<Option<HttpClient>> {
        self.llm_base_url
            .as_ref()
            .map(|url| {
                HttpClient::from_env(HttpClientConfig {
                    base_url: url.clone(),
                    model: self.llm_model.clone(),
                    timeout_secs: self.llm_timeout_secs,
                })
                .map_err(anyhow::Error::from)
            })
            .transpose()
    }
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    attractions: PathBuf,
    #[arg(long, default_value_t = DEFAULT_IN_FLIGHT)]
    in_flight: usize,
    /// Use the rule-based extractor for attractions the LLM fails on.
    #[arg(long)]
    fallback_on_error: bool,
    #[command(flatten)]
    llm: LlmArgs,
}

#[derive(Args)]
struct AnswerArgs {
    #[arg(long)]
    attractions: PathBuf,
    #[arg(long)]
    knowledge: PathBuf,
    #[arg(long)]
    text: String,
    #[command(flatten)]
    index: IndexChoice,
    #[command(flatten)]
    text_args: TextArgs,
    #[command(flatten)]
    llm: LlmArgs,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 563)]
    attractions: usize,
    #[arg(long, default_value_t = 180)]
    prompts: usize,
    #[arg(long, default_value_t = 64)]
    embedding_dim: usize,
}

fn parse_log_base(s: &str) -> Result<LogBase, String> {
    match s {
        "e" | "natural" => Ok(LogBase::Natural),
        "2" | "two" => Ok(LogBase::Two),
        "10" | "ten" => Ok(LogBase::Ten),
        other => Err(format!("unknown log base {other:?}")),
    }
}

fn parse_grid_entry(s: &str) -> Result<IndexSpec, String> {
    let (family, metric) = s.split_once(':').unwrap_or((s, "l2"));
    Ok(IndexSpec::new(family.parse()?, metric.parse()?))
}

fn out_path(cli: &Cli, default: &str) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn tfidf_for(corpus: &[Attraction], tokenizer: TokenizerSpec) -> Result<TfIdfModel> {
    let texts: Vec<String> = corpus.iter().map(Attraction::document_text).collect();
    Ok(TfIdfModel::fit(&texts, tokenizer, TfIdfOptions::default())?)
}

fn build_index(cli: &Cli, a: &BuildIndexArgs) -> Result<ExitCode> {
    let corpus = load_attractions(&a.attractions)?;
    let vectors: Vec<Vector> = match a.arm {
        Arm::Tfidf => {
            let model = tfidf_for(&corpus, a.text.spec()?)?;
            corpus
                .iter()
                .map(|x| Vector::Sparse(model.transform(&x.document_text())))
                .collect()
        }
        Arm::Embedding => {
            let path = a.doc_embeddings.as_ref().context("--doc-embeddings is required for the embedding arm")?;
            let table = load_embeddings(path, path)?;
            table.doc_vectors.into_iter().map(Vector::Dense).collect()
        }
    };
    let spec = a.index.spec(cli.seed.unwrap_or(0))?;
    let index = VectorIndex::build(&spec, &vectors)?;
    let out = out_path(cli, "index.vrb");
    save_index(&index, &out)?;
    println!("{} over {} vectors ({}-d) -> {}", spec.label(), index.len(), index.dim(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn query(cli: &Cli, a: &QueryArgs) -> Result<ExitCode> {
    let index = load_index(&a.index)?;
    let corpus = load_attractions(&a.attractions)?;
    let q = match (&a.text, a.prompt_id) {
        (Some(text), _) => Vector::Sparse(tfidf_for(&corpus, a.text_args.spec()?)?.transform(text)),
        (None, Some(id)) => {
            let path = a.query_embeddings.as_ref().expect("clap enforces --query-embeddings");
            let docs = a.doc_embeddings.as_ref().unwrap_or(path);
            let table = load_embeddings(docs, path)?;
            Vector::Dense(table.query(id).cloned().with_context(|| format!("no query embedding {id}"))?)
        }
        (None, None) => bail!("give --text or --prompt-id"),
    };
    let hits = index.search(&q, cli.k.unwrap_or(3))?;
    let label = match (hits.order, index.spec().metric) {
        (ScoreOrder::Ascending, _) if index.spec().family == Family::Lsh => "hamming",
        (_, Metric::L2) => "l2_squared",
        (_, Metric::L1) => "l1",
        (_, Metric::Ip) => "inner_product",
    };
    for (rank, (&id, score)) in hits.ids.iter().zip(&hits.scores).enumerate() {
        let name = corpus.get(id).map_or("?", |x| x.name.as_str());
        println!("{}\t{id}\t{name}\t{label}={score}", rank + 1);
    }
    Ok(ExitCode::SUCCESS)
}

fn bench_config(cli: &Cli, a: &BenchArgs) -> Result<BenchConfig> {
    let mut c = match &cli.config {
        Some(path) => {
            let mut c = BenchConfig::load(path)?;
            c.rebase(path.parent().unwrap_or(Path::new(".")));
            c
        }
        None => BenchConfig::default(),
    };
    macro_rules! set {
        ($($field:ident = $value:expr),* $(,)?) => {
            $(if let Some(v) = $value { c.$field = v; })*
        };
    }
    set!(
        attractions = a.attractions.clone(),
        prompts = a.prompts.clone(),
        tokenizer = a.tokenizer,
        lowercase = a.lowercase,
        arms = a.arms.clone(),
        grid = a.grid.clone(),
        use_declared_features = a.use_declared_features,
        k = cli.k,
        seed = cli.seed,
        out_dir = cli.out.clone(),
    );
    if a.stopwords.is_some() {
        c.stopwords = a.stopwords.clone();
    }
    if a.doc_embeddings.is_some() {
        c.doc_embeddings = a.doc_embeddings.clone();
    }
    if a.query_embeddings.is_some() {
        c.query_embeddings = a.query_embeddings.clone();
    }
    if let Some(b) = a.log_base {
        c.tfidf.log_base = b;
    }
    if let Some(n) = a.normalize {
        c.tfidf.normalize = n;
    }
    if cli.jobs.is_some() {
        c.jobs = cli.jobs;
    }
    Ok(c)
}

fn bench(cli: &Cli, a: &BenchArgs) -> Result<ExitCode> {
    let config = bench_config(cli, a)?;
    let outcome = run_bench(&config)?;
    if let Some(table) = &outcome.table {
        print!("{}", table.to_text());
    }
    for f in &outcome.failures {
        eprintln!("failed: {}: {}", f.config_name, f.error);
    }
    Ok(if outcome.is_complete() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_PARTIAL)
    })
}

fn eval_hits(cli: &Cli, a: &EvalHitsArgs) -> Result<ExitCode> {
    let results = load_results(&a.results)?;
    let tokenizer = a.text.spec()?;
    let name = a.results.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let report = match &a.prompts {
        Some(p) => assess_with_features(&name, &results, &tokenizer, &load_prompts(p)?.feature_map()),
        None => assess_all_queries(&name, &results, &tokenizer),
    };
    println!(
        "{}: avg hit count {:.4}, avg hit rate {:.4}%",
        report.config_name,
        report.avg_hit_count,
        report.avg_hit_rate * 100.0
    );
    if let Some(out) = &cli.out {
        fs::write(out, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn weights(w: &Option<Vec<f64>>) -> Result<CompositeWeights> {
    Ok(match w.as_deref() {
        Some(&[d1, d2, d3]) => CompositeWeights::new(d1, d2, d3)?,
        _ => CompositeWeights::default(),
    })
}

fn score(cli: &Cli, a: &ScoreArgs) -> Result<ExitCode> {
    let table = score_table(&load_components(&a.components)?, &weights(&a.weights)?);
    for (line, reason) in &table.skipped {
        eprintln!("warning: row {} skipped: {reason}", line + 1);
    }
    print!("{}", table.to_text());
    if let Some(out) = &cli.out {
        fs::write(out, table.to_csv())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn report(cli: &Cli, a: &ReportArgs) -> Result<ExitCode> {
    if a.bench_dir.is_none() && a.components.is_none() {
        bail!("give --bench-dir and/or --components");
    }
    let out = cli.out.clone();
    if let Some(out) = &out {
        fs::create_dir_all(out)?;
    }
    if let Some(dir) = &a.bench_dir {
        #[derive(serde::Deserialize)]
        struct Saved {
            reports: Vec<EvalReport>,
        }
        let path = dir.join("reports.json");
        let saved: Saved = serde_json::from_str(
            &fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?,
        )?;
        // Pair arms by the config name after the arm prefix, first-seen order.
        let mut rows: Vec<(String, Option<&EvalReport>, Option<&EvalReport>)> = Vec::new();
        for r in &saved.reports {
            let Some((arm, rest)) = r.config_name.split_once('_') else {
                continue;
            };
            let label = match rest.split_once('_') {
                Some((f, m)) => match (f.parse::<Family>(), m.parse::<Metric>()) {
                    (Ok(f), Ok(m)) => IndexSpec::new(f, m).label(),
                    _ => rest.to_string(),
                },
                None => rest.to_string(),
            };
            let pos = match rows.iter().position(|row| row.0 == label) {
                Some(p) => p,
                None => {
                    rows.push((label, None, None));
                    rows.len() - 1
                }
            };
            match arm.parse::<Arm>() {
                Ok(Arm::Tfidf) => rows[pos].1 = Some(r),
                Ok(Arm::Embedding) => rows[pos].2 = Some(r),
                Err(_) => {}
            }
        }
        let table = TableOne::from_reports(&rows);
        print!("{}", table.to_text());
        if let Some(out) = &out {
            fs::write(out.join("arms.csv"), table.to_csv())?;
            fs::write(out.join("arms.txt"), table.to_text())?;
        }
    }
    if let Some(path) = &a.components {
        let table = score_table(&load_components(path)?, &CompositeWeights::default());
        println!();
        print!("{}", table.to_text());
        if let Some(out) = &out {
            fs::write(out.join("scores.csv"), table.to_csv())?;
            fs::write(out.join("scores.txt"), table.to_text())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn extract(cli: &Cli, a: &ExtractArgs) -> Result<ExitCode> {
    let corpus = load_attractions(&a.attractions)?;
    let http = a.llm.client()?;
    let client = http.as_ref().map(|c| c as &dyn LlmClient);
    let mut store = KnowledgeStore::new();
    let failures = extract_into_store(&mut store, &corpus, client, a.in_flight, a.fallback_on_error);
    let out = out_path(cli, "knowledge.json");
    store.save(&out)?;
    println!("{} entries -> {}", store.len(), out.display());
    for f in &failures {
        eprintln!("failed: {f}");
    }
    Ok(if failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_PARTIAL)
    })
}

fn answer_cmd(cli: &Cli, a: &AnswerArgs) -> Result<ExitCode> {
    let corpus = load_attractions(&a.attractions)?;
    let store = load_knowledge(&a.knowledge, corpus.len())?;
    let tokenizer = a.text_args.spec()?;
    let model = tfidf_for(&corpus, tokenizer.clone())?;
    let vectors: Vec<Vector> = corpus
        .iter()
        .map(|x| Vector::Sparse(model.transform(&x.document_text())))
        .collect();
    let index = VectorIndex::build(&a.index.spec(cli.seed.unwrap_or(0))?, &vectors)?;
    let retriever = Retriever::new(Box::new(model), index)?;
    let http = a.llm.client()?;
    let stub = StubClient::echo();
    let client: &dyn LlmClient = match &http {
        Some(c) => c,
        None => &stub,
    };
    let options = RagOptions {
        k: cli.k.unwrap_or(3),
        params: GenParams::default(),
        tokenizer,
    };
    let result = answer(&a.text, &retriever, &store, client, &options)?;
    let json = serde_json::to_string_pretty(&result)?;
    match &cli.out {
        Some(out) => fs::write(out, json)?,
        None => println!("{json}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn synth(cli: &Cli, a: &SynthArgs) -> Result<ExitCode> {
    let seed = cli.seed.unwrap_or(7);
    let data = generate(&SyntheticConfig {
        n_attractions: a.attractions,
        n_prompts: a.prompts,
        seed,
    });
    let out = out_path(cli, "synthetic");
    write_fixture(&out, &data, &TokenizerSpec::default(), a.embedding_dim, seed)?;
    println!(
        "{} attractions, {} prompts -> {}",
        data.attractions.len(),
        data.prompts.len(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::BuildIndex(a) => build_index(cli, a),
        Command::Query(a) => query(cli, a),
        Command::Bench(a) => bench(cli, a),
        Command::EvalHits(a) => eval_hits(cli, a),
        Command::Score(a) => score(cli, a),
        Command::Report(a) => report(cli, a),
        Command::ExtractKnowledge(a) => extract(cli, a),
        Command::Answer(a) => answer_cmd(cli, a),
        Command::Synth(a) => synth(cli, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            // Skip causes already spelled out by the message above them.
            let mut message = e.to_string();
            for cause in e.chain().skip(1) {
                let text = cause.to_string();
                if !message.contains(&text) {
                    message = format!("{message}: {text}");
                }
            }
            eprintln!("error: {message}");
            ExitCode::from(EXIT_STARTUP)
        }
    }
}
