//! Benchmark harness: run a prompt suite through a generator, score each
//! prompt with the critic, and aggregate by difficulty.

pub mod suite;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::adapter::AdapterConfig;
use crate::agent::{
    run_graph_with, run_single_pass, select_best, AgentConfig, DesignState, EvaluationMode, GeneratorKind,
    RetrievalStore, RunOptions, Terminal,
};
use crate::par::{self, Execution};
use crate::rng::hash_str;

pub use suite::{generate_suite, BenchPrompt, BenchmarkSuite, Difficulty, SuiteError, PROMPT_PREFIX};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Runner {
    /// Builtin generator, one pass.
    Builtin,
    /// The full design loop with the configured generator.
    Agent,
    /// Remote generator, one pass.
    Remote,
}

impl Runner {
    pub const ALL: [Runner; 3] = [Runner::Builtin, Runner::Agent, Runner::Remote];

    pub fn name(self) -> &'static str {
        match self {
            Runner::Builtin => "builtin",
            Runner::Agent => "agent",
            Runner::Remote => "remote",
        }
    }

    pub fn from_name(s: &str) -> Option<Runner> {
        Runner::ALL.into_iter().find(|r| r.name() == s)
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchOptions {
    pub adapter: AdapterConfig,
    /// Per-prompt artifacts go to `<out_dir>/bench_<id>/<prompt_id>/`.
    pub out_dir: Option<PathBuf>,
    /// Defaults to the suite name.
    pub bench_id: Option<String>,
    pub exec: Execution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub id: String,
    pub difficulty: Difficulty,
    /// Whether the selected program parsed and compiled.
    pub executed: bool,
    pub score: f64,
    pub validity: f64,
    pub intent_match: f64,
    /// History entries produced for this prompt.
    pub iterations: usize,
    pub selected_iteration: Option<usize>,
    pub mode: EvaluationMode,
    pub terminal: Terminal,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyStats {
    pub count: usize,
    pub execution_rate: f64,
    pub mean_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub count: usize,
    pub execution_rate: f64,
    pub mean_score: f64,
    pub by_difficulty: BTreeMap<Difficulty, DifficultyStats>,
    /// Number of prompts that used a given count of history entries.
    pub iteration_histogram: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub suite: String,
    pub runner: Runner,
    pub rows: Vec<BenchRow>,
    pub aggregates: Aggregates,
}

fn mean(xs: impl Iterator<Item = f64>) -> (usize, f64) {
    let (n, s) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n, if n == 0 { 0.0 } else { s / n as f64 })
}

/// Recomputes every aggregate from the rows.
pub fn aggregate(rows: &[BenchRow]) -> Aggregates {
    let rate = |rs: &[&BenchRow]| mean(rs.iter().map(|r| if r.executed { 1.0 } else { 0.0 })).1;
    let all: Vec<&BenchRow> = rows.iter().collect();
    let mut by_difficulty = BTreeMap::new();
    for d in Difficulty::ALL {
        let rs: Vec<&BenchRow> = rows.iter().filter(|r| r.difficulty == d).collect();
        if rs.is_empty() {
            continue;
        }
        by_difficulty.insert(
            d,
            DifficultyStats {
                count: rs.len(),
                execution_rate: rate(&rs),
                mean_score: mean(rs.iter().map(|r| r.score)).1,
            },
        );
    }
    let mut iteration_histogram = BTreeMap::new();
    for r in rows {
        *iteration_histogram.entry(r.iterations).or_insert(0) += 1;
    }
    Aggregates {
        count: rows.len(),
        execution_rate: rate(&all),
        mean_score: mean(rows.iter().map(|r| r.score)).1,
        by_difficulty,
        iteration_histogram,
    }
}

fn row_from_state(p: &BenchPrompt, state: &DesignState, mode: EvaluationMode) -> BenchRow {
    let best = select_best(state, mode);
    BenchRow {
        id: p.id.clone(),
        difficulty: p.difficulty,
        executed: best.is_some_and(|e| e.report.executed),
        score: best.map_or(0.0, |e| e.critique.score),
        validity: best.map_or(0.0, |e| e.critique.validity),
        intent_match: best.map_or(0.0, |e| e.critique.intent_match),
        iterations: state.history.len(),
        selected_iteration: best.map(|e| e.iteration),
        mode,
        terminal: state.terminal,
        error: None,
    }
}

fn failed_row(p: &BenchPrompt, mode: EvaluationMode, error: String) -> BenchRow {
    BenchRow {
        id: p.id.clone(),
        difficulty: p.difficulty,
        executed: false,
        score: 0.0,
        validity: 0.0,
        intent_match: 0.0,
        iterations: 0,
        selected_iteration: None,
        mode,
        terminal: Terminal::Unrecoverable,
        error: Some(error),
    }
}

/// Directory-safe form of a prompt id.
fn safe_id(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Runs one prompt in isolation. Errors become a zero-score row.
pub fn run_prompt(
    p: &BenchPrompt,
    runner: Runner,
    cfg: &AgentConfig,
    store: &RetrievalStore,
    opts: &BenchOptions,
    bench_id: &str,
) -> BenchRow {
    let mut cfg = cfg.clone();
    match runner {
        Runner::Builtin => cfg.generator = GeneratorKind::Builtin,
        Runner::Remote => cfg.generator = GeneratorKind::Remote,
        Runner::Agent => {}
    }
    let run_opts = RunOptions {
        adapter: opts.adapter.clone(),
        out_dir: opts.out_dir.as_ref().map(|d| d.join(format!("bench_{}", safe_id(bench_id))).join(safe_id(&p.id))),
        run_id: Some("0".into()),
        initial_program: None,
        seed: Some(hash_str(&p.id)),
    };
    let result = match runner {
        Runner::Agent => run_graph_with(&p.text, &cfg, store, &run_opts),
        Runner::Builtin | Runner::Remote => run_single_pass(&p.text, &cfg, store, &run_opts),
    };
    match result {
        Ok(state) => row_from_state(p, &state, cfg.evaluation_mode),
        Err(e) => failed_row(p, cfg.evaluation_mode, e.to_string()),
    }
}

pub fn run_benchmark(suite: &BenchmarkSuite, runner: Runner, cfg: &AgentConfig, store: &RetrievalStore) -> BenchResult {
    run_benchmark_with(suite, runner, cfg, store, &BenchOptions::default())
}

pub fn run_benchmark_with(
    suite: &BenchmarkSuite,
    runner: Runner,
    cfg: &AgentConfig,
    store: &RetrievalStore,
    opts: &BenchOptions,
) -> BenchResult {
    let bench_id = opts.bench_id.clone().unwrap_or_else(|| suite.name.clone());
    let rows = par::map(opts.exec, &suite.prompts, |p| run_prompt(p, runner, cfg, store, opts, &bench_id));
    BenchResult {
        suite: suite.name.clone(),
        runner,
        aggregates: aggregate(&rows),
        rows,
    }
}

/// Plain-text table and the JSON form of a result.
pub fn summarize(result: &BenchResult) -> (String, String) {
    let a = &result.aggregates;
    let mut t = String::new();
    let _ = writeln!(t, "suite {}  runner {}", result.suite, result.runner.name());
    let _ = writeln!(t, "{:<10} {:>6} {:>10} {:>10}", "difficulty", "count", "exec_rate", "mean");
    for (d, s) in &a.by_difficulty {
        let _ = writeln!(t, "{:<10} {:>6} {:>10.3} {:>10.3}", d.name(), s.count, s.execution_rate, s.mean_score);
    }
    let _ = writeln!(t, "{:<10} {:>6} {:>10.3} {:>10.3}", "overall", a.count, a.execution_rate, a.mean_score);
    let hist: Vec<String> = a.iteration_histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect();
    let _ = writeln!(t, "iterations {}", hist.join(" "));
    let json = serde_json::to_string_pretty(result).expect("result serializes") + "\n";
    (t, json)
}
