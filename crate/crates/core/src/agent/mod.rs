//! The design loop: generate, compile and validate, render, evaluate, then
//! accept, repair or refine, all over one shared [`DesignState`].

pub mod critique;
pub mod generate;
pub mod refine;
pub mod repair;
pub mod retrieval;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adapter::AdapterConfig;
use crate::dsl::intent::IntentSpec;
use crate::dsl::{format, parse, parse_intent, DesignProgram, WordBanks};
use crate::geom::{compile_program, Scene};
use crate::rng::hash_str;
use crate::validate::{render_scene, validate_scene, Camera, ValidationReport, View};

pub use critique::{evaluate, CritiqueReport, Issue, Suggestion};
pub use generate::{generate, generate_builtin, prompt_seed};
pub use refine::refine;
pub use repair::{repair, Failure, NoRuleApplies};
pub use retrieval::{retrieve, Descriptor, Hit, RetrievalEntry, RetrievalStore, Retrieved, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluationMode {
    /// Best-scoring entry of the whole history.
    #[default]
    AnyStep,
    /// Last entry of the history.
    FinalRender,
}

impl EvaluationMode {
    pub fn from_name(s: &str) -> Option<EvaluationMode> {
        match s {
            "any_step" | "any" => Some(EvaluationMode::AnyStep),
            "final_render" | "final" => Some(EvaluationMode::FinalRender),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    #[default]
    Builtin,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    /// Retrieved context entries per generation; 0 disables retrieval.
    pub k: usize,
    pub max_iterations: usize,
    pub accept_threshold: f64,
    pub evaluation_mode: EvaluationMode,
    pub generator: GeneratorKind,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            k: 2,
            max_iterations: 4,
            accept_threshold: 0.7,
            evaluation_mode: EvaluationMode::AnyStep,
            generator: GeneratorKind::Builtin,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("max_iterations must be at least 1")]
    NoIterations,
    #[error("accept_threshold must be a finite number, got {0}")]
    BadThreshold(f64),
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_iterations == 0 {
            return Err(ConfigError::NoIterations);
        }
        if !self.accept_threshold.is_finite() {
            return Err(ConfigError::BadThreshold(self.accept_threshold));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("writing run artifacts: {0}")]
    Io(#[from] std::io::Error),
}

/// Per-run settings that are not part of the agent configuration.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub adapter: AdapterConfig,
    /// Artifacts go to `<out_dir>/run_<id>/` when set. Renders are only
    /// produced when artifacts are persisted.
    pub out_dir: Option<PathBuf>,
    pub run_id: Option<String>,
    /// Replaces the generator's first program (fault injection).
    pub initial_program: Option<String>,
    /// Program seed for the builtin generator; derived from the prompt
    /// when unset.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Generate,
    Repair,
    Refine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    /// The node that produced this program.
    pub action: Action,
    pub program_text: String,
    pub renders: Vec<String>,
    pub report: ValidationReport,
    pub critique: CritiqueReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    Running,
    Accepted,
    MaxIters,
    Unrecoverable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignState {
    pub prompt: String,
    pub intent: IntentSpec,
    pub program: Option<DesignProgram>,
    pub program_text: Option<String>,
    #[serde(skip)]
    pub scene: Option<Scene>,
    pub report: Option<ValidationReport>,
    pub critique: Option<CritiqueReport>,
    pub iteration: usize,
    pub history: Vec<HistoryEntry>,
    pub terminal: Terminal,
    /// Why the current program did not execute, if it did not.
    pub failure: Option<Failure>,
    pub warnings: Vec<String>,
}

impl DesignState {
    pub fn new(prompt: &str) -> DesignState {
        DesignState {
            prompt: prompt.to_string(),
            intent: parse_intent(prompt, &WordBanks::builtin()),
            program: None,
            program_text: None,
            scene: None,
            report: None,
            critique: None,
            iteration: 0,
            history: Vec::new(),
            terminal: Terminal::Running,
            failure: None,
            warnings: Vec::new(),
        }
    }

    /// Parses, compiles and validates `text` into the state.
    pub fn execute(&mut self, text: String) {
        self.program = None;
        self.scene = None;
        self.failure = None;
        match parse(&text) {
            Err(e) => {
                self.report = Some(ValidationReport::failed(e.to_string()));
                self.failure = Some(Failure::Parse(e));
            }
            Ok(p) => match compile_program(&p) {
                Err(e) => {
                    self.report = Some(ValidationReport::failed(e.to_string()));
                    self.failure = Some(Failure::Compile(e));
                    self.program = Some(p);
                }
                Ok(scene) => {
                    self.report = Some(validate_scene(&scene));
                    self.scene = Some(scene);
                    self.program = Some(p);
                }
            },
        }
        self.program_text = Some(text);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state serializes")
    }
}

/// The history entry a mode selects: the earliest best score, or the last.
pub fn select_best(state: &DesignState, mode: EvaluationMode) -> Option<&HistoryEntry> {
    match mode {
        EvaluationMode::FinalRender => state.history.last(),
        EvaluationMode::AnyStep => state.history.iter().fold(None, |best: Option<&HistoryEntry>, e| match best {
            Some(b) if b.critique.score >= e.critique.score => Some(b),
            _ => Some(e),
        }),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    fs::write(path, serde_json::to_string_pretty(value).expect("serializable"))
}

pub fn default_run_id(prompt: &str) -> String {
    format!("{:016x}", hash_str(prompt))
}

pub fn run_graph(prompt: &str, cfg: &AgentConfig, store: &RetrievalStore) -> Result<DesignState, AgentError> {
    run_graph_with(prompt, cfg, store, &RunOptions::default())
}

pub fn run_graph_with(
    prompt: &str,
    cfg: &AgentConfig,
    store: &RetrievalStore,
    opts: &RunOptions,
) -> Result<DesignState, AgentError> {
    run(prompt, cfg, store, opts, false)
}

/// Generate, execute and evaluate once, without repair or refinement.
/// The terminal state is `Accepted` when the score clears the threshold,
/// otherwise `MaxIters` (or `Unrecoverable` if the program failed).
pub fn run_single_pass(
    prompt: &str,
    cfg: &AgentConfig,
    store: &RetrievalStore,
    opts: &RunOptions,
) -> Result<DesignState, AgentError> {
    run(prompt, cfg, store, opts, true)
}

fn run(
    prompt: &str,
    cfg: &AgentConfig,
    store: &RetrievalStore,
    opts: &RunOptions,
    single: bool,
) -> Result<DesignState, AgentError> {
    cfg.validate()?;
    let run_dir = opts
        .out_dir
        .as_ref()
        .map(|d| d.join(format!("run_{}", opts.run_id.clone().unwrap_or_else(|| default_run_id(prompt)))));
    if let Some(d) = &run_dir {
        fs::create_dir_all(d)?;
    }

    let mut state = DesignState::new(prompt);
    let retrieved = if cfg.k == 0 {
        retrieval::Retrieved {
            hits: Vec::new(),
            warning: None,
        }
    } else {
        retrieve(store, prompt, cfg.k)
    };
    state.warnings.extend(retrieved.warning);
    let seed = opts.seed.unwrap_or_else(|| prompt_seed(prompt));
    let generated = generate(prompt, seed, &state.intent, &retrieved.hits, store, cfg.generator, &opts.adapter);
    state.warnings.extend(generated.warning);
    let mut text = opts.initial_program.clone().unwrap_or(generated.text);
    let mut action = Action::Generate;

    loop {
        state.execute(text);
        let mut renders = Vec::new();
        let iter_dir = run_dir.as_ref().map(|d| d.join(format!("iter_{}", state.iteration)));
        if let Some(dir) = &iter_dir {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("program.bgs"), state.program_text.as_deref().unwrap_or(""))?;
            if let Some(scene) = &state.scene {
                match render_scene(scene, &Camera::new(View::Iso)) {
                    Ok(img) => {
                        let path = dir.join("render_iso.ppm");
                        fs::write(&path, img.to_ppm())?;
                        renders.push(path.display().to_string());
                    }
                    Err(e) => state.warnings.push(format!("iteration {}: render skipped: {e}", state.iteration)),
                }
            }
        }
        let critique = evaluate(&state, store);
        let report = state.report.clone().expect("execute sets a report");
        if let Some(dir) = &iter_dir {
            write_json(&dir.join("report.json"), &report)?;
            write_json(&dir.join("critique.json"), &critique)?;
        }
        state.history.push(HistoryEntry {
            iteration: state.iteration,
            action,
            program_text: state.program_text.clone().unwrap_or_default(),
            renders,
            report,
            critique: critique.clone(),
        });
        state.critique = Some(critique.clone());

        if critique.score >= cfg.accept_threshold {
            state.terminal = Terminal::Accepted;
            break;
        }
        if single || state.iteration >= cfg.max_iterations {
            state.terminal = if state.failure.is_some() {
                Terminal::Unrecoverable
            } else {
                Terminal::MaxIters
            };
            break;
        }

        let current = state.program_text.clone().unwrap_or_default();
        state.iteration += 1;
        (text, action) = match (&state.failure, &state.program) {
            (Some(f), _) => match repair(&current, f) {
                Ok(t) => (t, Action::Repair),
                Err(e) => {
                    state.warnings.push(format!("iteration {}: {e}", state.iteration));
                    (current, Action::Repair)
                }
            },
            (None, Some(p)) => (format(&refine(p, &critique)), Action::Refine),
            (None, None) => unreachable!("a program without failure always parsed"),
        };
    }

    if let Some(d) = &run_dir {
        fs::write(d.join("final.json"), state.to_json())?;
    }
    Ok(state)
}
