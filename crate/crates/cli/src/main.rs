//! `bioforge` command-line entry point.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use bioforge::adapter::AdapterConfig;
use bioforge::agent::{run_graph_with, AgentConfig, EvaluationMode, GeneratorKind, RetrievalStore, RunOptions};
use bioforge::bench::{run_benchmark_with, summarize, BenchOptions, BenchmarkSuite, Runner};
use bioforge::dataset::{base_library, build_dataset_with, general_library, PipelineConfig};
use bioforge::dsl::parse;
use bioforge::geom::{compile_program, Scene};
use bioforge::par::Execution;
use bioforge::validate::{export_stl, render_scene, validate_scene, Camera, View};

#[derive(Parser, Debug)]
#[command(name = "bioforge", version, about = "Compile, validate and generate bioinspired design programs")]
struct Cli {
    /// Output directory for every artifact.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// JSON config with optional `agent`, `pipeline` and `adapter` sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile a program, export STL and write the validation report.
    Compile { file: PathBuf },
    /// Render a program to a PPM image.
    Render {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "iso")]
        view: ViewArg,
    },
    /// Print the validation report of a program.
    Validate { file: PathBuf },
    /// Run the design loop on a prompt.
    Agent(AgentArgs),
    /// Build a dataset.
    Dataset,
    /// Run a benchmark suite.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct LoopArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Retrieval store JSON; the shipped base store by default.
    #[arg(long)]
    store: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AgentArgs {
    #[arg(long)]
    prompt: String,
    #[arg(long, value_enum)]
    runner: Option<GeneratorArg>,
    #[command(flatten)]
    common: LoopArgs,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Suite JSON; the shipped suite by default.
    #[arg(long)]
    suite: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "builtin")]
    runner: RunnerArg,
    /// Run prompts one after another.
    #[arg(long)]
    serial: bool,
    #[command(flatten)]
    common: LoopArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ViewArg {
    Iso,
    Front,
    Top,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    #[value(name = "any_step", alias = "any")]
    AnyStep,
    #[value(name = "final", alias = "final_render")]
    Final,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GeneratorArg {
    Builtin,
    Remote,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RunnerArg {
    Builtin,
    Agent,
    Remote,
}

#[derive(Deserialize, Default, Debug)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    agent: AgentConfig,
    pipeline: PipelineConfig,
    adapter: AdapterConfig,
}

/// A failure with the exit code it maps to.
struct Failure(u8, String);

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure(1, e.to_string())
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile, Failure> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure(2, format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure(2, format!("{}: {e}", path.display())))?;
    let sectioned = value
        .as_object()
        .is_some_and(|o| o.keys().any(|k| matches!(k.as_str(), "agent" | "pipeline" | "adapter")));
    let parsed = if sectioned {
        serde_json::from_value(value)
    } else {
        // A bare pipeline config is accepted for `dataset --config`.
        serde_json::from_value(value).map(|pipeline| ConfigFile {
            pipeline,
            ..ConfigFile::default()
        })
    };
    parsed.map_err(|e| Failure(2, format!("{}: {e}", path.display())))
}

fn read_scene(file: &Path) -> Result<Scene, Failure> {
    let text = std::fs::read_to_string(file).map_err(|e| domain(format!("{}: {e}", file.display())))?;
    let program = parse(&text).map_err(|e| domain(format!("{}: {e}", file.display())))?;
    compile_program(&program).map_err(|e| domain(format!("{}: [{}] {e}", file.display(), e.code())))
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(domain)?;
    }
    std::fs::write(path, bytes).map_err(|e| domain(format!("{}: {e}", path.display())))
}

fn stem(file: &Path) -> String {
    file.file_stem().map_or("design".into(), |s| s.to_string_lossy().into_owned())
}

fn agent_config(base: &AgentConfig, a: &LoopArgs) -> Result<AgentConfig, Failure> {
    let mut cfg = base.clone();
    if let Some(k) = a.k {
        cfg.k = k;
    }
    if let Some(n) = a.max_iters {
        cfg.max_iterations = n;
    }
    if let Some(t) = a.threshold {
        cfg.accept_threshold = t;
    }
    if let Some(m) = a.mode {
        cfg.evaluation_mode = match m {
            ModeArg::AnyStep => EvaluationMode::AnyStep,
            ModeArg::Final => EvaluationMode::FinalRender,
        };
    }
    cfg.validate().map_err(|e| Failure(2, e.to_string()))?;
    Ok(cfg)
}

fn load_store(path: Option<&Path>) -> Result<RetrievalStore, Failure> {
    match path {
        Some(p) => RetrievalStore::load(p).map_err(|e| domain(format!("{}: {e}", p.display()))),
        None => Ok(RetrievalStore::base()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = load_config(cli.config.as_deref())?;
    let adapter = config.adapter.clone().with_env();
    let out = &cli.out;
    match cli.command {
        Command::Compile { file } => {
            let scene = read_scene(&file)?;
            let report = validate_scene(&scene);
            let dir = out.join(stem(&file));
            std::fs::create_dir_all(&dir).map_err(domain)?;
            export_stl(&scene, &dir.join("scene.stl")).map_err(domain)?;
            write(&dir.join("blocks.json"), serde_json::to_string_pretty(&scene.blocks).map_err(domain)?)?;
            write(&dir.join("report.json"), serde_json::to_string_pretty(&report).map_err(domain)?)?;
            emit(&format!(
                "{}: {} meshes, {} triangles, validity {:.3}\n",
                file.display(),
                scene.meshes.len(),
                scene.triangle_count(),
                report.validity()
            ));
        }
        Command::Render { file, view } => {
            let scene = read_scene(&file)?;
            let view = match view {
                ViewArg::Iso => View::Iso,
                ViewArg::Front => View::Front,
                ViewArg::Top => View::Top,
            };
            let img = render_scene(&scene, &Camera::new(view)).map_err(domain)?;
            let path = out.join(stem(&file)).join(format!("render_{}.ppm", view.name()));
            write(&path, img.to_ppm())?;
            emit(&format!("{}
", path.display()));
        }
        Command::Validate { file } => {
            let scene = read_scene(&file)?;
            let report = validate_scene(&scene);
            let json = serde_json::to_string_pretty(&report).map_err(domain)?;
            write(&out.join(stem(&file)).join("report.json"), &json)?;
            emit(&format!("{json}\n"));
        }
        Command::Agent(a) => {
            let mut cfg = agent_config(&config.agent, &a.common)?;
            if let Some(g) = a.runner {
                cfg.generator = match g {
                    GeneratorArg::Builtin => GeneratorKind::Builtin,
                    GeneratorArg::Remote => GeneratorKind::Remote,
                };
            }
            if cfg.generator == GeneratorKind::Remote && adapter.endpoint.is_none() {
                return Err(Failure(2, "the remote runner needs an endpoint (BIOFORGE_ENDPOINT or adapter.endpoint)".into()));
            }
            let store = load_store(a.common.store.as_deref())?;
            let opts = RunOptions {
                adapter,
                out_dir: Some(out.clone()),
                ..RunOptions::default()
            };
            let state = run_graph_with(&a.prompt, &cfg, &store, &opts).map_err(domain)?;
            for w in &state.warnings {
                log::warn!("{w}");
            }
            let best = bioforge::agent::select_best(&state, cfg.evaluation_mode);
            emit(&format!(
                "terminal {:?}, {} iteration(s), selected {} with score {:.3}\n",
                state.terminal,
                state.history.len(),
                best.map_or("none".into(), |e| format!("iter_{}", e.iteration)),
                best.map_or(0.0, |e| e.critique.score)
            ));
        }
        Command::Dataset => {
            let cfg = config.pipeline;
            let dataset = build_dataset_with(&cfg, &base_library(), &general_library(), Execution::default(), Some(out))
                .map_err(domain)?;
            std::fs::create_dir_all(out).map_err(domain)?;
            dataset.write(out).map_err(domain)?;
            emit(&dataset.stats.to_table());
        }
        Command::Bench(b) => {
            let cfg = agent_config(&config.agent, &b.common)?;
            let runner = match b.runner {
                RunnerArg::Builtin => Runner::Builtin,
                RunnerArg::Agent => Runner::Agent,
                RunnerArg::Remote => Runner::Remote,
            };
            if runner == Runner::Remote && adapter.endpoint.is_none() {
                return Err(Failure(2, "the remote runner needs an endpoint (BIOFORGE_ENDPOINT or adapter.endpoint)".into()));
            }
            let suite = match &b.suite {
                Some(p) => BenchmarkSuite::load(p).map_err(|e| domain(format!("{}: {e}", p.display())))?,
                None => BenchmarkSuite::shipped(),
            };
            let store = load_store(b.common.store.as_deref())?;
            let opts = BenchOptions {
                adapter,
                out_dir: Some(out.clone()),
                bench_id: None,
                exec: if b.serial { Execution::Serial } else { Execution::default() },
            };
            let result = run_benchmark_with(&suite, runner, &cfg, &store, &opts);
            let (table, json) = summarize(&result);
            write(&out.join(format!("bench_{}_{}.json", suite.name, runner.name())), json)?;
            write(&out.join(format!("bench_{}_{}.txt", suite.name, runner.name())), &table)?;
            emit(&table);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
