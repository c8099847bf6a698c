use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use subgraph_rag::agent::AgentMode;
use subgraph_rag::data;
use subgraph_rag::harness::{
    episode_key, read_log, run_episode, run_suite, summarize_files, EpisodeConfig, HarnessConfig,
    HarnessError, PlannerSource, SuiteConfig,
};
use subgraph_rag::llm::{BackendKind, ChatModel, RecordingChat, ReplayChat, ScriptedChat, TokenCeiling};

#[derive(Parser)]
#[command(name = "sgrag", version, about = "Scene-graph retrieval for LLM task planning: episodes, suites, summaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single episode and print its result record.
    Run(RunArgs),
    /// Run a variant × task × distractor-level × repetition grid.
    Suite(SuiteArgs),
    /// Aggregate results files into a table.
    Summarize(SummarizeArgs),
    /// Re-run an episode against a replay store and compare with its log.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Backend {
    /// Each task's bundled solution, scripted.
    Solution,
    Scripted,
    Remote,
    Replay,
}

#[derive(Args)]
struct Common {
    /// TOML config with [llm], [retrieval], [embedding] and [run] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    backend: Option<Backend>,
    /// Script file for the scripted backend.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Replay store for the replay backend.
    #[arg(long = "replay-store")]
    replay_store: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    step_cap: Option<usize>,
    /// Reject planner requests above this many input tokens.
    #[arg(long)]
    token_ceiling: Option<usize>,
    /// Leave thoughts out of solution replies.
    #[arg(long)]
    no_thoughts: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Bundled task id or task file.
    #[arg(long)]
    task: String,
    /// Bundled scene id or scene file; defaults to the task's scene.
    #[arg(long)]
    scene: Option<String>,
    #[arg(long, default_value = "erag_strict")]
    variant: AgentMode,
    #[arg(long, default_value_t = 0)]
    distractors: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append every planner exchange to this replay store.
    #[arg(long)]
    record: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SuiteArgs {
    /// Comma-separated variants.
    #[arg(long, value_delimiter = ',')]
    variants: Vec<AgentMode>,
    /// `all`, `easy`, `hard`, or comma-separated ids and files.
    #[arg(long)]
    tasks: Option<String>,
    /// Comma-separated distractor counts.
    #[arg(long, value_delimiter = ',')]
    distractors: Vec<usize>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    parallelism: Option<usize>,
    /// Record planner exchanges under OUT/recordings.
    #[arg(long)]
    record: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SummarizeArgs {
    /// results.jsonl files.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct ReplayArgs {
    /// Replay store written with `run --record` or `suite --record`.
    #[arg(long)]
    store: PathBuf,
    #[arg(long)]
    task: String,
    #[arg(long)]
    scene: Option<String>,
    #[arg(long, default_value = "erag_strict")]
    variant: AgentMode,
    #[arg(long, default_value_t = 0)]
    distractors: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Original episode log to compare against (latency ignored).
    #[arg(long)]
    log: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

fn load_config(common: &Common) -> Result<HarnessConfig, HarnessError> {
    let mut config = match &common.config {
        Some(p) => HarnessConfig::load(p)?,
        None => HarnessConfig::default(),
    };
    config.llm.apply_env()?;
    if let Some(b) = common.backend {
        config.llm.backend = match b {
            Backend::Solution | Backend::Scripted => BackendKind::Scripted,
            Backend::Remote => BackendKind::Remote,
            Backend::Replay => BackendKind::Replay,
        };
    }
    if common.script.is_some() {
        config.llm.script = common.script.clone();
    }
    if common.replay_store.is_some() {
        config.llm.replay = common.replay_store.clone();
    }
    if let Some(k) = common.k {
        config.retrieval.k = k;
    }
    if let Some(t) = common.threshold {
        config.retrieval.threshold = t;
    }
    if let Some(c) = common.step_cap {
        config.run.step_cap = c;
    }
    if common.token_ceiling.is_some() {
        config.llm.token_ceiling = common.token_ceiling;
    }
    if let Some(out) = &common.out {
        config.run.out_dir = out.clone();
    }
    config.retrieval.params().validate()?;
    Ok(config)
}

/// Solutions are used unless a backend was chosen on the command line or
/// the config names a script, replay store or remote endpoint.
fn planner_source(common: &Common, config: &HarnessConfig) -> PlannerSource {
    let explicit = match common.backend {
        Some(Backend::Solution) => false,
        Some(_) => true,
        None => common.config.is_some() && (config.llm.backend != BackendKind::Scripted || config.llm.script.is_some()),
    };
    if explicit {
        let mut g = config.llm.clone();
        g.token_ceiling = None;
        PlannerSource::Gateway(g)
    } else {
        PlannerSource::Solutions {
            thoughts: !common.no_thoughts,
        }
    }
}

fn planner(
    source: &PlannerSource,
    task: &subgraph_rag::harness::TaskSpec,
    ceiling: Option<usize>,
    record: Option<&Path>,
) -> Result<Box<dyn ChatModel>, HarnessError> {
    let base: Box<dyn ChatModel> = match source {
        PlannerSource::Solutions { thoughts } => {
            let sol = task
                .solution
                .as_ref()
                .ok_or_else(|| HarnessError::Config(format!("task {} has no bundled solution; pass --backend", task.id)))?;
            Box::new(ScriptedChat::new(sol.script_with_thoughts(*thoughts))?)
        }
        PlannerSource::Gateway(g) => g.build()?,
    };
    let limited: Box<dyn ChatModel> = match ceiling {
        Some(n) => Box::new(TokenCeiling::new(base, n)),
        None => base,
    };
    Ok(match record {
        Some(p) => Box::new(RecordingChat::to_file(limited, p)?),
        None => limited,
    })
}

fn write_file(path: &Path, body: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, body)?;
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<bool, HarnessError> {
    let config = load_config(&args.common)?;
    let task = data::resolve_task(&args.task)?;
    let scene = data::resolve_scene(args.scene.as_deref().unwrap_or(&task.scene))?;
    let source = planner_source(&args.common, &config);
    let llm = planner(&source, &task, config.llm.token_ceiling, args.record.as_deref())?;
    let ep_config = EpisodeConfig::new(args.variant)
        .seed(args.seed)
        .distractors(args.distractors)
        .params(config.retrieval.params())
        .step_cap(config.run.step_cap);
    let episode = run_episode(&scene, &task, &ep_config, llm.as_ref(), config.embedding.build()?)?;
    let result = serde_json::to_string(&episode.result).expect("result serializes");
    if args.common.out.is_some() {
        let dir = &config.run.out_dir;
        let key = episode_key(&task.id, &scene.id, args.variant, args.distractors, args.seed);
        write_file(&dir.join("logs").join(format!("{key}.jsonl")), &episode.log_jsonl())?;
        write_file(&dir.join(format!("{key}.result.json")), &(result.clone() + "\n"))?;
    }
    println!("{result}");
    Ok(true)
}

fn cmd_suite(args: SuiteArgs) -> Result<bool, HarnessError> {
    let config = load_config(&args.common)?;
    let variants = if args.variants.is_empty() { config.run.variants.clone() } else { args.variants.clone() };
    let tasks = match &args.tasks {
        Some(sel) => data::select_tasks(sel)?,
        None if config.run.tasks.is_empty() => data::tasks(),
        None => data::select_tasks(&config.run.tasks.join(","))?,
    };
    let mut scenes = data::scenes();
    for t in &tasks {
        if !scenes.iter().any(|s| s.id == t.scene) {
            scenes.push(data::resolve_scene(&t.scene)?);
        }
    }
    let mut suite = SuiteConfig::new(variants, tasks, scenes);
    suite.distractor_levels = if args.distractors.is_empty() { config.run.distractors.clone() } else { args.distractors.clone() };
    suite.repetitions = args.repetitions.unwrap_or(config.run.repetitions);
    suite.base_seed = args.seed.unwrap_or(config.run.seed);
    suite.parallelism = args.parallelism.unwrap_or(config.run.parallelism);
    suite.params = config.retrieval.params();
    suite.step_cap = config.run.step_cap;
    suite.planner = planner_source(&args.common, &config);
    suite.token_ceiling = config.llm.token_ceiling;
    suite.out_dir = Some(config.run.out_dir.clone());
    suite.record = args.record;
    let outcome = run_suite(&suite, config.embedding.build()?)?;
    print!("{}", outcome.summary.render());
    eprintln!(
        "{} episodes written to {}",
        outcome.results.len(),
        config.run.out_dir.display()
    );
    for e in &outcome.errors {
        eprintln!("error: {e}");
    }
    Ok(outcome.errors.is_empty())
}

fn cmd_summarize(args: SummarizeArgs) -> Result<bool, HarnessError> {
    let summary = summarize_files(&args.files)?;
    if args.csv {
        print!("{}", summary.render_csv());
    } else {
        print!("{}", summary.render());
    }
    Ok(true)
}

fn cmd_replay(args: ReplayArgs) -> Result<bool, HarnessError> {
    let config = load_config(&args.common)?;
    let task = data::resolve_task(&args.task)?;
    let scene = data::resolve_scene(args.scene.as_deref().unwrap_or(&task.scene))?;
    let replay: Box<dyn ChatModel> = Box::new(ReplayChat::load(&args.store)?);
    let llm: Box<dyn ChatModel> = match config.llm.token_ceiling {
        Some(n) => Box::new(TokenCeiling::new(replay, n)),
        None => replay,
    };
    let ep_config = EpisodeConfig::new(args.variant)
        .seed(args.seed)
        .distractors(args.distractors)
        .params(config.retrieval.params())
        .step_cap(config.run.step_cap);
    let episode = run_episode(&scene, &task, &ep_config, llm.as_ref(), config.embedding.build()?)?;
    println!("{}", serde_json::to_string(&episode.result).expect("result serializes"));
    let Some(log_path) = &args.log else {
        return Ok(true);
    };
    let text = fs::read_to_string(log_path).map_err(|e| HarnessError::Io(format!("{}: {e}", log_path.display())))?;
    let original: Vec<_> = read_log(&text)?.iter().map(|r| r.without_latency()).collect();
    let replayed = episode.comparable_log();
    if original == replayed {
        eprintln!("replay matches {} ({} records)", log_path.display(), original.len());
        return Ok(true);
    }
    let first = original
        .iter()
        .zip(&replayed)
        .position(|(a, b)| a != b)
        .unwrap_or(original.len().min(replayed.len()));
    eprintln!(
        "replay differs from {} at record {} ({} vs {} records)",
        log_path.display(),
        first + 1,
        original.len(),
        replayed.len()
    );
    Ok(false)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Suite(a) => cmd_suite(a),
        Command::Summarize(a) => cmd_summarize(a),
        Command::Replay(a) => cmd_replay(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
