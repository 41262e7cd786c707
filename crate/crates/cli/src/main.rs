use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use hypersweep::analysis::{self, export, AnalysisError};
use hypersweep::journal::{self, JournalError};
use hypersweep::objective::spec::SpecError;
use hypersweep::search::ga::{ga_search, FitnessScheme, GaParams, InitMode};
use hypersweep::search::{random_search, sequential_search, SequentialOptions};
use hypersweep::{
    Budget, ConfigSpace, Configuration, EvalError, Evaluator, EvaluatorOptions, JournalHeader,
    JournalWriter, ObjectiveSpec, SearchError, SearchResult, SpaceError,
};

const EXIT_INPUT: u8 = 2;
const EXIT_OBJECTIVE: u8 = 3;
const EXIT_INTERRUPTED: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "hypersweep",
    version,
    about = "Search and characterize discrete hyperparameter spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inspect a space definition.
    #[command(subcommand)]
    Space(SpaceCommand),
    /// Run a search and journal every evaluation.
    Search {
        #[arg(value_enum)]
        method: Method,
        #[command(flatten)]
        args: SearchArgs,
    },
    /// Per-hyperparameter sensitivity report from a journal.
    Analyze(AnalyzeArgs),
    /// Summaries of a finished journal.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Subcommand, Debug)]
enum SpaceCommand {
    /// Check a space file and print its size.
    Validate { path: PathBuf },
}

#[derive(Subcommand, Debug)]
enum ReportCommand {
    /// Default configuration against the best evaluation in a journal.
    Compare {
        #[arg(long)]
        journal: PathBuf,
        /// Space file; the bundled AWD-LSTM space when omitted.
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = StartMode::Default)]
        default_config: StartMode,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Method {
    Sequential,
    Ga,
    Random,
}

impl Method {
    fn as_str(self) -> &'static str {
        match self {
            Method::Sequential => "sequential",
            Method::Ga => "ga",
            Method::Random => "random",
        }
    }
}

/// Which configuration a search starts from.
#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum StartMode {
    /// The space defaults as written, including off-grid values.
    Default,
    /// The space defaults moved to their nearest grid values.
    Snapped,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FitnessArg {
    Inverse,
    Window,
    Rank,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum InitArg {
    Neighborhood,
    Uniform,
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Space file; the bundled AWD-LSTM space when omitted.
    #[arg(long)]
    space: Option<PathBuf>,
    /// Objective spec: surrogate:separable?…, surrogate:coupled?…, table:PATH or worker:CMD.
    #[arg(long, default_value = "surrogate:separable")]
    objective: Option<String>,
    /// Journal to create; refuses to overwrite.
    #[arg(long, conflicts_with = "resume")]
    journal: Option<PathBuf>,
    /// Continue an interrupted run; search settings come from its header.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Search seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seed passed to the objective for every evaluation.
    #[arg(long, default_value_t = 0)]
    eval_seed: u64,
    /// Training epochs passed to the objective.
    #[arg(long, default_value_t = 5)]
    epochs: u32,
    #[arg(long, value_enum, default_value_t = StartMode::Snapped)]
    start: StartMode,
    /// Concurrent evaluations.
    #[arg(long, env = "HYPERSWEEP_PARALLEL", default_value_t = 1)]
    parallel: usize,
    /// Per-evaluation timeout for worker objectives, in seconds.
    #[arg(long, env = "HYPERSWEEP_EVAL_TIMEOUT_SECS", default_value_t = 3600)]
    eval_timeout: u64,
    /// Worker handshake timeout, in seconds.
    #[arg(long, default_value_t = 30)]
    handshake_timeout: u64,
    /// Omit timestamps and wall-clock times.
    #[arg(long)]
    deterministic: bool,
    /// Stop after this many fresh evaluations, as if killed.
    #[arg(long)]
    stop_after: Option<usize>,

    /// Sequential: comma-separated sweep order.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<String>>,
    /// Sequential: repeat sweeps until no parameter changes.
    #[arg(long)]
    fixed_point: bool,

    /// GA: population size.
    #[arg(long, default_value_t = 12)]
    pop: usize,
    /// GA: generations.
    #[arg(long, default_value_t = 7)]
    gens: usize,
    /// GA: distinct configurations to evaluate.
    #[arg(long, default_value_t = 84)]
    budget: usize,
    /// GA: per-gene mutation probability.
    #[arg(long, default_value_t = 0.2)]
    p_mut: f64,
    #[arg(long, value_enum, default_value_t = FitnessArg::Inverse)]
    fitness: FitnessArg,
    /// GA: individuals copied unchanged into the next generation.
    #[arg(long, default_value_t = 0)]
    elitism: usize,
    #[arg(long, value_enum, default_value_t = InitArg::Neighborhood)]
    init: InitArg,
    /// GA: per-gene mutation probability for the initial neighborhood.
    #[arg(long, default_value_t = 0.5)]
    p_init: f64,

    /// Random: number of draws.
    #[arg(short = 'n', long = "samples", default_value_t = 84)]
    samples: usize,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[arg(long)]
    journal: PathBuf,
    /// Space file; the bundled AWD-LSTM space when omitted.
    #[arg(long)]
    space: Option<PathBuf>,
    /// Significance level of the rank test.
    #[arg(long, default_value_t = analysis::DEFAULT_ALPHA)]
    alpha: f64,
    /// Relative median gap still counted as near the best.
    #[arg(long, default_value_t = analysis::DEFAULT_NEAR_THRESHOLD)]
    near: f64,
    /// Report JSON path.
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    #[arg(long)]
    svg_dir: Option<PathBuf>,
    #[arg(long)]
    csv_dir: Option<PathBuf>,
    /// Which defaults the parameters are judged against.
    #[arg(long, value_enum, default_value_t = StartMode::Default)]
    default_config: StartMode,
    /// Omit the report timestamp.
    #[arg(long)]
    deterministic: bool,
}

/// Settings that determine a run's content, stored in the journal header.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
struct RunParams {
    eval_seed: u64,
    epochs: u32,
    start: StartMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<Vec<String>>,
    #[serde(default)]
    fixed_point: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ga: Option<GaParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
}

impl RunParams {
    fn from_args(method: Method, a: &SearchArgs) -> Self {
        RunParams {
            eval_seed: a.eval_seed,
            epochs: a.epochs,
            start: a.start,
            order: a.order.clone().filter(|_| method == Method::Sequential),
            fixed_point: method == Method::Sequential && a.fixed_point,
            ga: (method == Method::Ga).then_some(GaParams {
                population_size: a.pop,
                generations: a.gens,
                p_mut: a.p_mut,
                fitness_scheme: match a.fitness {
                    FitnessArg::Inverse => FitnessScheme::Inverse,
                    FitnessArg::Window => FitnessScheme::Window,
                    FitnessArg::Rank => FitnessScheme::Rank,
                },
                elitism: a.elitism,
                init_mode: match a.init {
                    InitArg::Neighborhood => InitMode::Neighborhood,
                    InitArg::Uniform => InitMode::Uniform,
                },
                p_init: a.p_init,
                budget: Some(a.budget),
            }),
            samples: (method == Method::Random).then_some(a.samples),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Space(SpaceCommand::Validate { path }) => cmd_space_validate(&path),
        Command::Search { method, args } => cmd_search(method, &args),
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Report(ReportCommand::Compare {
            journal,
            space,
            default_config,
        }) => cmd_compare(&journal, space.as_deref(), default_config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<SearchError>() {
            return match e {
                SearchError::Eval(EvalError::Interrupted(_)) => EXIT_INTERRUPTED,
                SearchError::Eval(EvalError::Journal(_)) => 1,
                SearchError::Space(_)
                | SearchError::Eval(EvalError::Space(_))
                | SearchError::InvalidParams(_) => EXIT_INPUT,
                SearchError::SweepFailed(_)
                | SearchError::GenerationFailed(_)
                | SearchError::NoSuccess => EXIT_OBJECTIVE,
            };
        }
        if let Some(e) = cause.downcast_ref::<SpecError>() {
            return match e {
                SpecError::Worker(_) => EXIT_OBJECTIVE,
                _ => EXIT_INPUT,
            };
        }
        if cause.downcast_ref::<SpaceError>().is_some()
            || cause.downcast_ref::<JournalError>().is_some()
            || cause.downcast_ref::<AnalysisError>().is_some()
            || cause.downcast_ref::<InputError>().is_some()
        {
            return EXIT_INPUT;
        }
    }
    1
}

/// Bad command-line input that no library error covers.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input_error(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(InputError(msg.into()))
}

fn load_space(path: Option<&Path>) -> Result<ConfigSpace> {
    let Some(p) = path else {
        return Ok(ConfigSpace::awd_lstm());
    };
    let text = fs::read_to_string(p).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => {
            input_error(format!("space file not found: {}", p.display()))
        }
        _ => input_error(format!("cannot read {}: {e}", p.display())),
    })?;
    ConfigSpace::from_json(&text).with_context(|| format!("invalid space {}", p.display()))
}

fn default_config(space: &ConfigSpace, mode: StartMode) -> Result<Configuration> {
    let d = space.default_config();
    Ok(match mode {
        StartMode::Default => d,
        StartMode::Snapped => space.snap(&d)?,
    })
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn cmd_space_validate(path: &Path) -> Result<()> {
    let space = load_space(Some(path))?;
    println!(
        "{} parameters, {} configurations",
        space.len(),
        space.size()
    );
    for name in space.off_grid_defaults() {
        let p = space.param(name).expect("listed parameter exists");
        println!(
            "warning: default {name}={} is not on its grid",
            hypersweep::space::format_value(p.default)
        );
    }
    Ok(())
}

fn cmd_search(method: Method, args: &SearchArgs) -> Result<()> {
    let space = load_space(args.space.as_deref())?;
    let digest = space.digest();

    let (writer, cached, params, seed, objective_text) = match &args.resume {
        Some(path) => {
            let (writer, loaded) = JournalWriter::resume(path)?;
            let header = writer.header().clone();
            if header.method != method.as_str() {
                return Err(input_error(format!(
                    "journal was written by `{}` search, not `{}`",
                    header.method,
                    method.as_str()
                )));
            }
            if header.space_digest != digest {
                return Err(input_error("journal was written for a different space"));
            }
            if loaded.truncated {
                log::warn!("dropped a partial trailing line from {}", path.display());
            }
            let params: RunParams = serde_json::from_value(header.params.clone()).map_err(|e| {
                input_error(format!("unreadable run parameters in journal header: {e}"))
            })?;
            let objective = header
                .objective
                .clone()
                .or_else(|| args.objective.clone())
                .ok_or_else(|| input_error("no objective given"))?;
            let records: Vec<_> = loaded.records.into_iter().map(|e| e.record).collect();
            (Some(writer), records, params, header.seed, objective)
        }
        None => {
            let params = RunParams::from_args(method, args);
            let objective = args
                .objective
                .clone()
                .ok_or_else(|| input_error("no objective given"))?;
            let writer = match &args.journal {
                Some(path) => {
                    let mut header = JournalHeader::new(
                        &digest,
                        method.as_str(),
                        args.seed,
                        Some(objective.clone()),
                        serde_json::to_value(&params).expect("params serialize"),
                    );
                    if !args.deterministic {
                        header.created_at = Some(unix_now());
                    }
                    Some(JournalWriter::create(path, header)?)
                }
                None => None,
            };
            (writer, Vec::new(), params, args.seed, objective)
        }
    };

    let mut spec: ObjectiveSpec = objective_text.parse()?;
    spec.set_eval_timeout(Duration::from_secs(args.eval_timeout));
    spec.set_handshake_timeout(Duration::from_secs(args.handshake_timeout));
    let objective = spec.build(&space, args.parallel.max(1))?;

    let options = EvaluatorOptions {
        budget: Budget {
            epochs: params.epochs,
        },
        eval_seed: params.eval_seed,
        parallelism: args.parallel.max(1),
        caching: true,
        deterministic: args.deterministic,
        stop_after: args.stop_after,
    };
    let resumed = cached.len();
    let mut ev = Evaluator::new(&space, objective.as_ref(), options).with_cache(cached);
    if let Some(w) = writer {
        ev = ev.with_journal(w);
    }
    if resumed > 0 {
        log::info!("replaying {resumed} journaled evaluations");
    }

    let start = default_config(&space, params.start)?;
    let result: SearchResult = match method {
        Method::Sequential => {
            let opts = SequentialOptions {
                order: params.order.clone(),
                until_fixed_point: params.fixed_point,
            };
            sequential_search(&ev, &start, &opts)?
        }
        Method::Ga => {
            let ga = params.ga.clone().unwrap_or_default();
            let out = ga_search(&ev, &ga, &start, seed)?;
            for g in &out.generations {
                log::info!("generation {}: best so far {:.4}", g.index, g.best_so_far);
            }
            out.search
        }
        Method::Random => random_search(&ev, params.samples.unwrap_or(84), seed)?,
    };

    let ppl = result
        .best_record
        .test_perplexity()
        .expect("best record succeeded");
    println!("best test perplexity: {ppl}");
    println!("best configuration: {}", result.best_config);
    println!("unique evaluations: {}", result.unique_evaluations);
    if result.exhausted {
        println!("note: the space holds fewer configurations than requested");
    }
    Ok(())
}

fn load_journal(path: &Path) -> Result<journal::RunJournal> {
    let loaded = journal::load(path)?;
    if loaded.truncated {
        log::warn!("ignoring a partial trailing line in {}", path.display());
    }
    Ok(loaded)
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    let space = load_space(args.space.as_deref())?;
    let loaded = load_journal(&args.journal)?;
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(input_error("--alpha must lie in (0, 1)"));
    }
    if args.near.is_nan() || args.near < 0.0 {
        return Err(input_error("--near must be non-negative"));
    }
    let records = loaded.ok_records();
    let default = default_config(&space, args.default_config)?;
    let mut report = analysis::categorize(&space, &records, &default, args.alpha, args.near)?;
    report.metadata.run_id = Some(loaded.header.run_id.clone());
    if !args.deterministic {
        report.metadata.generated_at = Some(unix_now());
    }
    match analysis::compare_default_vs_best(&space, &records, &default) {
        Ok(c) => {
            println!("{c}");
            report.comparison = Some(c);
        }
        Err(e @ (AnalysisError::DefaultMissing | AnalysisError::NoAlternative)) => {
            eprintln!("warning: comparison omitted: {e}");
        }
        Err(e) => return Err(e.into()),
    }

    export::write_json(&report, &args.out)?;
    if let Some(dir) = &args.csv_dir {
        export::write_csvs(&report, dir)?;
    }
    if let Some(dir) = &args.svg_dir {
        export::write_svgs(&report, dir)?;
    }
    for p in &report.parameters {
        match p.p_value {
            Some(pv) => println!("{:<10} {:<20} p={pv:.4}", p.name, p.bucket.as_str()),
            None => println!("{:<10} {}", p.name, p.bucket.as_str()),
        }
    }
    Ok(())
}

fn cmd_compare(journal_path: &Path, space: Option<&Path>, mode: StartMode) -> Result<()> {
    let space = load_space(space)?;
    let loaded = load_journal(journal_path)?;
    let records = loaded.ok_records();
    if records.is_empty() {
        bail!(AnalysisError::Empty);
    }
    let c = analysis::compare_default_vs_best(&space, &records, &default_config(&space, mode)?)?;
    println!("{c}");
    Ok(())
}
