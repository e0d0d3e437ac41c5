//! Command-line driver. `run` parses arguments, executes one subcommand and
//! returns the process exit status.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 missing or corrupt model,
//! 3 malformed corpus, 64 invalid flags.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::eval::{default_beta_grid, evaluate, sweep_beta, Punctuation};
use crate::integrator::{parse_corpus, IntegratorConfig};
use crate::scoring::io::{
    read_arc_model, read_transition_model, write_arc_model, write_transition_model,
};
use crate::scoring::{
    train_arc_scorer_crf, train_transition_classifier, ArcScorerModel, CrfTrainConfig,
    TransitionModel, TransitionTrainConfig, ViewConfig,
};
use crate::treebank::{parse_conll, projective_pairs, write_conll, DepTree, Sentence};

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_MODEL: i32 = 2;
pub const EXIT_CORPUS: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "frparse", version, about = "Arc-eager parsing with future-reward reranking")]
pub struct Cli {
    /// File that receives one manifest line per invocation.
    #[arg(long, global = true, default_value = "frparse.log")]
    pub log: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the transition classifier with the dynamic oracle.
    TrainTransition(TrainTransitionArgs),
    /// Train the arc scorer as a first-order CRF.
    TrainGraph(TrainGraphArgs),
    /// Parse a CoNLL file.
    Parse(ParseArgs),
    /// Score a parse against gold trees.
    Eval(EvalArgs),
    /// Choose beta by development UAS.
    SweepBeta(SweepArgs),
}

#[derive(Debug, Args)]
pub struct TrainTransitionArgs {
    #[arg(long)]
    pub train: PathBuf,
    /// Output model; per-epoch UAS goes to `<model>.epochs`.
    #[arg(long)]
    pub model_transition: PathBuf,
    /// 1 for the base parser, 3 for context enhancement.
    #[arg(long, default_value_t = 1, value_parser = parse_views)]
    pub views: usize,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1, value_parser = parse_probability)]
    pub explore: f64,
}

#[derive(Debug, Args)]
pub struct TrainGraphArgs {
    #[arg(long)]
    pub train: PathBuf,
    /// Output model; per-epoch NLL goes to `<model>.epochs`.
    #[arg(long)]
    pub model_graph: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub model_transition: PathBuf,
    /// Needed whenever beta < 1.
    #[arg(long)]
    pub model_graph: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0, value_parser = parse_temperature)]
    pub temperature: f64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[arg(long)]
    pub test: PathBuf,
    #[command(flatten)]
    pub models: ModelArgs,
    #[arg(long, default_value_t = 0.5, value_parser = parse_probability)]
    pub beta: f64,
    /// CoNLL output; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Gold corpus.
    #[arg(long)]
    pub test: PathBuf,
    /// Parsed corpus to score. When absent, `--test` is parsed with the models.
    #[arg(long)]
    pub pred: Option<PathBuf>,
    #[arg(long)]
    pub model_transition: Option<PathBuf>,
    #[arg(long)]
    pub model_graph: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5, value_parser = parse_probability)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_temperature)]
    pub temperature: f64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, value_enum, default_value_t = PunctMode::Include)]
    pub punct: PunctMode,
    /// Text report; the key-value form goes to `<output>.kv`. Stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub dev: PathBuf,
    #[command(flatten)]
    pub models: ModelArgs,
    /// Comma-separated betas; defaults to 0, 0.05, ..., 1.
    #[arg(long, value_delimiter = ',', value_parser = parse_probability)]
    pub betas: Vec<f64>,
    /// Curve file of `beta<TAB>uas` lines; the chosen beta goes to `<output>.best`.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PunctMode {
    Include,
    Exclude,
}

fn parse_views(s: &str) -> Result<usize, String> {
    match s {
        "1" => Ok(1),
        "3" => Ok(3),
        _ => Err(format!("expected 1 or 3, got {s:?}")),
    }
}

fn parse_probability(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn parse_temperature(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("temperature must be positive, got {v}"))
    }
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Conll { .. } => EXIT_CORPUS,
            Error::Model(_) => EXIT_MODEL,
            Error::Usage(_) => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        };
        Failure::new(code, e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
        }
    };
    let started = Instant::now();
    let outcome = execute(&cli.command);
    let code = match &outcome {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("frparse: {}", f.message);
            f.code
        }
    };
    if let Err(e) = append_manifest(&cli, started, code) {
        eprintln!("frparse: cannot write log {}: {e}", cli.log.display());
        if code == 0 {
            return EXIT_RUNTIME;
        }
    }
    code
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::TrainTransition(_) => "train-transition",
        Command::TrainGraph(_) => "train-graph",
        Command::Parse(_) => "parse",
        Command::Eval(_) => "eval",
        Command::SweepBeta(_) => "sweep-beta",
    }
}

/// Hex SHA-256 of the parsed configuration.
pub fn config_hash(command: &Command) -> String {
    let digest = Sha256::digest(format!("{command:?}").as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn append_manifest(cli: &Cli, started: Instant, code: i32) -> std::io::Result<()> {
    let mut file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&cli.log)?;
    writeln!(
        file,
        "command={}\tconfig_sha256={}\twall_seconds={:.3}\texit={}",
        command_name(&cli.command),
        config_hash(&cli.command),
        started.elapsed().as_secs_f64(),
        code
    )
}

pub fn execute(command: &Command) -> Outcome {
    match command {
        Command::TrainTransition(a) => train_transition(a),
        Command::TrainGraph(a) => train_graph(a),
        Command::Parse(a) => parse(a),
        Command::Eval(a) => eval(a),
        Command::SweepBeta(a) => sweep(a),
    }
}

fn read_input(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot read {}: {e}", path.display())))
}

fn read_corpus(path: &Path) -> std::result::Result<Vec<Sentence>, Failure> {
    let text = read_input(path)?;
    parse_conll(&text).map_err(|e| Failure::new(EXIT_CORPUS, format!("{}: {e}", path.display())))
}

fn gold_trees(path: &Path, corpus: &[Sentence]) -> std::result::Result<Vec<DepTree>, Failure> {
    corpus
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.gold_tree().ok_or_else(|| {
                Failure::new(
                    EXIT_CORPUS,
                    format!("{}: sentence {} lacks gold heads", path.display(), i + 1),
                )
            })
        })
        .collect()
}

fn training_pairs(path: &Path) -> std::result::Result<Vec<(Sentence, DepTree)>, Failure> {
    let corpus = read_corpus(path)?;
    gold_trees(path, &corpus)?;
    let (pairs, skipped) = projective_pairs(&corpus);
    if skipped > 0 {
        eprintln!("frparse: skipped {skipped} non-projective sentences");
    }
    Ok(pairs)
}

fn model_error(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::new(EXIT_MODEL, format!("{}: {e}", path.display()))
}

fn load_transition(path: &Path) -> std::result::Result<TransitionModel, Failure> {
    let text = fs::read_to_string(path).map_err(|e| model_error(path, e))?;
    read_transition_model(&text).map_err(|e| model_error(path, e))
}

fn load_graph(path: &Path) -> std::result::Result<ArcScorerModel, Failure> {
    let text = fs::read_to_string(path).map_err(|e| model_error(path, e))?;
    read_arc_model(&text).map_err(|e| model_error(path, e))
}

/// Loads the arc scorer when beta < 1 requires one.
fn load_graph_for(
    path: Option<&Path>,
    beta: f64,
) -> std::result::Result<Option<ArcScorerModel>, Failure> {
    match path {
        Some(p) => load_graph(p).map(Some),
        None if beta == 1.0 => Ok(None),
        None => Err(Failure::new(
            EXIT_MODEL,
            format!("beta {beta} needs --model-graph"),
        )),
    }
}

fn write_file(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents)
        .map_err(|e| Failure::new(EXIT_RUNTIME, format!("cannot write {}: {e}", path.display())))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn emit(path: Option<&Path>, contents: &str) -> Outcome {
    match path {
        Some(p) => write_file(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn train_transition(a: &TrainTransitionArgs) -> Outcome {
    let pairs = training_pairs(&a.train)?;
    let config = TransitionTrainConfig {
        epochs: a.epochs,
        seed: a.seed,
        explore: a.explore,
        views: ViewConfig::with_count(a.views).expect("views validated by the parser"),
        ..TransitionTrainConfig::default()
    };
    let trained = train_transition_classifier(&pairs, &config)?;
    write_file(&a.model_transition, &write_transition_model(&trained.model))?;
    let log: String = trained
        .epoch_uas
        .iter()
        .enumerate()
        .map(|(e, u)| format!("{}\t{u:.4}\n", e + 1))
        .collect();
    write_file(&with_suffix(&a.model_transition, ".epochs"), &log)
}

fn train_graph(a: &TrainGraphArgs) -> Outcome {
    let pairs = training_pairs(&a.train)?;
    let config = CrfTrainConfig {
        epochs: a.epochs,
        seed: a.seed,
        ..CrfTrainConfig::default()
    };
    let trained = train_arc_scorer_crf(&pairs, &config)?;
    write_file(&a.model_graph, &write_arc_model(&trained.model))?;
    let log: String = trained
        .epoch_nll
        .iter()
        .enumerate()
        .map(|(e, v)| format!("{}\t{v:.6}\n", e + 1))
        .collect();
    write_file(&with_suffix(&a.model_graph, ".epochs"), &log)
}

fn run_parser(
    corpus: &[Sentence],
    transition: &Path,
    graph: Option<&Path>,
    beta: f64,
    temperature: f64,
    jobs: usize,
) -> std::result::Result<Vec<DepTree>, Failure> {
    let model = load_transition(transition)?;
    let scorer = load_graph_for(graph, beta)?;
    let config = IntegratorConfig {
        beta,
        temperature,
        max_steps: None,
    };
    Ok(parse_corpus(corpus, &model, scorer.as_ref(), &config, jobs)?)
}

fn parse(a: &ParseArgs) -> Outcome {
    let corpus = read_corpus(&a.test)?;
    let m = &a.models;
    let trees = run_parser(
        &corpus,
        &m.model_transition,
        m.model_graph.as_deref(),
        a.beta,
        m.temperature,
        m.jobs,
    )?;
    emit(a.output.as_deref(), &write_conll(&corpus, &trees)?)
}

fn eval(a: &EvalArgs) -> Outcome {
    let corpus = read_corpus(&a.test)?;
    let gold = gold_trees(&a.test, &corpus)?;
    let pred = match (&a.pred, &a.model_transition) {
        (Some(path), _) => {
            let parsed = read_corpus(path)?;
            gold_trees(path, &parsed)?
        }
        (None, Some(model)) => run_parser(
            &corpus,
            model,
            a.model_graph.as_deref(),
            a.beta,
            a.temperature,
            a.jobs,
        )?,
        (None, None) => {
            return Err(Failure::new(
                EXIT_USAGE,
                "eval needs --pred or --model-transition",
            ))
        }
    };
    let punct = match a.punct {
        PunctMode::Include => Punctuation::Include,
        PunctMode::Exclude => Punctuation::exclude_ptb(),
    };
    let report = evaluate(&corpus, &gold, &pred, &punct)?;
    match &a.output {
        Some(path) => {
            write_file(path, &report.to_string())?;
            write_file(&with_suffix(path, ".kv"), &report.to_key_values())
        }
        None => emit(None, &report.to_string()),
    }
}

fn sweep(a: &SweepArgs) -> Outcome {
    let corpus = read_corpus(&a.dev)?;
    gold_trees(&a.dev, &corpus)?;
    let m = &a.models;
    let betas = if a.betas.is_empty() {
        default_beta_grid()
    } else {
        a.betas.clone()
    };
    let model = load_transition(&m.model_transition)?;
    let needs_graph = betas.iter().any(|&b| b < 1.0);
    let scorer = load_graph_for(m.model_graph.as_deref(), if needs_graph { 0.0 } else { 1.0 })?;
    let result = sweep_beta(&corpus, &model, scorer.as_ref(), &betas, m.temperature, m.jobs)?;
    let best = format!("{}\n", result.best_beta);
    match &a.output {
        Some(path) => {
            write_file(path, &result.to_tsv())?;
            write_file(&with_suffix(path, ".best"), &best)?;
            print!("{best}");
            Ok(())
        }
        None => emit(None, &format!("{}best\t{best}", result.to_tsv())),
    }
}
