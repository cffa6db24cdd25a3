mod commands;
mod inputs;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use proofslice::cti::CtiMode;
use tracing_subscriber::EnvFilter;

use manifest::RunManifest;

pub const EXIT_INPUT: u8 = 1;
pub const EXIT_RESOURCE: u8 = 2;
pub const EXIT_PARTIAL: u8 = 3;
pub const EXIT_INVALID: u8 = 4;

/// Errors that end a run, split by exit code.
#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    Resource(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Resource(_) => EXIT_RESOURCE,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Input(e.into())
    }
}

#[derive(Parser, Debug)]
#[command(name = "proofslice", version, about = "Infer inductive invariants by building inductive proof graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for cached reachable-state sets.
    #[arg(long, global = true, default_value = ".proofslice-cache")]
    cache_dir: PathBuf,
    /// Neither read nor write the state cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Worker threads (default: one per core). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Where to write the run manifest.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// More log output (-v debug, -vv trace). RUST_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Only warnings and errors on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Explore and cache the reachable states of an instance.
    Reach(commands::ReachArgs),
    /// Build an inductive proof graph for a safety lemma.
    Infer(commands::InferArgs),
    /// Print the variable slice of every (lemma, action) pair.
    Slice(commands::SliceArgs),
    /// Re-verify every obligation of a saved proof graph.
    Check(commands::CheckArgs),
    /// Render a saved proof graph as Graphviz DOT.
    ExportDot(commands::ExportDotArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CtiModeArg {
    Auto,
    Exhaustive,
    Randomized,
}

impl From<CtiModeArg> for CtiMode {
    fn from(m: CtiModeArg) -> CtiMode {
        match m {
            CtiModeArg::Auto => CtiMode::Auto,
            CtiModeArg::Exhaustive => CtiMode::Exhaustive,
            CtiModeArg::Randomized => CtiMode::Randomized,
        }
    }
}

/// How reachable states are obtained.
#[derive(Args, Debug, Clone)]
pub struct ExploreArgs {
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub mode: ModeArg,
    /// Distinct states to collect in sampled mode.
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: u64,
    /// Give up exhaustive exploration beyond this many states.
    #[arg(long, default_value_t = 50_000_000)]
    pub max_states: u64,
}

/// Counterexample search settings shared by `infer` and `check`.
#[derive(Args, Debug, Clone)]
pub struct CtiArgs {
    /// Counterexamples kept per obligation.
    #[arg(long, default_value_t = 10_000)]
    pub nctis: usize,
    #[arg(long, value_enum, default_value = "auto")]
    pub cti_mode: CtiModeArg,
    /// Largest pre-state and binding count searched exhaustively.
    #[arg(long, default_value_t = 30_000_000)]
    pub cti_exhaustive_limit: u64,
    /// Pre-states drawn by a randomized search.
    #[arg(long, default_value_t = 1_000_000)]
    pub cti_samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn init_logging(verbose: u8, quiet: bool) {
    let level = match (quiet, verbose) {
        (true, _) => "warn",
        (false, 0) => "info",
        (false, 1) => "debug",
        _ => "trace",
    };
    let filter = EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(level));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .with_target(false)
        .with_ansi(std::io::IsTerminal::is_terminal(&std::io::stderr()))
        .init();
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose, cli.quiet);
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    let start = Instant::now();
    let ctx = commands::Context {
        cache_dir: (!cli.no_cache).then(|| cli.cache_dir.clone()),
        manifest: cli.manifest.clone(),
    };
    let name = match &cli.command {
        Command::Reach(_) => "reach",
        Command::Infer(_) => "infer",
        Command::Slice(_) => "slice",
        Command::Check(_) => "check",
        Command::ExportDot(_) => "export-dot",
    };
    let mut manifest = RunManifest::new(name);
    let result = match &cli.command {
        Command::Reach(a) => commands::reach(&ctx, a, &mut manifest),
        Command::Infer(a) => commands::infer(&ctx, a, &mut manifest),
        Command::Slice(a) => commands::slice(&ctx, a, &mut manifest),
        Command::Check(a) => commands::check(&ctx, a, &mut manifest),
        Command::ExportDot(a) => commands::export_dot(&ctx, a, &mut manifest),
    };
    let code = match result {
        Ok(code) => code,
        Err(f) => {
            let code = f.code();
            let (Failure::Input(e) | Failure::Resource(e)) = &f;
            eprintln!("error: {e:#}");
            manifest.outcome = serde_json::json!({ "error": format!("{e:#}") });
            code
        }
    };
    manifest.finish(start.elapsed(), code);
    if let Some(path) = ctx.manifest.clone().or_else(|| manifest.default_path.clone()) {
        match manifest.write(&path) {
            Ok(()) => eprintln!("manifest: {}", path.display()),
            Err(e) => eprintln!("warning: {e:#}"),
        }
    }
    ExitCode::from(code)
}
