mod commands;
mod config;
mod lock;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use execrep::dataset::StageId;
use execrep::LanguageId;
use serde::Serialize;

use commands::{BuildArgs, EvalArgs, ExtractArgs, Mode, Repr, TaskSource, TranslateArgs};
use config::CliConfig;

/// Failure classes with stable exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments, config or input files (exit 2).
    #[error("{0}")]
    Input(String),
    /// Everything else: I/O, toolchains, network (exit 1).
    #[error("{0}")]
    Operational(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Operational(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "execrep", version, about = "Graph-text encodings, instruction datasets and translation evaluation")]
struct Cli {
    /// TOML configuration file; `${VAR}` is replaced from the environment.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (overrides `jobs` in the config).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the AST or data-flow graph text of a source file.
    Extract {
        file: PathBuf,
        #[arg(long, value_enum)]
        repr: Repr,
        /// Language; inferred from the extension when omitted.
        #[arg(long)]
        lang: Option<LanguageId>,
        /// Leave literal occurrences out of the data-flow graph.
        #[arg(long)]
        no_literals: bool,
        /// Keep data-flow nodes without edges.
        #[arg(long)]
        keep_isolated: bool,
    },
    /// Ingest parallel pairs, deduplicate and write the stage files.
    BuildDataset {
        /// Tab-separated `pair_id src tgt [nl]` rows.
        #[arg(long)]
        manifest: PathBuf,
        /// Base directory of the manifest paths (default: the manifest's directory).
        #[arg(long)]
        root: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated subset of code,fs,ss,vd.
        #[arg(long, value_delimiter = ',')]
        stages: Vec<StageId>,
        #[arg(long)]
        no_dedup: bool,
        #[arg(long)]
        dedup_threshold: Option<f64>,
    },
    /// Ask a model endpoint for translations and write a solutions file.
    Translate {
        /// JSON-lines tasks `{sample_id, src_lang, tgt_lang, source}`.
        #[arg(long, conflicts_with = "bench", required_unless_present = "bench")]
        input: Option<PathBuf>,
        /// Benchmark root; sources are the reference functions of `--from`.
        #[arg(long, requires_all = ["from", "to"])]
        bench: Option<PathBuf>,
        #[arg(long)]
        from: Option<LanguageId>,
        #[arg(long)]
        to: Option<LanguageId>,
        #[arg(long)]
        out: PathBuf,
        /// Keep existing records and skip their samples.
        #[arg(long)]
        resume: bool,
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long)]
        model: Option<String>,
    },
    /// Score a solutions file by execution, by text match, or both.
    Eval {
        #[arg(long)]
        bench: PathBuf,
        #[arg(long)]
        solutions: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        mode: Mode,
        /// Report file (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Operational(e.to_string()))?;
    match out {
        Some(p) => {
            let _lock = lock::OutputLock::for_file(p)?;
            std::fs::write(p, text + "\n").map_err(|e| CliError::Operational(format!("{}: {e}", p.display())))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = CliConfig::load(cli.config.as_deref())?;
    if cli.jobs == Some(0) {
        return Err(CliError::Input("--jobs must be at least 1".into()));
    }
    let jobs = cli
        .jobs
        .or(cfg.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    // Only fails if a pool already exists, which is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();

    match cli.command {
        Command::Extract { file, repr, lang, no_literals, keep_isolated } => {
            let text = commands::extract(&ExtractArgs { file, lang, repr, literals: !no_literals, keep_isolated })?;
            print!("{text}");
            Ok(())
        }
        Command::BuildDataset { manifest, root, out, stages, no_dedup, dedup_threshold } => {
            let summary = commands::build(
                &BuildArgs { manifest, root, out, stages, dedup: !no_dedup, threshold: dedup_threshold },
                &cfg,
            )?;
            emit(&summary, None)
        }
        Command::Translate { input, bench, from, to, out, resume, endpoint, model } => {
            if let Some(e) = endpoint {
                cfg.gateway.endpoint = e;
            }
            if let Some(m) = model {
                cfg.gateway.model = m;
            }
            let source = match (input, bench, from, to) {
                (Some(p), _, _, _) => TaskSource::File(p),
                (None, Some(root), Some(from), Some(to)) => TaskSource::Bench { root, from, to },
                _ => return Err(CliError::Input("give --input, or --bench with --from and --to".into())),
            };
            let summary = commands::translate(&TranslateArgs { source, out, resume }, &cfg)?;
            emit(&summary, None)
        }
        Command::Eval { bench, solutions, mode, out } => {
            let report = commands::eval(&EvalArgs { bench, solutions, mode }, &cfg, jobs)?;
            emit(&report, out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = if cli.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
