mod artifacts;
mod commands;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pathrex::config::RunConfig;
use pathrex::Error;

/// Relation extraction from direct sentences and two-hop relation paths.
#[derive(Debug, Parser)]
#[command(name = "pathrex", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command. Later sources win: defaults, then
/// `--config`, then `--set`, then the dedicated flags.
#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Align triples with sentences, add negatives, and split by fact.
    BuildCorpus {
        /// TSV `head<TAB>relation<TAB>tail`.
        #[arg(long)]
        triples: PathBuf,
        /// JSON Lines sentences with head/tail mentions.
        #[arg(long)]
        sentences: PathBuf,
        /// Negatives per KB triple.
        #[arg(long)]
        ratio: Option<f64>,
    },
    /// Extract two-hop paths for every split of a corpus.
    ExtractPaths {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Train a model on the training split.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        /// Weight of the path score; 0 trains the text-only baseline.
        #[arg(long)]
        beta: Option<f64>,
        /// Directory written by `extract-paths`; paths are computed when absent.
        #[arg(long)]
        paths: Option<PathBuf>,
    },
    /// Held-out evaluation of a trained model.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        /// Directory written by `train`.
        #[arg(long)]
        model: PathBuf,
        /// Labeled sentences to evaluate instead of the corpus test split.
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        paths: Option<PathBuf>,
        /// Restrict the ranking to these relation names (comma separated).
        #[arg(long, value_delimiter = ',')]
        relations: Vec<String>,
    },
    /// Write long-tail and noise-level slices of the test split.
    Slice {
        #[arg(long)]
        corpus: PathBuf,
        /// Sentence-count thresholds.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        longtail: Vec<usize>,
        /// NA sentence fractions.
        #[arg(long, value_delimiter = ',', default_value = "0.75,0.85,0.95")]
        noise: Vec<f64>,
    },
    /// Logistic probe on concatenated hop sentence vectors.
    ZeroShot {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Finite-difference check of the full model on a tiny world.
    GradCheck {
        /// Number of random initializations.
        #[arg(long, default_value_t = 3)]
        runs: u64,
    },
    /// Write the synthetic compositional corpus, optionally running the benchmark.
    Synth {
        #[arg(long)]
        bench: bool,
    },
}

fn exit_code(e: &Error) -> u8 {
    if e.is_io() {
        2
    } else if e.is_numeric() {
        3
    } else {
        1
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PATHREX_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli.common, cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(commands::Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(commands::Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(3)
        }
    }
}

/// Effective configuration. `fallback` is read when no `--config` is given,
/// so evaluation reuses the settings a model was trained with.
pub fn effective_config(common: &Common, fallback: Option<&Path>, extra: &[String]) -> pathrex::Result<RunConfig> {
    let mut cfg = match (&common.config, fallback) {
        (Some(p), _) => RunConfig::load(p)?,
        (None, Some(p)) if p.exists() => RunConfig::load(p)?,
        _ => RunConfig::default(),
    };
    let mut overrides = common.set.clone();
    if let Some(s) = common.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(t) = common.threads {
        overrides.push(format!("threads={t}"));
    }
    overrides.extend(extra.iter().cloned());
    cfg.apply_overrides(&overrides)?;
    Ok(cfg)
}
