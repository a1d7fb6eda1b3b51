//! `multibias` command-line driver. Every subcommand reads one JSON config
//! document and writes its files into `--out`.
//!
//! Exit codes: 0 success, 1 config error, 2 data error, 3 run failure
//! (partial results are written first when a study has any).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::LevelFilter;
use multibias::harness::{commands, StudyConfig, StudyReport};
use multibias::Error;

#[derive(Parser, Debug)]
#[command(name = "multibias", version, about = "Multifactorial bias experiments on rating data")]
struct Cli {
    /// Config document (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for the split, the model and the rerankers.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true, default_value = "info")]
    log_level: LevelFilter,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load, filter and re-index the dataset.
    Ingest,
    /// Popularity, positivity and multifactorial bias diagnostics.
    Diagnose,
    /// Split and write the transformed training data.
    Transform,
    /// Positivity-flip sweep over β.
    Simulate,
    /// Train (or grid-search) the pipeline's model.
    Train,
    /// Top-N lists from a trained model.
    Recommend {
        /// Checkpoint written by `train`; defaults to `<out>/model.json`.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Rerank initial lists with the pipeline's reranker.
    Rerank {
        /// Lists written by `recommend`; defaults to `<out>/recommendations.txt`.
        #[arg(long)]
        initial: Option<PathBuf>,
    },
    /// Score a list file against the test split.
    Evaluate {
        /// Lists to evaluate; defaults to `<out>/reranked.txt`.
        #[arg(long)]
        recs: Option<PathBuf>,
    },
    /// Run every study the config declares.
    Study,
}

const CONFIG_ERROR: u8 = 1;
const DATA_ERROR: u8 = 2;
const RUN_FAILURE: u8 = 3;

fn exit_code(error: &Error) -> u8 {
    match error {
        Error::Config(_) | Error::Json(_) => CONFIG_ERROR,
        Error::Io { .. }
        | Error::Parse { .. }
        | Error::DuplicateRating { .. }
        | Error::Empty(_)
        | Error::OverFiltered { .. }
        | Error::Csv(_) => DATA_ERROR,
        Error::InvalidArgument(_) | Error::NonFiniteLoss { .. } | Error::Undefined(_) => RUN_FAILURE,
    }
}

fn load_config(cli: &Cli) -> Result<StudyConfig, Error> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut config = StudyConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.override_seed(seed);
    }
    Ok(config)
}

fn or_default(given: &Option<PathBuf>, out: &Path, name: &str) -> PathBuf {
    given.clone().unwrap_or_else(|| out.join(name))
}

fn report_outcome(report: &StudyReport) -> u8 {
    for failure in &report.failures {
        log::error!("{failure}");
    }
    if report.complete {
        0
    } else {
        RUN_FAILURE
    }
}

fn run(cli: &Cli, config: &StudyConfig) -> Result<u8, Error> {
    let out = cli.out.as_path();
    let written: Vec<PathBuf> = match &cli.command {
        Command::Ingest => commands::ingest(config, out)?,
        Command::Diagnose => commands::diagnose(config, out)?,
        Command::Transform => commands::transform(config, out)?,
        Command::Simulate => return Ok(report_outcome(&commands::simulate(config, out)?)),
        Command::Study => return Ok(report_outcome(&commands::study(config, out)?)),
        Command::Train => vec![commands::train(config, out)?],
        Command::Recommend { model } => {
            vec![commands::recommend(config, out, &or_default(model, out, "model.json"))?]
        }
        Command::Rerank { initial } => {
            commands::rerank(config, out, &or_default(initial, out, "recommendations.txt"))?
        }
        Command::Evaluate { recs } => {
            let report = commands::evaluate(config, out, &or_default(recs, out, "reranked.txt"))?;
            for (name, value) in report.values() {
                println!("{name}\t{value}");
            }
            vec![out.join("results.csv"), out.join("report.json")]
        }
    };
    for path in written {
        log::info!("wrote {}", path.display());
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(cli.log_level)
        .format_timestamp(None)
        .init();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
        log::error!("thread pool: {e}");
        return ExitCode::from(RUN_FAILURE);
    }
    let config = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            log::error!("{e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    match run(&cli, &config) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
