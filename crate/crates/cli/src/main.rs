//! `quizcal <calibrate|train|predict|evaluate|ablate|gen-synth> --config <path> [--out <dir>]`

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quizcal_core::pipeline::{
    cmd_ablate, cmd_calibrate, cmd_evaluate, cmd_gen_synth, cmd_predict, cmd_train, LoadedConfig, PipelineError,
};

#[derive(Debug, Parser)]
#[command(name = "quizcal", version, about = "Estimate question difficulty and discrimination from text")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// JSON run configuration; relative paths inside resolve against its directory.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Calibrate item traits from the answer log only.
    Calibrate(RunArgs),
    /// Calibrate items, tune and fit the text regressors, write a bundle.
    Train(RunArgs),
    /// Estimate traits for new questions with a trained bundle.
    Predict(RunArgs),
    /// Write latent-trait and answer-prediction reports for a bundle.
    Evaluate(RunArgs),
    /// Compare feature-group subsets.
    Ablate(RunArgs),
    /// Generate a synthetic question bank and answer log.
    GenSynth(RunArgs),
}

fn run(command: &Command) -> Result<(), PipelineError> {
    let (Command::Calibrate(args)
    | Command::Train(args)
    | Command::Predict(args)
    | Command::Evaluate(args)
    | Command::Ablate(args)
    | Command::GenSynth(args)) = command;
    let cfg = LoadedConfig::load(&args.config)?;
    let out = cfg.output_dir(args.out.as_deref())?;
    let out: &Path = &out;
    match command {
        Command::Calibrate(_) => cmd_calibrate(&cfg, out).map(drop),
        Command::Train(_) => cmd_train(&cfg, out).map(drop),
        Command::Predict(_) => cmd_predict(&cfg, out).map(drop),
        Command::Evaluate(_) => cmd_evaluate(&cfg, out).map(drop),
        Command::Ablate(_) => cmd_ablate(&cfg, out).map(drop),
        Command::GenSynth(_) => cmd_gen_synth(&cfg, out),
    }
}

fn one_line(message: &str) -> String {
    message.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("off")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            eprintln!("UsageError: {}", one_line(first.trim_start_matches("error:")));
            return ExitCode::from(1);
        }
    };
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let class = e.class();
            eprintln!("{}: {}", class.kind, one_line(&e.to_string()));
            ExitCode::from(class.exit_code as u8)
        }
    }
}
