use std::path::PathBuf;
use std::process::ExitCode;

use amsa_cli::{run_cli, Command, Invocation};
use clap::{Args, Parser, Subcommand};

/// Adaptive multi-strategy market-making experiments.
#[derive(Parser)]
#[command(name = "amsa", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Run every cell of the experiment matrix and write results.
    Run(Opts),
    /// Write the synthetic markets of the config as dataset directories.
    Datagen(Opts),
    /// Check one dataset directory, or every dataset directly below it.
    Validate(Opts),
    /// Merge results.csv files from previous runs into one table.
    Report(Opts),
}

#[derive(Args)]
struct Opts {
    /// Experiment file (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root for dataset directories (run, validate) or run outputs (report).
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `experiment.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// More logging; repeat for debug output.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = match cli.command {
        Sub::Run(o) => (Command::Run, o),
        Sub::Datagen(o) => (Command::Datagen, o),
        Sub::Validate(o) => (Command::Validate, o),
        Sub::Report(o) => (Command::Report, o),
    };
    let level = match opts.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    let inv = Invocation {
        command,
        config: opts.config,
        data_dir: opts.data_dir,
        out: opts.out,
        seed: opts.seed,
    };
    match run_cli(&inv, &mut std::io::stdout().lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error: {}: {message}", e.kind());
            ExitCode::FAILURE
        }
    }
}
