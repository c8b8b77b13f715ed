use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;
use neuroarm_cli::commands::{cmd_collect, cmd_eval, cmd_replay, cmd_run, cmd_train};
use neuroarm_cli::{CliResult, HarnessConfig, RunDir};

#[derive(Parser)]
#[command(name = "neuroarm", version, about = "Synthetic EEG to prosthetic arm pipeline")]
struct Cli {
    /// TOML configuration file (defaults apply to missing keys).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the configured master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Run directory for artifacts.
    #[arg(long, global = true, default_value = "runs/latest")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Record one CSV of feature frames per action over UDP loopback.
    Collect,
    /// Train the transformer on a directory of action CSVs.
    Train {
        #[arg(long)]
        data: PathBuf,
    },
    /// Score a saved model on the held-out windows of a data directory.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Live scripted session driving the simulated arm.
    Run {
        #[arg(long)]
        model: PathBuf,
        /// Session length in seconds (overrides the config).
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Convert an actuator event log into data tables.
    Replay {
        #[arg(long)]
        log: PathBuf,
    },
    /// Print the default configuration.
    Config,
}

fn execute(cli: Cli) -> CliResult<()> {
    let mut cfg = match &cli.config {
        Some(p) => HarnessConfig::load(p)?,
        None => HarnessConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Command::Config = cli.command {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    let mut run = RunDir::create(&cli.out)?;
    match cli.command {
        Command::Collect => print!("{}", cmd_collect(&cfg, &mut run)?.dimensions()),
        Command::Train { data } => {
            let out = cmd_train(&cfg, &data, &mut run)?;
            let last = out.history.last().map_or(0.0, |h| h.val_accuracy);
            println!("final validation accuracy {last:.4}");
            println!("{}", out.report.to_table());
            println!("model written to {}", out.model_path.display());
        }
        Command::Eval { model, data } => {
            let report = cmd_eval(&cfg, &model, &data, &mut run)?;
            println!("{}\n{}", report.to_table(), report.confusion_table());
        }
        Command::Run { model, duration } => {
            if let Some(d) = duration {
                cfg.run.duration_s = d;
                cfg.validate()?;
            }
            print!("{}", cmd_run(&cfg, &model, &mut run)?.summary.to_text());
        }
        Command::Replay { log } => {
            println!("{}", serde_json::to_string_pretty(&cmd_replay(&cfg, &log, &mut run)?)?);
        }
        Command::Config => unreachable!(),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
