use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gaitkit::config::ToolkitConfig;
use gaitkit::run::{cmd_all, cmd_analyze, cmd_classify, cmd_stats, cmd_synth, RunOptions, RunSummary};
use gaitkit::Error;

/// IMU gait assessment: synthetic trials, attitude fusion, gait events,
/// features, group statistics and classification.
#[derive(Debug, Parser)]
#[command(name = "gaitkit", version)]
struct Cli {
    /// TOML configuration; missing keys take their defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[arg(long, global = true, value_name = "DIR", default_value = "gaitkit-out")]
    out_dir: PathBuf,

    /// Overrides `seed` from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for per-trial work [default: available cores].
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Also write wall-clock stage timings to timings.json.
    #[arg(long, global = true)]
    timings: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the synthetic population with ground truth.
    Synth,
    /// Attitude, gait events and features for trial CSV files or directories.
    Analyze {
        #[arg(required = true, value_name = "TRIAL")]
        inputs: Vec<PathBuf>,
    },
    /// Group comparisons and radar data from a feature table.
    Stats {
        #[arg(value_name = "FEATURES_CSV")]
        features: PathBuf,
    },
    /// Feature ranking and cross-validated classification from a feature table.
    Classify {
        #[arg(value_name = "FEATURES_CSV")]
        features: PathBuf,
    },
    /// Synthetic population through every stage.
    All,
    /// Print the default configuration as TOML.
    Config,
}

fn options(cli: &Cli) -> Result<RunOptions, Error> {
    let mut config = match &cli.config {
        Some(path) => ToolkitConfig::load(path)?,
        None => ToolkitConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    config.validate()?;
    let jobs = cli.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    Ok(RunOptions { config, config_path: cli.config.clone(), out_dir: cli.out_dir.clone(), jobs, timings: cli.timings })
}

fn run(cli: &Cli) -> Result<Option<RunSummary>, Error> {
    if let Command::Config = cli.command {
        print!("{}", ToolkitConfig::default().to_toml());
        return Ok(None);
    }
    let opts = options(cli)?;
    let summary = match &cli.command {
        Command::Synth => cmd_synth(opts),
        Command::Analyze { inputs } => cmd_analyze(opts, inputs),
        Command::Stats { features } => cmd_stats(opts, features),
        Command::Classify { features } => cmd_classify(opts, features),
        Command::All => cmd_all(opts),
        Command::Config => unreachable!("handled above"),
    }?;
    Ok(Some(summary))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(s)) => {
            let m = &s.manifest;
            println!("run {} ({}): {} files in {}", m.run_id, m.command, m.outputs.len() + 1, cli.out_dir.display());
            for r in &s.classification {
                println!(
                    "  {:<11} {:<13} accuracy {:.3}  precision {:.3}  f1 {:.3}",
                    r.task.as_str(),
                    r.classifier.as_str(),
                    r.aggregate.accuracy,
                    r.aggregate.precision,
                    r.aggregate.f1
                );
            }
            if cli.timings {
                for t in &s.timings {
                    eprintln!("  {:<9} {:.2} s", t.stage, t.seconds);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("gaitkit: {e}");
            // bad configuration or inputs are usage errors, like unknown flags
            let usage = matches!(e, Error::Config(_) | Error::Toml(_));
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
