use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use brwlab::config::ExperimentConfig;
use brwlab::driver::{run_formulas, run_limit_sample, run_simulate, Representation};
use brwlab::verify::{run_all, VerifyContext};
use brwlab::{exit_code_for, exit_codes};
use brwlab_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "brwlab",
    version,
    about = "Branching random walk laboratory: simulate heavy-tailed branching random walks, \
             sample the limiting cluster process, evaluate its closed-form laws, and verify \
             that they agree"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Path to a JSON experiment configuration; defaults are used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured thread count (0 = one per core).
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate branching random walk replicates and write summary CSVs.
    Simulate(RunArgs),
    /// Draw from the limiting point process samplers.
    LimitSample {
        #[command(flatten)]
        args: RunArgs,
        /// Which representation to sample: cox, sscdppp, or both.
        #[arg(long, default_value = "both")]
        representation: String,
    },
    /// Evaluate the closed-form limit laws into a CSV table.
    Formulas(RunArgs),
    /// Run the acceptance suite and report per-criterion pass/fail.
    Verify(RunArgs),
    /// Configuration helpers.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
}

#[derive(Subcommand)]
enum ConfigAction {
    /// Print the embedded default configuration as JSON.
    PrintDefaults,
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::config(format!("cannot read config {}: {e}", path.display()))
            })?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(threads) = args.threads {
        cfg.threads = threads;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.display().to_string();
    }
    Ok(cfg)
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(args) => {
            let cfg = load_config(&args)?;
            let outputs = run_simulate(&cfg.validate()?)?;
            println!("wrote {} file(s); manifest: {}", outputs.files.len(), outputs.manifest.display());
            Ok(exit_codes::SUCCESS)
        }
        Command::LimitSample { args, representation } => {
            let cfg = load_config(&args)?;
            let repr = match representation.as_str() {
                "cox" => Representation::Cox,
                "sscdppp" => Representation::Sscdppp,
                "both" => Representation::Both,
                other => {
                    return Err(Error::config(format!(
                        "unknown representation '{other}' (expected cox, sscdppp, or both)"
                    )))
                }
            };
            let outputs = run_limit_sample(&cfg.validate()?, repr)?;
            println!("wrote {} file(s); manifest: {}", outputs.files.len(), outputs.manifest.display());
            Ok(exit_codes::SUCCESS)
        }
        Command::Formulas(args) => {
            let cfg = load_config(&args)?;
            let outputs = run_formulas(&cfg.validate()?)?;
            println!("wrote {}; manifest: {}", outputs.files[0].display(), outputs.manifest.display());
            Ok(exit_codes::SUCCESS)
        }
        Command::Verify(args) => {
            let cfg = load_config(&args)?;
            cfg.validate()?;
            let ctx = VerifyContext {
                master_seed: cfg.master_seed,
                threads: cfg.threads,
                out_dir: Some(PathBuf::from(&cfg.out_dir)),
                config_hash: Some(cfg.content_hash()),
            };
            let outcomes = run_all(&ctx)?;
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            if failed == 0 {
                println!("all {} criteria passed", outcomes.len());
                Ok(exit_codes::SUCCESS)
            } else {
                println!("{failed} criterion(s) failed");
                Ok(exit_codes::CRITERION_FAILURE)
            }
        }
        Command::Config { action } => match action {
            ConfigAction::PrintDefaults => {
                println!("{}", ExperimentConfig::default().to_json_pretty());
                Ok(exit_codes::SUCCESS)
            }
        },
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err) as u8)
        }
    }
}
