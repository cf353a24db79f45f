use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use scarchain_cli::config::{schema_json, OutputFormat};
use scarchain_cli::{execute, init_threads, CliError, CliResult, Experiment, ExperimentConfig, Mode};

/// Perfect state transfer through scarred spin chains.
///
/// Every default is listed in the config schema (`scarchain schema`).
/// Worker threads: SCARCHAIN_THREADS (default: all cores).
/// Exit codes: 0 ok, 2 config or I/O error, 3 check failure, 4 numerical failure.
#[derive(Parser, Debug)]
#[command(name = "scarchain", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment and write its result files.
    Run(RunArgs),
    /// Run an experiment and evaluate its acceptance criteria.
    Check(RunArgs),
    /// Print the JSON Schema of the config file.
    Schema {
        /// Write to a file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON config file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Use the built-in parameters of an experiment instead of a config file.
    #[arg(long, value_enum)]
    preset: Option<Experiment>,
    /// Overrides the chain and interaction seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: scarchain-out/<experiment>].
    #[arg(long)]
    output: Option<PathBuf>,
    /// Result formats [default: both].
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

fn load(args: &RunArgs) -> CliResult<ExperimentConfig> {
    let mut cfg = match (&args.config, args.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
            ExperimentConfig::from_json(&text)?
        }
        (None, Some(e)) => ExperimentConfig::preset(e),
        (None, None) => return Err(CliError::Config("either --config or --preset is required".into())),
    };
    if let Some(seed) = args.seed {
        cfg.override_seed(seed)?;
    }
    if let Some(dir) = &args.output {
        cfg.output_dir = Some(dir.clone());
    }
    if let Some(format) = args.format {
        cfg.format = format;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Schema { output } => {
            let text = schema_json() + "\n";
            match output {
                Some(path) => std::fs::write(&path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e)),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::Run(args) => {
            let rc = load(&args)?.resolve()?;
            init_threads()?;
            let outcome = execute(&rc, Mode::Run)?;
            println!("wrote {} files to {}", outcome.manifest.files.len() + 1, rc.output_dir.display());
            Ok(())
        }
        Command::Check(args) => {
            let rc = load(&args)?.resolve()?;
            init_threads()?;
            let outcome = execute(&rc, Mode::Check)?;
            let report = outcome.check.expect("check mode produces a report");
            for c in &report.criteria {
                println!("{} [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.name, c.detail);
            }
            match report.failures() {
                0 => Ok(()),
                n => Err(CliError::CheckFailed(n)),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
