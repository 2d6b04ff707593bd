use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use streamrisk_cli::commands::{self, Output};
use streamrisk_cli::config::{resolve, Overrides};
use streamrisk_cli::CliError;

#[derive(Parser)]
#[command(name = "streamrisk", version, about = "Streaming quantile and superquantile experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, created if absent.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Replaces the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for replicates.
    #[arg(long, global = true, env = "STREAMRISK_THREADS", value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,

    /// Distribution as `kind:params`, e.g. `pareto:1,3`.
    #[arg(long, global = true)]
    dist: Option<String>,

    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Closed-form and quadrature risk quantities side by side.
    Oracle,
    /// Limiting variances, error constants and the variant verdict.
    Asymptotics,
    /// MSE curves and fitted log-log rates.
    Rates,
    /// Empirical joint CLT covariance.
    Clt,
    /// Paired MSE ratios between superquantile variants.
    Compare,
}

impl Command {
    fn needs_config(self) -> bool {
        matches!(self, Command::Rates | Command::Clt | Command::Compare)
    }
}

fn execute(cli: &Cli) -> Result<Output, CliError> {
    let text = match &cli.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
            CliError::usage(format!("cannot read config {}: {e}", path.display()))
        })?),
        None if cli.command.needs_config() => return Err(CliError::usage("--config is required")),
        None => None,
    };
    let overrides = Overrides {
        dist: cli.dist.clone(),
        alpha: cli.alpha,
        seed: cli.seed,
    };
    let config = resolve(text.as_deref(), &overrides)?;
    let threads = cli.threads.map(|t| t as usize);
    match cli.command {
        Command::Oracle => commands::oracle(&config),
        Command::Asymptotics => commands::asymptotics(&config),
        Command::Rates => commands::rates(&config, threads),
        Command::Clt => commands::clt(&config, threads),
        Command::Compare => commands::compare(&config, threads),
    }
}

fn write_files(out: &std::path::Path, output: &Output) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", out.display())))?;
    for (name, contents) in &output.files {
        let path = out.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli).and_then(|o| write_files(&cli.out, &o).map(|_| o)) {
        Ok(output) => {
            print!("{}", output.stdout);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
