//! Thin command-line front end; all logic lives in the library.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use thermoshift::commands::{
    self, cmd_check, cmd_deviation, cmd_solve, cmd_sweep, report_error, EXIT_USAGE,
};
use thermoshift::config::RunConfig;
use thermoshift::sweep::EmitFormat;

#[derive(Parser)]
#[command(
    name = "thermoshift",
    about = "Thermodynamic formalism and zero-temperature large deviations on Markov shifts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's output_dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for sweep records; overrides the config's format.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Suppress progress lines.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the instance against the standing structural hypotheses.
    Check,
    /// Solve the RPF eigenproblem on the beta grid and the max-plus problem.
    Solve,
    /// Deviation-function report over the configured cylinders.
    Deviation,
    /// Full beta sweep with audits and limit extrapolations.
    Sweep,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            if e.use_stderr() {
                eprintln!("{e}");
                std::process::exit(EXIT_USAGE);
            }
            print!("{e}");
            std::process::exit(commands::EXIT_SUCCESS);
        }
    };
    let Some(config_path) = cli.config.as_deref() else {
        eprintln!(r#"{{"error":"--config PATH is required","exit_code":1}}"#);
        std::process::exit(EXIT_USAGE);
    };
    let config = match RunConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => std::process::exit(report_error(&e)),
    };
    let out_dir = cli.out.clone().unwrap_or_else(|| config.output_dir.clone());
    let format: EmitFormat = match cli
        .format
        .as_deref()
        .unwrap_or(&config.format)
        .parse()
    {
        Ok(f) => f,
        Err(e) => std::process::exit(report_error(&e)),
    };
    let result = match cli.command {
        Command::Check => cmd_check(&config, &out_dir, cli.quiet),
        Command::Solve => cmd_solve(&config, &out_dir, cli.quiet),
        Command::Deviation => cmd_deviation(&config, &out_dir, cli.quiet),
        Command::Sweep => cmd_sweep(&config, &out_dir, format, cli.quiet),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(e) => std::process::exit(report_error(&e)),
    }
}
