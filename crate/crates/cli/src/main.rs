use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser};
use spgs_cli::config::{self, apply_override, parse_entries, ConfigError, Entries, RunConfig};
use spgs_cli::CliError;

/// Ground states of the Schrödinger–Poisson system on a 3-D grid.
///
/// Values come from the configuration file, then --set overrides, then the
/// dedicated flags, with later sources winning.
#[derive(Debug, Parser)]
#[command(name = "spgs", version)]
struct Args {
    /// Configuration file of `section.key = value` lines.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// solve | sweep-lambda | compare-vinf | validate | radial-crosscheck
    #[arg(long, value_name = "M")]
    mode: Option<String>,
    /// Concurrent runs in sweep-lambda.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Seed for every random draw.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Parent directory of the run directory.
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
    /// Override one key, e.g. --set solver.p=3.5 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn load(args: &Args) -> Result<RunConfig, CliError> {
    let mut entries: Entries = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
                key: None,
                line: None,
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            parse_entries(&text)?
        }
        None => Entries::new(),
    };
    for assignment in &args.set {
        apply_override(&mut entries, assignment)?;
    }
    let flags = [
        ("run.mode", args.mode.clone()),
        ("run.jobs", args.jobs.map(|j| j.to_string())),
        ("solver.seed", args.seed.map(|s| s.to_string())),
        (
            "run.output_dir",
            args.output.as_ref().map(|p| p.display().to_string()),
        ),
    ];
    for (key, value) in flags {
        if let Some(value) = value {
            apply_override(&mut entries, &format!("{key}={value}"))?;
        }
    }
    Ok(RunConfig::from_entries(&entries)?)
}

fn main() -> ExitCode {
    let command = Args::command().after_long_help(config::key_help());
    let args = match command
        .try_get_matches()
        .and_then(|m| Args::from_arg_matches(&m))
    {
        Ok(args) => args,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            let err = CliError::Config(ConfigError {
                key: None,
                line: None,
                message: message
                    .lines()
                    .next()
                    .unwrap_or("invalid arguments")
                    .to_string(),
            });
            eprintln!("{message}");
            eprintln!("{}", err.machine_line());
            return ExitCode::from(2);
        }
    };

    let result = load(&args).and_then(|cfg| spgs_cli::run(&cfg));
    match result {
        Ok(report) => {
            println!("run_dir={}", report.dir.display());
            for line in report.lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.machine_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
