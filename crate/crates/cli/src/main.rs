use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use omega_cli::args::Cli;
use omega_cli::config::ScenarioConfig;
use omega_cli::error::{CliError, CliResult};
use omega_cli::{emit, run_scenario};

fn init_logging() {
    env_logger::Builder::new()
        .parse_filters(&std::env::var("OMEGA_LOG").unwrap_or_else(|_| "error".into()))
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .init();
}

fn run(cli: Cli) -> CliResult<()> {
    let (task, args) = cli.command.split();
    let cfg = ScenarioConfig::from_args(task, &args)?;
    let report = run_scenario(&cfg)?;
    emit(&cfg, &report)
}

fn fail(err: &CliError) -> ExitCode {
    eprintln!("{}", err.diagnostic());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    init_logging();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("invalid arguments");
            let first = first.trim_start_matches("error: ").to_string();
            return fail(&CliError::Config(first));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
