//! Command-line front end: scenario parsing, task drivers and report writers.

pub mod args;
pub mod config;
pub mod error;
pub mod report;
pub mod tasks;

use std::io::Write;

use args::Format;
use config::ScenarioConfig;
use error::{CliError, CliResult};
use serde_json::Value;

pub use tasks::run_scenario;

pub fn render(report: &Value, format: Format) -> String {
    match format {
        Format::Json => report::to_json(report),
        Format::Tsv => report::to_tsv(report),
    }
}

/// Write the rendered report to the configured path, or to standard output.
pub fn emit(cfg: &ScenarioConfig, report: &Value) -> CliResult<()> {
    let text = render(report, cfg.output.format);
    match &cfg.output.path {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}
