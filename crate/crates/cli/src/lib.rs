//! Library half of the `jbk` binary, so the commands can be driven from tests.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{Cli, CommandName, Format, RunConfig};
pub use error::{CliError, CliResult};
pub use output::{Document, Rendered};

/// Runs one command. Tables go to `<output>.*` when a prefix is set, otherwise to stdout.
pub fn execute(cli: &Cli) -> CliResult<Rendered> {
    let cfg = RunConfig::resolve(cli.command, &cli.opts)?;
    let out = commands::run(&cfg)?;
    match &cfg.output {
        Some(prefix) => output::write_files(prefix, &out)?,
        None => print!("{}", out.table),
    }
    if out.failures.is_empty() {
        Ok(out)
    } else {
        Err(CliError::Assertion(out.failures))
    }
}
