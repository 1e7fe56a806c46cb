//! Command-line front end. `main_with` does everything except the actual
//! process exit, so it can be exercised in-process.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;

use crate::config::{load_config, ConfigValues};
use crate::error::{ConfigError, RunError};
use crate::output::render_json;
use crate::run::{run, RunOutput};

/// Flags override values read from `--config`.
#[derive(Debug, Parser)]
#[command(name = "branchmax", version, about, allow_negative_numbers = true)]
pub struct Cli {
    /// Flat JSON configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Exit with status 4 when any check fails
    #[arg(long)]
    pub assert: bool,
    #[command(flatten)]
    pub values: ConfigValues,
}

impl Cli {
    pub fn execute(&self) -> Result<RunOutput, RunError> {
        let cfg = load_config(self.config.as_deref(), &self.values)?;
        run(&cfg, self.assert)
    }
}

/// What the process prints and its exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

/// Exit codes: 0 success, 2 configuration error, 3 runtime error,
/// 4 failed check under `--assert`. Success prints the JSON summary;
/// failure prints an error JSON.
pub fn main_with<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return Invocation {
                code: 0,
                stdout: e.render().to_string(),
                stderr: String::new(),
            };
        }
        Err(e) => return failure(RunError::Config(ConfigError::Usage(e.to_string().trim().to_owned()))),
    };
    match cli.execute() {
        Ok(out) => Invocation {
            code: 0,
            stdout: render_json(&out.summary),
            stderr: String::new(),
        },
        Err(e) => failure(e),
    }
}

fn failure(e: RunError) -> Invocation {
    Invocation {
        code: e.exit_code() as u8,
        stdout: render_json(&e.to_json()),
        stderr: format!("branchmax: {e}\n"),
    }
}
