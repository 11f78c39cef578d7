//! The `cooldecomp` command-line tool.
//!
//! Every command computes its artifacts in memory first and only then writes
//! them, so a failing run leaves no files behind.

pub mod chart;
pub mod commands;
pub mod config;
pub mod output;
pub mod table;

use std::ffi::OsString;
use std::fmt;

use clap::Parser;

pub use config::{Cli, Command, RunConfig};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Bad input data, arguments or configuration.
    pub const VALIDATION: i32 = 1;
    /// Numerical failure (singular system, non-finite values, …).
    pub const COMPUTATION: i32 = 2;
    pub const IO: i32 = 3;
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(cooldecomp_core::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::VALIDATION,
            CliError::Core(cooldecomp_core::Error::Io(_)) | CliError::Io(_) => exit::IO,
            CliError::Core(e) if e.is_input_error() => exit::VALIDATION,
            CliError::Core(_) => exit::COMPUTATION,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<cooldecomp_core::Error> for CliError {
    fn from(e: cooldecomp_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// What a finished invocation printed and how it ended.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (program name first) and runs the command.
pub fn run(args: impl IntoIterator<Item = OsString>, env_segments: Option<&str>) -> Outcome {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // help and version requests are not failures
            let code = if e.use_stderr() { exit::VALIDATION } else { exit::OK };
            let text = e.render().to_string();
            return if code == exit::OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(&cli.command, env_segments) {
        Ok((stdout, code)) => Outcome { code, stdout, stderr: String::new() },
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn execute(command: &Command, env_segments: Option<&str>) -> Result<(String, i32), CliError> {
    let cfg = RunConfig::resolve(command.options(), env_segments)?;
    let staged = match command {
        Command::Model(_) => commands::cmd_model(&cfg)?,
        Command::Decompose(_) => commands::cmd_decompose(&cfg)?,
        Command::Metrics(_) => commands::cmd_metrics(&cfg)?,
        Command::Report(_) => commands::cmd_report(&cfg)?,
        Command::Validate(_) => commands::cmd_validate(&cfg)?,
    };
    let code = staged.code;
    let stdout = staged.commit(cfg.out.as_deref())?;
    Ok((stdout, code))
}
