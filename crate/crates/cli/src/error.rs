use std::fmt;
use std::io;

use crate::config::ConfigError;

/// Everything that stops a run, grouped by exit status.
#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Solver(spgs::Error),
    /// The run finished but a checked property failed.
    Validation(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) | CliError::Io(_) => 3,
            CliError::Validation(_) => 4,
        }
    }

    /// One line, `key=value` pairs, message last and quoted.
    pub fn machine_line(&self) -> String {
        let (kind, extra, message) = match self {
            CliError::Config(e) => {
                let mut extra = String::new();
                if let Some(key) = &e.key {
                    extra.push_str(&format!(" key={key}"));
                }
                if let Some(line) = e.line {
                    extra.push_str(&format!(" line={line}"));
                }
                ("config", extra, e.message.clone())
            }
            CliError::Solver(e) => ("solver", String::new(), e.to_string()),
            CliError::Io(e) => ("io", String::new(), e.to_string()),
            CliError::Validation(m) => ("validation", String::new(), m.clone()),
        };
        format!(
            "error kind={kind} exit={}{extra} message={message:?}",
            self.exit_code()
        )
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.machine_line())
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<spgs::Error> for CliError {
    fn from(e: spgs::Error) -> Self {
        match e {
            spgs::Error::Io(io) => CliError::Io(io),
            other => CliError::Solver(other),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}
