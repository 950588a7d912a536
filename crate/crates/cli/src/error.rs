use std::fmt;
use std::path::{Path, PathBuf};

use farepanel::{Error, Stage};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const VALIDATE: i32 = 3;
    pub const CONVERGE: i32 = 4;
    pub const RENDER: i32 = 5;
    pub const ESTIMATE: i32 = 6;
    pub const CHECK_FAILED: i32 = 7;
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Parse(String),
    Validate(String),
    Io { path: PathBuf, source: std::io::Error },
    /// Failed check count and the rendered check matrix.
    CheckFailed { failed: usize, report: String },
    Context { context: String, source: Box<CliError> },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        CliError::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => core_exit_code(e),
            CliError::Parse(_) => exit::PARSE,
            CliError::Validate(_) => exit::VALIDATE,
            CliError::Io { .. } => exit::IO,
            CliError::CheckFailed { .. } => exit::CHECK_FAILED,
            CliError::Context { source, .. } => source.exit_code(),
        }
    }
}

fn core_exit_code(e: &Error) -> i32 {
    if e.stage() == Some(Stage::Render) {
        return exit::RENDER;
    }
    match e.root() {
        Error::Schema(_) | Error::Row { .. } | Error::Format { .. } => exit::PARSE,
        Error::Validation(_) | Error::Guard(_) => exit::VALIDATE,
        Error::NoConvergence { .. } => exit::CONVERGE,
        Error::Render(_) => exit::RENDER,
        Error::NoUsableColumns | Error::Singular { .. } | Error::DegreesOfFreedom(_) => exit::ESTIMATE,
        Error::Io { .. } => exit::IO,
        Error::Stage { .. } => unreachable!("root() strips stage tags"),
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Validate(m) => write!(f, "validation error: {m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::CheckFailed { failed, .. } => write!(f, "{failed} self-check(s) failed"),
            CliError::Context { context, source } => write!(f, "{context}: {source}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_follow_the_root_cause() {
        let conv = Error::NoConvergence {
            iterations: 3,
            last_change: 1.0,
        };
        let tagged = Error::Stage {
            stage: Stage::Demean,
            source: Box::new(conv),
        };
        assert_eq!(CliError::from(tagged).exit_code(), exit::CONVERGE);
        assert_eq!(
            CliError::Parse("x".into()).context("config").exit_code(),
            exit::PARSE
        );
        assert_eq!(CliError::from(Error::Render("r".into())).exit_code(), exit::RENDER);
        assert_eq!(CliError::from(Error::NoUsableColumns).exit_code(), exit::ESTIMATE);
    }
}
