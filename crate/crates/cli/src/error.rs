use std::fmt;

/// Failure class, mapped to the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Failure {
    /// Bad arguments, configuration or input files.
    Validation,
    /// I/O or numerical failure while working.
    Runtime,
    /// A chain left the divergence bound.
    Divergence,
}

impl Failure {
    pub fn exit_code(self) -> i32 {
        match self {
            Failure::Validation => 2,
            Failure::Runtime => 3,
            Failure::Divergence => 4,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub failure: Failure,
    pub stage: String,
    pub message: String,
}

impl CliError {
    pub fn validation(stage: &str, message: impl Into<String>) -> Self {
        Self {
            failure: Failure::Validation,
            stage: stage.into(),
            message: message.into(),
        }
    }

    pub fn runtime(stage: &str, message: impl Into<String>) -> Self {
        Self {
            failure: Failure::Runtime,
            stage: stage.into(),
            message: message.into(),
        }
    }

    pub fn from_core(stage: &str, e: lqmc::Error) -> Self {
        use lqmc::Error::*;
        let failure = match e {
            Divergence { .. } => Failure::Divergence,
            Numeric(_) | Io(_) => Failure::Runtime,
            _ => Failure::Validation,
        };
        Self {
            failure,
            stage: stage.into(),
            message: e.to_string(),
        }
    }

    pub fn io(stage: &str, e: std::io::Error) -> Self {
        Self::runtime(stage, e.to_string())
    }

    pub fn context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {}", self.stage, self.message)
    }
}

impl std::error::Error for CliError {}
