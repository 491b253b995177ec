use std::io;
use std::path::PathBuf;

use fixiter::{ConditionReport, Error};
use thiserror::Error;

use crate::expr::ExprError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid expression: {0}")]
    Expr(#[from] ExprError),

    #[error("{0}")]
    Core(#[from] Error),

    #[error("DDE conditions failed: {}", describe(.0))]
    Conditions(ConditionReport),
}

fn describe(report: &ConditionReport) -> String {
    report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| match &c.witness {
            Some(w) => format!("{} ({}; {w})", c.name, c.description),
            None => c.name.to_string(),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 2: configuration or hypothesis, 3: numerical failure, 4: DDE conditions.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Config(_) | CliError::Expr(_) => 2,
            CliError::Conditions(_) => 4,
            CliError::Core(e) => match e {
                Error::NonFinite { .. } | Error::NonConvergence { .. } => 3,
                Error::ConditionsFailed(_) => 4,
                _ => 2,
            },
        }
    }
}
