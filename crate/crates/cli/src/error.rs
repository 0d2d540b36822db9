//! CLI failures and their exit codes.

use serde_json::{json, Value};
use thiserror::Error;

/// Failures surfaced to the user.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed JSON.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    /// Well-formed input that violates the schema or a precondition.
    #[error("{0}")]
    Validation(String),
    /// A configured size or rank budget would be exceeded.
    #[error("{0}")]
    Resource(String),
    /// File could not be read.
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// Classifies a `serde_json` error: syntax errors keep their position.
    pub fn from_json(e: serde_json::Error) -> Self {
        use serde_json::error::Category;
        match e.classify() {
            Category::Syntax | Category::Eof | Category::Io => CliError::Parse { line: e.line(), column: e.column(), message: e.to_string() },
            Category::Data => CliError::Validation(e.to_string()),
        }
    }

    /// Process exit code.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Resource(_) => 3,
            _ => 2,
        }
    }

    /// JSON error document.
    pub fn to_json(&self) -> Value {
        let kind = match self {
            CliError::Parse { .. } => "parse",
            CliError::Validation(_) => "validation",
            CliError::Resource(_) => "resource_limit",
            CliError::Io { .. } => "io",
        };
        let mut v = json!({ "error": { "kind": kind, "message": self.to_string() } });
        if let CliError::Parse { line, column, .. } = self {
            v["error"]["line"] = json!(line);
            v["error"]["column"] = json!(column);
        }
        v
    }
}

impl From<fgsim::Error> for CliError {
    fn from(e: fgsim::Error) -> Self {
        match e {
            fgsim::Error::ResourceLimit { .. } => CliError::Resource(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}
