use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid `{field}`: {constraint}")]
    Validation { field: String, constraint: String },
    #[error("{0}")]
    Usage(String),
}

impl ConfigError {
    pub(crate) fn invalid(field: &str, constraint: &str) -> Self {
        ConfigError::Validation {
            field: field.to_owned(),
            constraint: constraint.to_owned(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] branchmax_core::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{failed} check(s) failed")]
    ChecksFailed { failed: usize },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Core(_) | RunError::Write { .. } => 3,
            RunError::ChecksFailed { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(ConfigError::Parse { .. }) => "ParseError",
            RunError::Config(ConfigError::Usage(_)) => "UsageError",
            RunError::Config(ConfigError::Io { .. }) => "IoError",
            RunError::Config(_) => "ValidationError",
            RunError::Core(_) => "RuntimeError",
            RunError::Write { .. } => "IoError",
            RunError::ChecksFailed { .. } => "CheckFailure",
        }
    }

    /// Machine-readable form printed by the binary.
    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::json!({
            "kind": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        match self {
            RunError::Config(ConfigError::Parse { line, column, .. }) => {
                obj["line"] = (*line).into();
                obj["column"] = (*column).into();
            }
            RunError::Config(ConfigError::Validation { field, constraint }) => {
                obj["field"] = field.as_str().into();
                obj["constraint"] = constraint.as_str().into();
            }
            _ => {}
        }
        serde_json::json!({ "error": obj })
    }
}
