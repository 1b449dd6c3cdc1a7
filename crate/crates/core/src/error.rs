use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{source_name}:{line}: {message}")]
    Malformed {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("duplicate paper id `{id}` on lines {first} and {second}")]
    DuplicateId {
        id: String,
        first: usize,
        second: usize,
    },

    #[error("invalid rules: {0}")]
    Rules(String),

    /// Members of the cycle in merge order, starting from the smallest id.
    #[error("merge cycle: {} -> {}", .0.join(" -> "), .0.first().map(String::as_str).unwrap_or(""))]
    MergeCycle(Vec<String>),

    #[error("pattern `{pattern}` is claimed by both `{first}` and `{second}`")]
    PatternConflict {
        pattern: String,
        first: String,
        second: String,
    },

    #[error("unknown institution `{0}`")]
    UnknownInstitution(String),

    #[error("unknown paper `{0}`")]
    UnknownPaper(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("id sets differ (missing: [{}], unexpected: [{}])", .missing.join(", "), .unexpected.join(", "))]
    IdMismatch {
        missing: Vec<String>,
        unexpected: Vec<String>,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn malformed(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Malformed {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code: 3 for internal invariant violations, 2 for
    /// everything caused by input or configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) => 3,
            _ => 2,
        }
    }
}
