use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A document does not match its schema. `path` names the offending element.
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error("interval error at {path}: lo {lo} > hi {hi}")]
    Interval { path: String, lo: f64, hi: f64 },

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("`{id}` not found{}", suggestion_suffix(.suggestions))]
    NotFound {
        id: String,
        suggestions: Vec<String>,
    },

    #[error("gesture `{id}` violates the envelope: {}", .details.join("; "))]
    GestureViolations { id: String, details: Vec<String> },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

fn suggestion_suffix(suggestions: &[String]) -> String {
    if suggestions.is_empty() {
        String::new()
    } else {
        format!(" (did you mean: {})", suggestions.join(", "))
    }
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
