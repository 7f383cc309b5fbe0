use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("numeric error{}: {msg}", .index.map(|i| format!(" at sample {i}")).unwrap_or_default())]
    Numeric { index: Option<usize>, msg: String },

    #[error("quality error: {0}")]
    Quality(String),

    #[error("insufficient strides: {found} heel strike(s) detected, need at least 2")]
    InsufficientStrides { found: usize },

    #[error("analysis error: {0}")]
    Analysis(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("solver did not converge (final objective {objective:.6e})")]
    NotConverged { objective: f64 },

    #[error("feature {feature}: {source}")]
    Feature {
        feature: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{stage} stage: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("trial {name}: {source}")]
    Trial {
        name: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn numeric(index: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Numeric { index, msg: msg.into() }
    }

    /// Attach a sample index to a numeric error that has none.
    pub fn at_sample(self, index: usize) -> Self {
        match self {
            Error::Numeric { index: None, msg } => Error::Numeric { index: Some(index), msg },
            other => other,
        }
    }

    /// Names the pipeline stage an error came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            Error::Stage { .. } => self,
            other => Error::Stage { stage, source: Box::new(other) },
        }
    }

    pub(crate) fn in_feature(self, feature: &'static str) -> Self {
        Error::Feature { feature, source: Box::new(self) }
    }
}
