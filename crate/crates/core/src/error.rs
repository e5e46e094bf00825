use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures raised by an LLM or embedding provider.
#[derive(Debug, Clone, Error, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum ProviderError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint returned status {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed provider response: {0}")]
    Malformed(String),
    #[error("provider returned an empty reply")]
    EmptyReply,
    #[error("asked for {wanted} sentences, received {got} after retries")]
    UnderDelivery { wanted: usize, got: usize },
    #[error("no numbered candidates could be parsed after retries")]
    NoCandidates,
    #[error("embedding has {found} components, expected {expected}")]
    EmbeddingDimension { expected: usize, found: usize },
    #[error("replay transcript has no record for {0}")]
    ReplayMiss(String),
    #[error("provider configuration: {0}")]
    Config(String),
}

impl ProviderError {
    /// Whether repeating the same request may succeed.
    pub fn is_transient(&self) -> bool {
        match self {
            ProviderError::Transport(_) | ProviderError::EmptyReply => true,
            ProviderError::Status { status, .. } => {
                matches!(status, 408 | 429 | 500 | 502 | 503 | 504)
            }
            _ => false,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("zero-norm vector in embedding space")]
    ZeroVector,
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("points belong to different spaces")]
    SpaceMismatch,
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("weight must be positive and finite, got {0}")]
    InvalidWeight(f64),
    #[error("negative value {0} where a distance was expected")]
    NegativeValue(f64),
    #[error("no distance defined between points {0} and {1}")]
    MissingDistance(usize, usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("vote map does not match coalition members")]
    VoteMismatch,
    #[error("invalid proposal: coalitions {i} and {j} with {len} coalitions present")]
    InvalidProposal { i: usize, j: usize, len: usize },
    #[error("mediator needs at least two coalitions, found {0}")]
    InsufficientCoalitions(usize),
    #[error("partition invariant violated: {0}")]
    Partition(String),
    #[error("provider failure during {context}: {source}")]
    Provider {
        context: String,
        #[source]
        source: ProviderError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn provider(context: impl Into<String>, source: ProviderError) -> Self {
        Error::Provider {
            context: context.into(),
            source,
        }
    }

    pub fn is_provider(&self) -> bool {
        matches!(self, Error::Provider { .. })
    }
}
