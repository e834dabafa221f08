use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid JSON in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("line {line}: {message}")]
    MalformedRow { line: usize, message: String },

    #[error("unknown style name {0:?}")]
    UnknownStyle(String),

    #[error("duplicate annotation for image {image:?} by expert {expert:?} (line {line})")]
    DuplicateAnnotation { image: String, expert: String, line: usize },

    #[error("malformed {what}: {message}")]
    Format { what: &'static str, message: String },

    #[error("{what} format version {found} is not supported (expected {expected})")]
    VersionMismatch {
        what: &'static str,
        found: u32,
        expected: u32,
    },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot split {images} images into {splits} non-empty splits")]
    TooFewImages { images: usize, splits: usize },

    #[error("no eligible comparison pairs")]
    EmptyPopulation,

    #[error("comparison population too sparse: drew {drawn} of {requested} after {attempts} attempts")]
    PopulationTooSparse {
        drawn: usize,
        requested: usize,
        attempts: u64,
    },

    #[error("oracle enumeration over {images} images exceeds the cap of {cap}")]
    OracleCapExceeded { images: usize, cap: usize },

    #[error("training diverged (non-finite loss) at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("no features for image {0:?}")]
    MissingFeatures(String),

    #[error("unknown furniture item {0:?}")]
    UnknownItem(String),

    #[error("unknown furniture class {0:?}")]
    UnknownClass(String),

    #[error("furniture item {0:?} has no validated images and cannot be ranked")]
    Unrankable(String),

    #[error("no embedding for validated image {0:?}")]
    MissingEmbedding(String),

    #[error("image {image:?} is not associated with furniture {furniture:?}")]
    UnknownPair { image: String, furniture: String },

    #[error("scene is empty")]
    EmptyScene,

    #[error("index is stale: {0}")]
    StaleIndex(String),

    #[error("index generation {requested} was requested but {current} is loaded")]
    GenerationMismatch { requested: String, current: String },

    #[error("unknown scene {0:?}")]
    UnknownScene(String),

    #[error("{0} is empty")]
    Empty(&'static str),
}

impl Error {
    /// Stable machine-readable error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Json { .. } => "json",
            Error::MalformedRow { .. } => "malformed_row",
            Error::UnknownStyle(_) => "unknown_style",
            Error::DuplicateAnnotation { .. } => "duplicate_annotation",
            Error::Format { .. } => "format",
            Error::VersionMismatch { .. } => "version_mismatch",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::InvalidConfig(_) => "invalid_config",
            Error::TooFewImages { .. } => "too_few_images",
            Error::EmptyPopulation => "empty_population",
            Error::PopulationTooSparse { .. } => "population_too_sparse",
            Error::OracleCapExceeded { .. } => "oracle_cap_exceeded",
            Error::Divergence { .. } => "divergence",
            Error::MissingFeatures(_) => "missing_features",
            Error::UnknownItem(_) => "unknown_item",
            Error::UnknownClass(_) => "unknown_class",
            Error::Unrankable(_) => "unrankable",
            Error::MissingEmbedding(_) => "missing_embedding",
            Error::UnknownPair { .. } => "unknown_pair",
            Error::EmptyScene => "empty_scene",
            Error::StaleIndex(_) => "stale_index",
            Error::GenerationMismatch { .. } => "generation_mismatch",
            Error::UnknownScene(_) => "unknown_scene",
            Error::Empty(_) => "empty",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn format(what: &'static str, message: impl Into<String>) -> Self {
        Error::Format {
            what,
            message: message.into(),
        }
    }
}
