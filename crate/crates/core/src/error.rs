use std::path::PathBuf;

/// Errors raised across the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid binder layout: {0}")]
    InvalidLayout(String),
    #[error("invalid tone grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("tone {tone} out of range (grid has {k_count} tones)")]
    ToneOutOfRange { tone: usize, k_count: usize },
    #[error("could not enforce column-wise diagonal dominance on tone {tone}, column {column} after {retries} resamples")]
    CwddEnforcement {
        tone: usize,
        column: usize,
        retries: usize,
    },

    #[error("malformed channel file header: {0}")]
    MalformedHeader(String),
    #[error("channel file dimension mismatch: expected {expected} payload bytes, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite channel entry at tone {tone}, row {row}, column {col}")]
    NonFiniteEntry { tone: usize, row: usize, col: usize },
    #[error("channel file checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },

    #[error("unsupported constellation order {0}")]
    UnsupportedOrder(usize),
    #[error("expected {expected} bits, got {found}")]
    BitLength { expected: usize, found: usize },
    #[error("line index {line} outside 1..={m_lines}")]
    LineOutOfRange { line: usize, m_lines: usize },

    #[error("joint search over {candidates} candidates exceeds the limit of {limit}; use the sequential detector")]
    SearchTooLarge { candidates: u128, limit: u128 },
    #[error("singular channel on tone {tone} (reciprocal condition {rcond:e})")]
    SingularChannel { tone: usize, rcond: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("LLR block length {found} does not match the code block length {expected}")]
    CodeLength { expected: usize, found: usize },

    #[error("sample budget {0} is below the minimum of 100")]
    SampleBudget(usize),
    #[error("alphabet of {size} candidates exceeds the enumeration limit of {limit}")]
    AlphabetTooLarge { size: u128, limit: u128 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("missing tones in band aggregation: {0:?}")]
    MissingTones(Vec<usize>),

    #[error("transmit power must be non-negative, got {0}")]
    NegativePower(f64),
    #[error("line-driver power must be positive")]
    ZeroPower,

    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("result schema version {found} is not supported (expected {expected})")]
    SchemaVersion { expected: u32, found: u32 },
    #[error("result file schema mismatch: {0}")]
    Schema(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Whether the error stems from the request rather than from running it.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidLayout(_)
                | Error::InvalidGrid(_)
                | Error::InvalidParameter(_)
                | Error::ToneOutOfRange { .. }
                | Error::UnsupportedOrder(_)
                | Error::SampleBudget(_)
                | Error::AlphabetTooLarge { .. }
                | Error::SearchTooLarge { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
