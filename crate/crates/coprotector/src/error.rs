//! Crate-wide error type.

use std::path::PathBuf;

/// Everything that can go wrong across parsing, poisoning, arming, auditing
/// and detection. Variants carry enough context to be actionable from the CLI
/// without a backtrace.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Source text could not be parsed into a syntax tree.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// A language tag we have no grammar front-end for.
    #[error("unsupported language: {0}")]
    UnsupportedLanguage(String),

    /// A transformed tree rendered to text that no longer parses.
    #[error("render produced invalid output: {0}")]
    Render(String),

    /// Code splicing found no donor statement of a matching type for any
    /// selected statement.
    #[error("no donor statement available for any selected statement")]
    NoDonorAvailable,

    /// Comment transforms need a non-empty comment to work on.
    #[error("instance has an empty comment")]
    EmptyComment,

    /// Comment semantic reverse fell back to donor replacement but the donor
    /// pool had no usable comments.
    #[error("donor pool contains no non-empty comments")]
    EmptyDonorPool,

    /// A watermark feature had nowhere to go in the instance.
    #[error("no embedding site for feature: {0}")]
    NoEmbeddingSite(String),

    /// The backdoor definition failed validation.
    #[error("invalid backdoor: {}", format_violations(.0))]
    InvalidBackdoor(Vec<String>),

    /// A targeted or mixed strategy was requested without a backdoor.
    #[error("strategy {0} requires a backdoor definition")]
    MissingBackdoor(String),

    /// A configuration value is out of range or inconsistent.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The repository already carries a protection notice.
    #[error("repository at {0} is already armed (found .coprotector; use force to re-arm)")]
    AlreadyArmed(PathBuf),

    /// A `.coprotector` file exists but does not hold the expected JSON shape.
    #[error("malformed protection notice at {path}: {message}")]
    MalformedNotice { path: PathBuf, message: String },

    /// A JSONL record (instance, manifest, representation, replay) failed to
    /// deserialize.
    #[error("malformed record at {path}:{line}: {message}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Underlying filesystem failure, annotated with the path involved.
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The model adapter failed to produce an output.
    #[error("model adapter error: {0}")]
    Adapter(String),

    /// An audit stopped early because the adapter failed mid-run.
    #[error("audit aborted after {queries_used} queries: {message}")]
    AuditAborted { queries_used: usize, message: String },

    /// Too few observation pairs survived to run the test.
    #[error("need at least {needed} observation pairs, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    /// Significance level outside (0, 1).
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),

    /// Assumed poison fraction outside (0, 1].
    #[error("epsilon must lie in (0, 1], got {0}")]
    InvalidEpsilon(f64),

    /// A representation vector did not match the expected dimension.
    #[error("representation {id} has dimension {got}, expected {expected}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        got: usize,
    },

    /// A representation vector contained NaN or infinity.
    #[error("representation {id} contains a non-finite component")]
    NonFiniteVector { id: String },

    /// Generic invalid-input complaint for set-level checks.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

fn format_violations(violations: &[String]) -> String {
    violations.join("; ")
}

impl Error {
    /// Attach a path to a raw [`std::io::Error`].
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
