use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty list")]
    EmptyList,

    #[error("malformed list encoding: {0}")]
    MalformedEncoding(&'static str),

    #[error("trailing bytes: {0} byte(s) after the last element")]
    TrailingBytes(usize),

    #[error("spawn failed: {command}: {source}")]
    SpawnFailed {
        command: String,
        #[source]
        source: std::io::Error,
    },

    #[error("external compressor `{command}` failed: {diagnostics}")]
    ProcessFailed { command: String, diagnostics: String },

    #[error("external compressor `{command}` timed out after {millis} ms")]
    Timeout { command: String, millis: u64 },

    #[error("nondeterministic compressor `{command}`: {first} vs {second} bytes")]
    Nondeterministic {
        command: String,
        first: usize,
        second: usize,
    },

    #[error("compressor `{0}` is not deterministic and cannot back an estimator")]
    NotDeterministic(String),

    #[error("degenerate pair: both inputs have zero complexity")]
    DegeneratePair,

    #[error("normalization undefined for singletons")]
    SingletonNormalization,

    #[error("zero denominator in scheme {0}")]
    ZeroDenominator(&'static str),

    #[error("list needs at least {needed} elements, got {got}")]
    TooFewElements { needed: usize, got: usize },

    #[error("enumeration budget: {requested} exceeds the maximum of {max}")]
    EnumerationBudget { requested: u32, max: u32 },

    #[error("absent: no program within the budget produces {0}")]
    Absent(String),

    #[error("not a bit string: byte {0:#04x} is neither 0 nor 1")]
    NotBits(u8),

    #[error("promise violated: string {string} used {uses} times, capacity {capacity}")]
    PromiseViolated { string: String, uses: u64, capacity: u64 },

    #[error("coloring invariant broken: {0}")]
    ColoringInvariant(String),

    #[error("undecodable: {0}")]
    Undecodable(String),

    #[error("invariant broken: {0}")]
    InvariantBroken(String),

    #[error("invalid overlap instance: {0}")]
    InvalidInstance(String),

    #[error("item `{label}`: {source}")]
    Item {
        label: String,
        #[source]
        source: Box<Error>,
    },

    #[error("NaN entry at ({0}, {1})")]
    NanEntry(usize, usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cache file line {line}: {reason}")]
    CacheFormat { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
