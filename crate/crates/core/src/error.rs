use thiserror::Error;

/// Everything that can go wrong across the codecs and the harness.
///
/// Encoder failures (`RankDeficient`, `NotEncodable`, `SearchExhausted`) are
/// expected events with small probability; the harness records them as data.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("rank deficient system (block {block}, {attempts} attempt(s))")]
    RankDeficient { block: usize, attempts: u32 },

    #[error("only {unfrozen} unfrozen positions, need at least {needed}")]
    InsufficientUnfrozen { unfrozen: usize, needed: usize },

    #[error("residue {residue} is not below modulus {modulus}")]
    ResidueOutOfRange { residue: u128, modulus: u128 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("message of {len} bits exceeds capacity {capacity}")]
    MessageTooLong { len: usize, capacity: usize },

    #[error("malformed chain: {0}")]
    MalformedChain(String),

    #[error("no seed among the first {budget} gives full-rank chain matrices")]
    SearchExhausted { budget: u64 },

    #[error("no interval satisfies the partition conditions")]
    NoValidInterval,

    #[error("no aligned window inside the metadata interval is sparse enough")]
    NoValidSubblock,

    #[error("position code {code} does not name a valid (interval, window) pair")]
    InvalidPositionCode { code: u64 },

    #[error("no member of bin (level {level}) matches the frozen pattern")]
    NotEncodable { level: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Short stable tag used in reports and CLI diagnostics.
    pub fn cause(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::InsufficientUnfrozen { .. } => "InsufficientUnfrozen",
            Error::ResidueOutOfRange { .. } => "ResidueOutOfRange",
            Error::InvalidParams(_) => "InvalidParams",
            Error::MessageTooLong { .. } => "MessageTooLong",
            Error::MalformedChain(_) => "MalformedChain",
            Error::SearchExhausted { .. } => "SearchExhausted",
            Error::NoValidInterval => "NoValidInterval",
            Error::NoValidSubblock => "NoValidSubblock",
            Error::InvalidPositionCode { .. } => "InvalidPositionCode",
            Error::NotEncodable { .. } => "NotEncodable",
            Error::Format(_) => "Format",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
