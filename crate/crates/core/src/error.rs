use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no authorized sets")]
    EmptyFamily,
    #[error("empty player list")]
    NoPlayers,
    #[error("{what}: {size} exceeds the limit of {limit}")]
    SizeLimit {
        what: &'static str,
        size: u64,
        limit: u64,
    },
    #[error("unknown player `{0}`")]
    UnknownPlayer(String),
    #[error("duplicate player label `{0}`")]
    DuplicatePlayer(String),
    #[error("cannot parse player set `{0}`")]
    BadPlayerSet(String),
    #[error("not a quantum access structure: {0} and {1} are disjoint")]
    NotQuantum(String, String),
    #[error("access structure is not maximal")]
    NotMaximal,
    #[error("access structure is not minimal maximal (r = {r}, n = {n})")]
    NotMinimalMaximal { r: usize, n: usize },
    #[error("invalid step: {0}")]
    InvalidStep(String),
    #[error("no valid pivot; tried {}", .0.join(", "))]
    NoValidPivot(Vec<String>),
    #[error("no minimal maximal structure reachable: {0}")]
    Unreachable(String),
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("invalid limits specification: {0}")]
    BadLimits(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by an input exceeding a configured bound.
    pub fn is_size_limit(&self) -> bool {
        matches!(self, Error::SizeLimit { .. })
    }
}
