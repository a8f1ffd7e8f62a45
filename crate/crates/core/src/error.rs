use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A sine-angle or similar argument outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A beamformer or combiner whose norm is not one.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("no feasible arm for this topology and frame")]
    EmptyArmSet,

    #[error("expected {expected} hop values, got {actual}")]
    HopCountMismatch { expected: usize, actual: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    TomlDe(#[from] toml::de::Error),

    #[error("config serialize error: {0}")]
    TomlSer(#[from] toml::ser::Error),
}
