use thiserror::Error;

/// Errors produced by the analysis engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("bad parameters for `{generator}`: {reason}")]
    BadParams { generator: String, reason: String },
    #[error("spacing {spacing} too coarse: smallest feature gap {gap} needs spacing < gap/3")]
    SpacingTooCoarse { spacing: f64, gap: f64 },
    #[error("region is empty")]
    EmptyRegion,
    #[error("query cells lie in different components")]
    Disconnected,
    #[error("instance too large for exhaustive search ({size} > {limit})")]
    TooLarge { size: usize, limit: usize },
    #[error("radius {r0} cannot resolve depth {depth} at spacing {spacing}")]
    RadiusUnresolvable { r0: f64, depth: usize, spacing: f64 },
    #[error("impression is empty at depth {depth}")]
    EmptyImpression { depth: usize },
    #[error("no finite-diameter separator certificate found: {0}")]
    CertificateNotFound(String),
    #[error("link {0} has no interior cells at this spacing")]
    InteriorEmpty(usize),
    #[error("map `{map}` is undefined at ({x}, {y})")]
    DomainViolation { map: String, x: f64, y: f64 },
    #[error("degenerate continuum pair: {0}")]
    Degenerate(String),
    #[error("no curves join the two sets")]
    NoCurves,
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Invalid(e.to_string())
    }
}
