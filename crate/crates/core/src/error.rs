use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rotation axis has zero length")]
    ZeroAxis,
    #[error("projection direction has zero length")]
    ZeroVector,
    #[error("matrix is not a rotation: {0}")]
    NotARotation(String),

    #[error("span station r = {r} m outside [0, {span}] m")]
    OutOfSpan { r: f64, span: f64 },
    #[error("chord fraction {0} outside [0, 1]")]
    GammaOutOfRange(f64),
    #[error("least-squares fit is rank deficient: {0}")]
    RankDeficient(String),
    #[error("invalid wing shape: {0}")]
    InvalidShape(String),

    #[error("effective chord velocity {0:e} m/s below the stagnation floor")]
    StagnantChord(f64),

    #[error("mass matrix factorization failed (corrupted morphology?)")]
    SingularMass,
    #[error("reduced body mass matrix is singular")]
    SingularReducedMass,
    #[error("state became non-finite at t = {t} s")]
    NonFiniteState { t: f64 },
    #[error("invalid morphology: {0}")]
    InvalidMorphology(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("parameter out of bounds: {0}")]
    Bounds(String),
}

impl Error {
    /// Numerical failures as opposed to configuration problems.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFiniteState { .. } | Error::SingularMass | Error::SingularReducedMass)
    }
}
