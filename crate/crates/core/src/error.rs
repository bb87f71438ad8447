use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised anywhere in the crate. [`Error::kind`] is the stable string
/// written into CLI reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // geometry
    #[error("charge matrix has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("invalid dimensions: {0}")]
    Dimension(String),
    #[error("stability condition ({condition}) fails: {detail}")]
    Unstable { condition: char, detail: String },
    #[error("fan is not smooth: {0}")]
    NotSmooth(String),
    #[error("divisor {0} meets no chamber cone")]
    EmptyDivisor(usize),
    #[error("invalid fan: {0}")]
    InvalidFan(String),
    #[error("no ample class: {0}")]
    NoAmpleClass(String),
    #[error("Mori cone enumeration is unbounded: {0}")]
    UnboundedEnumeration(String),

    // cohomology
    #[error("cohomology presentation is inconsistent: {0}")]
    PresentationInconsistent(String),
    #[error("classes come from different presentations or fields")]
    FieldMismatch,
    #[error("integration normalisation conflict: {0}")]
    NormalizationConflict(String),

    // quantum ring
    #[error("curve class {0:?} is not in the Mori cone")]
    NotInMori(Vec<i64>),

    // GKZ
    #[error("operator shift leaves the truncation window: {0}")]
    BoundExceeded(String),
    #[error("I-function is not unipotent: {0}")]
    NonUnipotent(String),

    // numerics
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("mirror potential splitting failed: {0}")]
    SplittingFailure(String),
    #[error("potential does not decay on the positive real cycle: {0}")]
    NoDecay(String),
    #[error("quadrature tolerance not met: {0}")]
    TolNotMet(String),
    #[error("argument hits a pole of the Gamma factors: {0}")]
    PoleHit(String),
    #[error("residue sums need Picard rank one, got k = {0}")]
    NotRankOne(usize),
    #[error("residue magnitudes grow: {0}")]
    DivergenceSuspected(String),

    // model files
    #[error("schema error at {pointer}: {message}")]
    SchemaError { pointer: String, message: String },
    #[error("geometry error at {pointer}: {source}")]
    GeometryError { pointer: String, source: Box<Error> },
    #[error("{0}")]
    Io(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::RankDeficient { .. } => "RankDeficient",
            Error::Dimension(_) => "Dimension",
            Error::Unstable { .. } => "Unstable",
            Error::NotSmooth(_) => "NotSmooth",
            Error::EmptyDivisor(_) => "EmptyDivisor",
            Error::InvalidFan(_) => "InvalidFan",
            Error::NoAmpleClass(_) => "NoAmpleClass",
            Error::UnboundedEnumeration(_) => "UnboundedEnumeration",
            Error::PresentationInconsistent(_) => "PresentationInconsistent",
            Error::FieldMismatch => "FieldMismatch",
            Error::NormalizationConflict(_) => "NormalizationConflict",
            Error::NotInMori(_) => "NotInMori",
            Error::BoundExceeded(_) => "BoundExceeded",
            Error::NonUnipotent(_) => "NonUnipotent",
            Error::DomainError(_) => "DomainError",
            Error::SplittingFailure(_) => "SplittingFailure",
            Error::NoDecay(_) => "NoDecay",
            Error::TolNotMet(_) => "TolNotMet",
            Error::PoleHit(_) => "PoleHit",
            Error::NotRankOne(_) => "NotRankOne",
            Error::DivergenceSuspected(_) => "DivergenceSuspected",
            Error::SchemaError { .. } => "SchemaError",
            Error::GeometryError { .. } => "GeometryError",
            Error::Io(_) => "Io",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }

    pub(crate) fn schema(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::SchemaError { pointer: pointer.into(), message: message.into() }
    }

    pub(crate) fn geometry(pointer: impl Into<String>, source: Error) -> Self {
        Error::GeometryError { pointer: pointer.into(), source: Box::new(source) }
    }
}
