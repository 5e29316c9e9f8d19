use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operands live on different bases")]
    BasisMismatch,

    #[error("basis label `{0}` appears more than once")]
    DuplicateLabel(String),

    #[error("a basis needs at least one label")]
    EmptyBasis,

    #[error("non-finite amplitude or matrix entry at index {0}")]
    NonFinite(usize),

    #[error("operator is not a projector (idempotence defect {idempotence:e}, hermiticity defect {hermiticity:e})")]
    NotProjector { idempotence: f64, hermiticity: f64 },

    #[error("pre- and post-selection are orthogonal (|overlap| = {overlap:e})")]
    OrthogonalSelection { overlap: f64 },

    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("least-squares fit needs at least two points, got {0}")]
    TooFewPoints(usize),

    #[error("all abscissae are equal; slope is undetermined")]
    DegenerateAbscissa,

    #[error("reference count is zero at transmission {transmission}; increase the flux")]
    ZeroReference { transmission: f64 },

    #[error("state leaves the encoded subspace (leakage {leakage:e})")]
    Leakage { leakage: f64 },

    #[error("tomography setting ({0}) is missing or has no counts")]
    MissingSetting(String),

    #[error("invalid ND filter: {0}")]
    InvalidNdTarget(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("not a density matrix: hermiticity defect {hermiticity:e}, trace {trace}")]
    NotDensityMatrix { hermiticity: f64, trace: f64 },

    #[error("attenuation schedule: {0}")]
    InvalidSchedule(String),

    #[error("bootstrap needs at least 100 resamples, got {0}")]
    TooFewResamples(usize),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            domain,
        }
    }
}
