use thiserror::Error;

/// Errors raised by operator construction, tomography, sampling and
/// scenario evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("operator is not Hermitian (residue {residue:.3e})")]
    NotHermitian { residue: f64 },

    #[error("trace is not 1 (got {0})")]
    NotUnitTrace(f64),

    #[error("operator is not positive semidefinite (smallest eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("operator is not a projector (|P^2 - P| = {0:.3e})")]
    NotProjector(f64),

    #[error("operator is not an effect (eigenvalues outside [0, 1]: {min:.3e}..{max:.3e})")]
    NotEffect { min: f64, max: f64 },

    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("weak measurement strength too large: |eps S| = {norm} > 1 for probe {probe}")]
    StrengthTooLarge { probe: String, norm: f64 },

    #[error("invalid weak measurement: {0}")]
    InvalidPovm(String),

    #[error("invalid tomography basis: {0}")]
    InvalidBasis(String),

    #[error("Gram matrix of the tomography basis is singular (condition number {0:.3e})")]
    SingularGram(f64),

    #[error("outcome {label} has probability {prob:.3e}; conditional state undefined")]
    ZeroProbabilityOutcome { label: String, prob: f64 },

    #[error("projective measurement is not complete and orthogonal: {0}")]
    IncompletePvm(String),

    #[error("bad dimension: {0}")]
    BadDimension(String),

    #[error("scenario is not a Bell/CHSH scenario: {0}")]
    WrongScenario(String),

    #[error("report is missing events: {0}")]
    MissingEvents(String),

    #[error("insufficient post-selected shots for outcome {outcome}: {detail}")]
    InsufficientPostSelection { outcome: String, detail: String },

    #[error("unknown label: {0}")]
    UnknownLabel(String),

    #[error("invalid sampling configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
