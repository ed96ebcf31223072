use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not unitary: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotUnitary { residual: f64, tol: f64 },

    #[error(
        "matrix is not normal: commutator residual {residual:.3e} exceeds tolerance {tol:.3e}"
    )]
    NotNormal { residual: f64, tol: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver failed to converge on a {dim}x{dim} matrix")]
    EigenFailure { dim: usize },

    #[error("generator index {index} out of range for {generators} generators")]
    GeneratorOutOfRange { index: usize, generators: usize },

    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    #[error("rank assignment infeasible: {0}")]
    RankInfeasible(String),

    #[error("rank mismatch: {0}")]
    RankMismatch(String),

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("corrected tuple still violates the relations: defect {defect:.3e} > {tol:.3e}")]
    DefectTooLarge { defect: f64, tol: f64 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}
