use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate mode label `{0}`")]
    DuplicateMode(String),
    #[error("state has zero norm")]
    ZeroState,
    #[error("non-finite amplitude on mode `{0}`")]
    NonFinite(String),
    #[error("basis is not orthonormal: |<b{i}|b{j}> - delta| = {defect:e}")]
    NonOrthonormalBasis { i: usize, j: usize, defect: f64 },
    #[error("mode `{0}` is outside the canonical {{u, d}} path space")]
    OutsideCanonicalSpace(String),
    #[error("expectation value has imaginary part {0:e}")]
    ComplexExpectation(f64),
    #[error("state has amplitude on mode `{0}` which is not a device input")]
    UnknownMode(String),
    #[error("invalid device graph: {}", .0.join("; "))]
    InvalidGraph(Vec<String>),
    #[error("protocol report is missing step {0}")]
    MissingStep(&'static str),
    #[error("malformed outcome distribution: {0}")]
    MalformedDistribution(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
