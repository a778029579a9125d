use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("unknown member or operator `{0}`")]
    Unknown(String),
    #[error("duplicate name `{0}`")]
    Duplicate(String),
    #[error("invalid spin value {0}")]
    InvalidSpin(f64),
    #[error("empty system declaration")]
    EmptyDeclaration,
    #[error("member `{0}` is not separable from the requested subsystem")]
    Inseparable(String),
    #[error("`{0}` is not a direct-sum branch of the layout")]
    BranchNotFound(String),
    #[error("invalid state specification: {0}")]
    InvalidState(String),
    #[error("density matrix is not rank one (largest eigenvalue {0})")]
    Rank(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unphysical parameters: {0}")]
    Physicality(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
