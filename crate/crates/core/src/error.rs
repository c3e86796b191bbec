use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is singular or ill-conditioned: {0}")]
    Singular(String),
    #[error("columns are not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("rank deficient: need rank >= {needed}, found {found}")]
    RankDeficient { needed: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("SNR condition not met: {0}")]
    SnrCondition(String),
    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),
    #[error("unknown identifier: {0}")]
    Unknown(String),
}

macro_rules! bail {
    ($variant:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$variant(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
