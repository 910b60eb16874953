use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{op}: dimension mismatch, expected {expected}, found {found}")]
    Dimension {
        op: &'static str,
        expected: String,
        found: String,
    },
    #[error("{op}: system is singular or not positive definite{hint}")]
    Singular {
        op: &'static str,
        hint: &'static str,
    },
    #[error("{0}")]
    InvalidArgument(String),
    #[error("sensing matrix generation failed after {attempts} attempts (an all-zero row kept appearing)")]
    GenerationFailed { attempts: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub(crate) fn dim_err(
    op: &'static str,
    expected: impl core::fmt::Display,
    found: impl core::fmt::Display,
) -> Error {
    use alloc::string::ToString;
    Error::Dimension {
        op,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
