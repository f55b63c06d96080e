use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// The variants are grouped by how a caller is expected to react: `Invalid`
/// means the input broke an invariant, `Capability` means the input is valid
/// but outside what an algorithm supports, and the remaining variants carry
/// numeric failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {invariant}{}", location_suffix(.location))]
    Invalid {
        invariant: String,
        location: Option<String>,
    },

    #[error("capability limit: {0}")]
    Capability(String),

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("target {target} outside attainable range [{min}, {max}]")]
    OutOfRange { target: f64, min: f64, max: f64 },

    #[error("no punishment exists: {0}")]
    NoPunishment(String),

    #[error("not supportable: {0}")]
    Unsupportable(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

fn location_suffix(location: &Option<String>) -> String {
    match location {
        Some(loc) => format!(" (at {loc})"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(invariant: impl Into<String>) -> Self {
        Error::Invalid {
            invariant: invariant.into(),
            location: None,
        }
    }

    pub(crate) fn invalid_at(invariant: impl Into<String>, location: impl Into<String>) -> Self {
        Error::Invalid {
            invariant: invariant.into(),
            location: Some(location.into()),
        }
    }

    /// True for errors caused by a violated input invariant.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Invalid { .. })
    }

    /// True for errors caused by a configured algorithmic limit.
    pub fn is_capability(&self) -> bool {
        matches!(self, Error::Capability(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
