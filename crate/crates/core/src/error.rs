use thiserror::Error;

/// Errors raised by the library. Every variant maps to a violated
/// precondition or an I/O failure while writing reports.
#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Domain(String),

    #[error("invalid literal `{literal}`: {reason}")]
    Parse { literal: String, reason: String },

    #[error(
        "truncation order too small: need exponent {required}, series known below {available}"
    )]
    Truncation { required: i64, available: i64 },

    #[error("unknown claim `{0}`")]
    UnknownClaim(String),

    #[error("tabulation does not cover the requested difference: {0}")]
    Tabulation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err($crate::error::Error::Domain(format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure;
