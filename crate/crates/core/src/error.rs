use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A scenario parameter is out of range or unknown.
    #[error("invalid configuration: `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// A numeric argument is outside the domain of the function.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    #[error("no edge users to schedule")]
    NoEdgeUsers,

    /// The C2/C3 power box of a user is empty.
    #[error(
        "infeasible power box for user {user}: lower bound {lower_w} W exceeds p_max {upper_w} W"
    )]
    Infeasible {
        user: usize,
        lower_w: f64,
        upper_w: f64,
    },

    #[error("user {user} is not scheduled on PRB {prb}")]
    NotScheduled { user: usize, prb: usize },

    #[error("drop {drop} failed: {source}")]
    Drop {
        drop: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }
}
