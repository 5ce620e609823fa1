use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A time lies outside the domain on which a curve or model is defined.
    #[error("{what} = {value} outside domain [{start}, {end}]")]
    Domain {
        what: &'static str,
        value: f64,
        start: f64,
        end: f64,
    },

    /// A PFC file row that could not be accepted. `row` is the 1-based data row.
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    /// Model parameters fail their admissibility constraints.
    #[error("invalid model: {0}")]
    Model(String),

    /// Expected structural price is not strictly positive.
    #[error("expected structural price {value} at tau = {tau} is not strictly positive")]
    NonPositiveMean { tau: f64, value: f64 },

    /// The lognormal moment match needs a strictly positive first moment.
    #[error("lognormal moment matching infeasible: first moment {m1} <= 0")]
    InfeasibleFit { m1: f64 },

    /// Too many Monte Carlo paths hit an infeasible lognormal fit.
    #[error("{infeasible} of {paths} paths had an infeasible lognormal fit (limit 1%)")]
    TooManyInfeasible { infeasible: usize, paths: usize },

    /// A sampled price path does not cover the ID_n averaging window.
    #[error("path covers [{have_start}, {have_end}] but the index window needs [{need_start}, {need_end}]")]
    Coverage {
        need_start: f64,
        need_end: f64,
        have_start: f64,
        have_end: f64,
    },

    /// A referenced file could not be opened.
    #[error("cannot read {path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A config file that does not parse.
    #[error("{path}: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}
