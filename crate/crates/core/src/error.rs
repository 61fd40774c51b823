use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-attractive parameters: c = {c} exceeds (1 - |d|)/2 = {limit}")]
    NotAttractive { c: f64, limit: f64 },

    /// Boundary influence reached the observation window of a simulation.
    #[error(
        "influence cone breached: boundary disturbance reached site offset {offset} \
         at microscopic time {time:.3} (increase margin)"
    )]
    InfluenceConeBreach { offset: i64, time: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
