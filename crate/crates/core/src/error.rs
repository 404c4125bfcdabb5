use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },

    #[error("grid too small: each side must span {required} but spans {available}")]
    GridTooSmall { required: f64, available: f64 },

    #[error("time step {dt} exceeds the stability bound {limit}")]
    UnstableTimeStep { dt: f64, limit: f64 },

    #[error("price escaped domain at t = {time}")]
    PriceEscapedDomain { time: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("insufficient data: need {needed}, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("insufficient span: {0}")]
    InsufficientSpan(&'static str),

    #[error("crossover not identified: objective minimum at the edge of the scanned range")]
    CrossoverNotIdentified,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: &'static str) -> Self {
        Error::InvalidParameter { name, reason }
    }
}
