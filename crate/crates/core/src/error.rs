use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain of a function, e.g. `K1(x)` for `x <= 0`.
    #[error("{function}: argument {value} outside domain ({expected})")]
    Domain {
        function: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("SAP index {index} out of range (codec carries {capacity} patterns)")]
    SapIndexOutOfRange { index: u64, capacity: u64 },

    #[error("subcarrier set {0:?} is not a pattern of this codec")]
    SapNotInImage(Vec<usize>),

    #[error("outage constraint cannot be met inside the power box")]
    Infeasible,
}

impl Error {
    pub(crate) fn domain(function: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            function,
            value,
            expected,
        }
    }

    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
