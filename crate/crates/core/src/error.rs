use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Outcomes that are part of normal operation (an escape before the
/// requested time, a subspace that lies off the canonical chart) are values,
/// not errors; see [`crate::flow::FlowOutcome`] and
/// [`crate::chart::Retraction`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    Dimension {
        op: &'static str,
        expected: String,
        got: String,
    },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("{name} = {value} is outside the domain of {op}")]
    Domain {
        op: &'static str,
        name: &'static str,
        value: f64,
    },

    #[error("top block-row [I 0]A is zero: U(t) = I for all t and the equation never escapes")]
    NoEscapePossibleFromLinearPart,

    #[error("escape time is not bounded on the grid ({count} offending points, first at angle {first})")]
    UnboundedEscape { count: usize, first: f64 },

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_err(op: &'static str, expected: impl ToString, got: impl ToString) -> Error {
    Error::Dimension {
        op,
        expected: expected.to_string(),
        got: got.to_string(),
    }
}
