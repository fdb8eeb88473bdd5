//! Error taxonomy shared by the whole crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by the library.
///
/// All failures are diagnosable from the message alone: domain errors name
/// the violated precondition, unsupported-domain errors name the offending
/// eigenvalue, and blow-up errors carry the last time at which the state was
/// still finite.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A precondition on the inputs was violated (shape, range, emptiness, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The input is structurally valid but outside the mathematical domain of
    /// the operation (e.g. a matrix power with a spectrum touching the closed
    /// negative real axis).
    #[error("unsupported domain: {0}")]
    Unsupported(String),

    /// Numerical integration produced a non-finite state.
    #[error("integration blow-up: state became non-finite after t = {last_good_t}")]
    Blowup {
        /// Last time at which the integrated state was still finite.
        last_good_t: f64,
    },

    /// A combinatorial count overflowed the native integer range.
    #[error("overflow: {0}")]
    Overflow(String),
}

impl Error {
    /// Convenience constructor for [`Error::Domain`].
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Convenience constructor for [`Error::Unsupported`].
    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
}
