use std::fmt;

/// Errors surfaced by the distribution, simulation and scale-function routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain of the operation (NaN, negative rate, …).
    Domain(String),
    /// An intermediate quantity overflowed; the result is reported, not saturated.
    Overflow(String),
    /// A requested tail tolerance could not be certified within the configured
    /// maximum support; carries the bound that was achieved.
    Truncation { requested: f64, achieved: f64 },
    /// The net-profit condition (premium income must exceed expected claim
    /// outflow) fails; carries the nonpositive drift.
    NetProfit { drift: f64 },
    /// A limit that diverges for the supplied parameters.
    Divergent(String),
    /// An input that makes the requested quantity numerically meaningless
    /// (e.g. a ratio with denominator below the floating-point floor).
    Degenerate(String),
    /// An iterative scheme exhausted its budget without meeting its tolerance.
    NonConvergence(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Overflow(msg) => write!(f, "overflow: {msg}"),
            Error::Truncation {
                requested,
                achieved,
            } => write!(
                f,
                "truncation: requested tail bound {requested:e} unattainable, achieved {achieved:e}"
            ),
            Error::NetProfit { drift } => write!(
                f,
                "net-profit condition violated: drift c - lambda^2 E[claim] = {drift} <= 0, \
                 ruin is certain and infinite-horizon estimation is refused"
            ),
            Error::Divergent(msg) => write!(f, "divergent: {msg}"),
            Error::Degenerate(msg) => write!(f, "degenerate input: {msg}"),
            Error::NonConvergence(msg) => write!(f, "failed to converge: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
