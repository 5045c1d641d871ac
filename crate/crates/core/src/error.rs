use std::fmt;

/// Snapshot of the recursive ordering at the point where neither candidate
/// keeps the cumulative second-derivative proxy nonpositive.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppedOrdering {
    pub theta0: f64,
    pub epsilon: f64,
    /// Elements ranked before the stop, in rank order.
    pub ranked: Vec<u64>,
    /// Candidate from the nonnegative-score side and its `nu` value.
    pub upper_candidate: (u64, f64),
    /// Candidate from the negative-score side and its `nu` value.
    pub lower_candidate: (u64, f64),
}

impl fmt::Display for StoppedOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ordering stopped at theta0={} eps={} after {} ranks (candidates x={} nu={:e}, x={} nu={:e})",
            self.theta0,
            self.epsilon,
            self.ranked.len(),
            self.upper_candidate.0,
            self.upper_candidate.1,
            self.lower_candidate.0,
            self.lower_candidate.1
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0}")]
    OrderingStopped(Box<StoppedOrdering>),

    #[error("x={x} is not in the ranked support (0..={bound})")]
    NotInSupport { x: u64, bound: u64 },

    #[error("plausibility level set is empty for x={x} at alpha={alpha}")]
    EmptyLevelSet { x: u64, alpha: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("series for {0} did not converge")]
    NoConvergence(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
