//! Inferential models for the mean of a Poisson distribution.
//!
//! The crate covers the one-sided optimal belief/plausibility pair, the
//! recursive score-balanced ordering of the sample space used for point
//! assertions, plausibility curves and intervals, the constrained
//! signal-plus-background variant (EB-SB), two textbook baselines, and a
//! Monte Carlo harness that produces validity, coverage and width tables.
//!
//! ```
//! use impois::{im::one_sided, Assertion};
//!
//! let pair = one_sided(3, &Assertion::greater(2.0).unwrap()).unwrap();
//! assert!((pair.belief - 0.6766764).abs() < 1e-6);
//! assert!((pair.plausibility - 0.8571235).abs() < 1e-6);
//! ```

pub mod baselines;
pub mod constrained;
pub mod csv;
pub mod dist;
pub mod error;
pub mod experiments;
pub mod im;
pub mod ordering;
pub mod rng;
pub mod two_sided;

pub use constrained::ConstraintSpec;
pub use error::{Error, Result, StoppedOrdering};
pub use im::{Assertion, AssertionKind, BeliefPair};
pub use ordering::{Diagnostics, Ranking, DEFAULT_EPSILON};
pub use two_sided::{PlausibilityCurve, PlausibilityInterval};
