//! Exact one-shot channel simulation and private-mechanism compression built
//! on exponential and Poisson functional representations, together with
//! Monte-Carlo evaluators for one-shot network-coding and secrecy bounds.
//!
//! The crate is organised around a single idea: a shared, jumpable random
//! stream lets an encoder and a decoder reconstruct the same infinite
//! codebook, so the encoder can communicate a single integer index and the
//! decoder can recover a sample that follows the target conditional
//! distribution *exactly*.
//!
//! Modules:
//!
//! * [`rng`] — deterministic, splittable, jumpable pseudorandom streams.
//! * [`pfr`] — discrete exponential functional representation: argmin/rank
//!   selection over i.i.d. Exp(1) marks, distribution refinement, and
//!   mismatch estimators.
//! * [`intcodes`] — prefix-free integer codes (Elias delta, Zipf–Shannon
//!   lengths) used to account for the size of transmitted indices.
//! * [`ppr`] — the Poisson private representation: an exact channel-simulation
//!   encoder whose index distribution is a soft selection
//!   `Pr(K=k) ∝ T̃_k^{-α}`, giving differential-privacy guarantees for the
//!   transmitted index on top of exact simulation.
//! * [`mechanisms`] — Gaussian and Laplace mechanisms, density-ratio bounds,
//!   privacy calibration (including a Rényi accountant), and baselines.
//! * [`adn`] — one-shot coding schemes over acyclic discrete networks with
//!   Monte-Carlo bound evaluation and classical presets (point-to-point,
//!   Gelfand–Pinsker, Wyner–Ziv, MAC, broadcast, relay, cascade).
//! * [`secrecy`] — covering numbers for channel families and one-shot
//!   information-hiding / compound-wiretap schemes with bound evaluators.
//! * [`dme`] — a distributed mean-estimation harness comparing the
//!   compressed Gaussian mechanism against baselines, plus a
//!   metric-privacy experiment.
//! * [`numeric`] — special functions and statistical test helpers shared by
//!   the other modules.

pub mod adn;
pub mod dme;
pub mod intcodes;
pub mod mechanisms;
pub mod numeric;
pub mod pfr;
pub mod ppr;
pub mod rng;
pub mod secrecy;

/// Crate-wide error type.
///
/// Programmer errors (violating documented preconditions that are cheap to
/// check) are reported as [`Error::InvalidParameter`]; data-dependent runtime
/// failures get their own variants so callers can react to them.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A documented precondition on an argument was violated.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An observed density ratio exceeded the certified upper bound.
    /// Continuing would silently corrupt the output distribution, so this is
    /// a hard error.
    #[error("observed density ratio {observed} exceeds certified bound {bound}")]
    RatioBoundExceeded { observed: f64, bound: f64 },

    /// A density ratio evaluated to NaN, infinity, or a negative value.
    #[error("density ratio evaluated to a non-finite or negative value: {0}")]
    NonFiniteRatio(f64),

    /// A bit budget cannot be met by any feasible parameter choice.
    #[error("infeasible bit budget: {0}")]
    InfeasibleBudget(String),

    /// A bit string failed to parse as a codeword.
    #[error("malformed bit string: {0}")]
    MalformedBits(String),

    /// A dense probability table would exceed the configured entry cap.
    #[error("alphabet too large: {0}")]
    AlphabetOverflow(String),

    /// Numerical certification of a bound failed.
    #[error("certification failure: {0}")]
    Certification(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Convenience constructor for precondition violations.
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
