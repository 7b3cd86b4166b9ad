//! Best uniform rational approximation of power functions at arbitrary precision.
//!
//! The central object is the minimax error
//!
//! ```text
//! E_mn(f, [a, b]) = inf { sup_{a <= x <= b} |f(x) - p(x)/q(x)| : deg p <= m, deg q <= n }
//! ```
//!
//! for the targets `f(x) = x^alpha` on `[0, 1]` and `f(x) = |x|^alpha` on
//! `[-1, 1]`. These errors decay like `exp(-c sqrt(n))` along near-diagonal
//! sequences, far faster than any polynomial scheme, and the normalized limits
//! are known in closed form:
//!
//! ```text
//! e^{2 pi sqrt(alpha n)} E_nn(x^alpha, [0, 1])      ->  4^{1 + alpha}   |sin(pi alpha)|
//! e^{pi sqrt(alpha n)}   E_nn(|x|^alpha, [-1, 1])   ->  4^{1 + alpha/2} |sin(pi alpha / 2)|
//! ```
//!
//! so that for `|x|` the classical normalized limit is `8`. This crate
//! computes the left-hand sides from scratch and checks them against the
//! right-hand sides:
//!
//! * [`remez`] implements the rational Remez exchange at arbitrary precision
//!   (MPFR-backed, barycentric representation, adaptive reference rescaling),
//!   producing certified equioscillating approximants;
//! * [`oracle`] is an independent discrete minimax solver (differential
//!   correction over a fixed grid, LP subproblems solved exactly) used to
//!   cross-validate the engine at small degrees;
//! * [`asymptotics`] holds the limit constants, error normalization,
//!   sequence extrapolation, and the classical one-sided bounds (Newman,
//!   Bulanov, Vjacheslavov, Gonchar, ...) used as sanity envelopes;
//! * [`transforms`] builds the boundary-value functions that relate the
//!   error of a near-best approximant to an equilibrium problem;
//! * [`potential`] solves that equilibrium problem: a Green-potential
//!   extremal measure on a ray, whose endpoint and mass reproduce the same
//!   `exp(-2 pi sqrt(alpha n))` rate from pure potential theory;
//! * [`harness`] drives batch jobs with caching and powers the thin CLI.
//!
//! # Quick start
//!
//! Compute the best type-(2, 1) approximation of `sqrt(x)` on `[0, 1]` at
//! 128 bits:
//!
//! ```
//! use ratapprox::precision::PrecisionContext;
//! use ratapprox::target::Target;
//! use ratapprox::remez::{best_rational, RemezOptions};
//!
//! let ctx = PrecisionContext::new(128).unwrap();
//! let target = Target::pow_on_01((1, 2)).unwrap();
//! let sol = best_rational(&target, 2, 1, &ctx, &RemezOptions::default()).unwrap();
//! // E_{2,1}(sqrt x) ~ 5.56e-4, with an alternant of 2 + 1 + 2 = 5 points.
//! assert!(sol.error.to_f64() > 5.0e-4 && sol.error.to_f64() < 6.0e-4);
//! assert_eq!(sol.alternant.len(), 5);
//! ```
//!
//! The `examples/` directory exercises every capability end to end; the
//! `ratapprox` binary exposes the same entry points as subcommands.

pub mod asymptotics;
pub mod complex;
pub mod harness;
mod lp;
pub mod oracle;
pub mod potential;
pub mod precision;
pub mod remez;
pub mod target;
pub mod transforms;

/// Crate-wide error type. Variants mirror the ways a computation can be
/// rejected (bad input, domain violation) or can fail to make progress
/// (non-convergence, singular linear algebra).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("precision must be at least {min} bits, got {got}")]
    PrecisionTooLow { got: u32, min: u32 },
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },
    #[error("cannot parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },
    #[error("invalid degrees (m, n) = ({m}, {n}): {detail}")]
    Degree { m: usize, n: usize, detail: String },
    #[error("{stage} did not converge after {iterations} iterations: {detail}")]
    Convergence {
        stage: &'static str,
        iterations: usize,
        detail: String,
    },
    #[error("singular or rank-deficient linear system: {0}")]
    Singular(String),
    #[error("invalid parameter {name}: {detail}")]
    Param { name: &'static str, detail: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
