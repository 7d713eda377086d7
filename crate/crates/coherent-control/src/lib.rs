//! Exact verification of Bellman's principle for stochastic control with
//! control-dependent information, on finite sample spaces.
//!
//! In dynamic stochastic control the controller usually observes only part of
//! what happens, and *what* is observed depends on the control chosen: each
//! admissible control `c` carries its own filtration `G^c`, its own law `P^c`
//! and its own payoff `J(c)`. Conditioning the value process on the wrong
//! (control-independent) filtration silently breaks the supermartingale half
//! of Bellman's principle. This crate makes that phenomenon mechanical and
//! testable:
//!
//! * [`finite`] — σ-fields as atom partitions, probability measures, conditional
//!   expectation and essential suprema in exact rational arithmetic;
//! * [`process`] — discrete-time processes, stopping times, the filtration at a
//!   stopping time, and decidable informational-consistency checks
//!   (generalized Galmarino test, observational consistency, monotonicity of
//!   information, almost-sure variants under completions);
//! * [`control`] — finite control systems with per-control filtrations and
//!   laws: axiom validation, conditional payoff and Bellman systems, the
//!   upwards-lattice property, the supermartingale/martingale principle
//!   (B1–B5) and the minimal-envelope characterisation;
//! * [`models`] — exactly solved model systems: the two-box picking game with
//!   its classical-filtration counterexample, and the optimal-stopping bridge
//!   to the Snell envelope;
//! * [`campaign`] — seeded randomized campaigns hunting for counterexamples to
//!   the theorems above, plus mutation tests that corrupt systems and check
//!   the corruption is caught;
//! * [`mc`] — seeded, reproducible Monte Carlo engines for two continuous-time
//!   games with control-dependent observation: switching between two Brownian
//!   motions, and drift-tracking a Poisson-modulated process.
//!
//! The exact engine never touches floating point; every equality it reports is
//! an equality of rationals. The Monte Carlo engines are deterministic given a
//! seed, independent of the worker-thread count.
//!
//! Most capabilities have a runnable demonstration under `examples/`; the thin
//! `bellman` binary exposes batch verification (`verify`, `galmarino`, `mc`,
//! `example`) for scripting.

pub mod campaign;
pub mod cli;
pub mod control;
pub mod fileio;
pub mod finite;
pub mod mc;
pub mod models;
pub mod process;
pub mod rational;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Operands defined on sample spaces of different sizes.
    #[error("dimension mismatch: expected {expected} outcomes, got {got}")]
    Dimension { expected: usize, got: usize },
    /// A mathematical domain violation (empty family, weights not summing to
    /// one, malformed partition, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Invalid simulation or campaign configuration.
    #[error("config error: {0}")]
    Config(String),
    /// Malformed input text (system files, fraction literals).
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
