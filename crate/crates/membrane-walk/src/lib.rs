//! Simulation library for standard random walks on `Z^d` that are locally
//! perturbed on a finite membrane.
//!
//! Off the membrane the chain steps like an ordinary random walk with i.i.d.
//! increments; on a membrane point it is kicked by a point-specific jump law.
//! The crate provides
//!
//! * exact samplers and tail/moment functions for the jump laws involved,
//!   including a radial law whose sup-norm tail is `a / log log t`,
//! * a walk engine built on the pathwise coupled representation
//!   `X(n) = X(0) + S_xi(n - T(n)) + sum_x S_eta_x(T_x(n))`,
//! * exact (non Monte Carlo) oracles: n-step convolution grids, the renewal
//!   recursion for first-return tails, period and local-limit constants,
//! * a statistics kit (KS distances, skew Brownian reference CDF, quantiles,
//!   confidence intervals) and a set of scaling-limit experiments,
//! * a config-driven experiment runner with deterministic, worker-count
//!   independent CSV/JSON outputs.
//!
//! Replicates fan out with rayon by default; building with
//! `--no-default-features` selects the sequential fallback, which produces
//! bit-identical results.

pub mod condition;
pub mod config;
pub mod exec;
pub mod experiments;
pub mod lattice;
pub mod law;
pub mod numeric;
pub mod oracle;
pub mod output;
pub mod rng;
pub mod stats;
pub mod subgroup;
pub mod walker;

pub use lattice::{CovarianceMatrix, LatticeError, LatticePoint, Membrane, Norm};
pub use law::{JumpLaw, LawError};
pub use rng::{CounterRng, StreamFamily, StreamKey};
pub use walker::{RunKey, TrajectorySummary, WalkConfig, WalkError};
