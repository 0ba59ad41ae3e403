//! Scaling-limit experiments.
//!
//! Each experiment draws its replicates from streams keyed by
//! `(seed, experiment index, phase, replicate)`, collects per-replicate
//! summaries in index order and reduces them sequentially; results are
//! therefore identical for any worker count. Pass/fail thresholds are
//! recorded next to the raw statistics so they can be retuned without
//! rerunning.

use crate::condition::ConditionError;
use crate::lattice::LatticeError;
use crate::law::LawError;
use crate::oracle::OracleError;
use crate::stats::StatsError;
use crate::walker::{RunKey, WalkError};
use thiserror::Error;

pub mod counterexample;
pub mod donsker;
pub mod g_ratio;
pub mod occupation;
pub mod return_tail;
pub mod skew;
pub mod transient;

pub use counterexample::{run_counterexample, CounterexampleSpec};
pub use donsker::{run_donsker_preservation, DonskerSpec};
pub use g_ratio::{estimate_g_ratio, GRatioSpec};
pub use occupation::{run_occupation_growth, OccupationSpec};
pub use return_tail::{run_return_tail, ReturnTailSpec};
pub use skew::{run_skew_embedded, SkewSpec};
pub use transient::{run_transient_preservation, TransientSpec};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Seed and experiment position shared by every replicate of one
/// experiment run.
#[derive(Clone, Copy, Debug)]
pub struct RunContext {
    pub seed: u64,
    pub experiment_index: u64,
}

impl RunContext {
    pub fn new(seed: u64, experiment_index: u64) -> Self {
        Self {
            seed,
            experiment_index,
        }
    }

    pub fn key(&self, phase: u64, replicate: u64) -> RunKey {
        RunKey {
            seed: self.seed,
            experiment: self.experiment_index,
            phase,
            replicate,
        }
    }
}

/// One recorded scalar with an uncertainty band.
#[derive(Clone, Debug)]
pub struct StatRow {
    pub horizon: u64,
    pub statistic: String,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl StatRow {
    pub fn point(horizon: u64, statistic: impl Into<String>, value: f64) -> Self {
        Self {
            horizon,
            statistic: statistic.into(),
            value,
            lo: value,
            hi: value,
        }
    }

    pub fn band(
        horizon: u64,
        statistic: impl Into<String>,
        value: f64,
        lo: f64,
        hi: f64,
    ) -> Self {
        Self {
            horizon,
            statistic: statistic.into(),
            value,
            lo,
            hi,
        }
    }
}

/// One pass/fail decision against a pinned threshold.
#[derive(Clone, Debug)]
pub struct Flag {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Flag {
    pub fn new(
        name: impl Into<String>,
        passed: bool,
        value: f64,
        threshold: f64,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            passed,
            value,
            threshold,
            detail: detail.into(),
        }
    }
}

/// Plot-ready series `(x, y, y_lo, y_hi)`.
#[derive(Clone, Debug)]
pub struct PlotSeries {
    pub name: String,
    pub rows: Vec<(f64, f64, f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub name: String,
    pub kind: &'static str,
    /// Short statement of the mathematical claim the experiment tests.
    pub claim: &'static str,
    pub seed: u64,
    pub flags: Vec<Flag>,
    pub rows: Vec<StatRow>,
    pub plots: Vec<PlotSeries>,
    pub notes: Vec<String>,
}

impl ExperimentResult {
    pub fn passed(&self) -> bool {
        self.flags.iter().all(|f| f.passed)
    }
}

/// Family-wise one-sample KS pass at level `alpha` across `tests`
/// per-coordinate statistics (Bonferroni split, which keeps the per-seed
/// pass probability at `1 - alpha` and makes repeated-seed gates
/// well calibrated).
pub fn family_ks_pass(stats: &[f64], alpha: f64, n: usize) -> bool {
    let per_test = alpha / stats.len() as f64;
    let crit = crate::stats::ks_critical_one_sample(per_test, n);
    stats.iter().all(|&d| d < crit)
}

/// Two-sample variant of [`family_ks_pass`].
pub fn family_ks_pass_two_sample(stats: &[f64], alpha: f64, n: usize, m: usize) -> bool {
    let per_test = alpha / stats.len() as f64;
    let crit = crate::stats::ks_critical_two_sample(per_test, n, m);
    stats.iter().all(|&d| d < crit)
}
