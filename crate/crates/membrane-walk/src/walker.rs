//! The perturbed-walk state machine.
//!
//! The engine realizes the chain pathwise through independent increment
//! families: one stream of base increments, plus one stream of kick
//! increments per membrane point. A step from a membrane point `x` consumes
//! the next unused kick of its family, so the identity
//!
//! ```text
//! X(n) = X(0) + S_xi(n - T(n)) + sum_{x in A} S_eta_x(T_x(n))
//! ```
//!
//! holds exactly at every step, where `T_x(n)` counts visits to `x` among
//! times `0..n-1` and `T(n)` is their sum. [`coupled_run`] retains the full
//! ledger so the identity can be replayed and verified; [`run`] produces the
//! identical path without the ledger.

use crate::lattice::{sup_norm, LatticeError, LatticePoint, Membrane};
use crate::law::{Draw, JumpLaw};
use crate::rng::{CounterRng, StreamFamily, StreamKey};
use thiserror::Error;

/// Guard on retained path length (`record_full_path` and coupled ledgers).
pub const PATH_GUARD: u64 = 10_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error("invalid walk config: {0}")]
    InvalidConfig(String),
    #[error("coordinate overflow at step {time}")]
    Overflow { time: u64 },
    #[error("saturated kick at step {time} with abort_on_saturation set")]
    SaturationAbort { time: u64 },
    #[error("path recording beyond the {PATH_GUARD}-point guard")]
    PathGuard,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Identity of one replicate; every increment family derives its stream
/// from this key plus a family tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunKey {
    pub seed: u64,
    pub experiment: u64,
    pub phase: u64,
    pub replicate: u64,
}

impl RunKey {
    pub fn stream(&self, family: StreamFamily) -> StreamKey {
        StreamKey {
            seed: self.seed,
            experiment: self.experiment,
            phase: self.phase,
            replicate: self.replicate,
            family,
        }
    }
}

#[derive(Clone, Debug)]
pub struct WalkConfig {
    pub start: LatticePoint,
    pub base: JumpLaw,
    pub membrane: Membrane,
    /// Maximum number of steps to execute (`>= 1`).
    pub horizon: u64,
    /// Optional hitting set `B`: the run records the first-hit time
    /// `tau_B >= 1` (and `sigma_B >= 0`) and stops when it fires.
    pub hitting_set: Option<Vec<LatticePoint>>,
    /// Optional radius stop: the run ends once `sup_norm(X(k)) > r`.
    pub radius_stop: Option<u64>,
    /// Sorted strictly increasing times at which position and occupation
    /// are recorded.
    pub checkpoints: Vec<u64>,
    pub record_full_path: bool,
    pub abort_on_saturation: bool,
}

impl WalkConfig {
    pub fn new(start: LatticePoint, base: JumpLaw, membrane: Membrane, horizon: u64) -> Self {
        Self {
            start,
            base,
            membrane,
            horizon,
            hitting_set: None,
            radius_stop: None,
            checkpoints: Vec::new(),
            record_full_path: false,
            abort_on_saturation: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.start.dim()
    }

    pub fn validate(&self) -> Result<(), WalkError> {
        let dim = self.start.dim();
        if self.horizon == 0 {
            return Err(WalkError::InvalidConfig("horizon must be >= 1".into()));
        }
        if self.base.dim() != dim {
            return Err(WalkError::InvalidConfig(format!(
                "base law dimension {} vs start dimension {dim}",
                self.base.dim()
            )));
        }
        for p in self.membrane.points() {
            if p.dim() != dim {
                return Err(WalkError::InvalidConfig(
                    "membrane point dimension mismatch".into(),
                ));
            }
        }
        for law in self.membrane.laws() {
            if law.dim() != dim {
                return Err(WalkError::InvalidConfig(
                    "membrane law dimension mismatch".into(),
                ));
            }
        }
        if let Some(b) = &self.hitting_set {
            if b.iter().any(|p| p.dim() != dim) {
                return Err(WalkError::InvalidConfig(
                    "hitting set dimension mismatch".into(),
                ));
            }
        }
        if self
            .checkpoints
            .windows(2)
            .any(|w| w[0] >= w[1])
        {
            return Err(WalkError::InvalidConfig(
                "checkpoints must be strictly increasing".into(),
            ));
        }
        if self.checkpoints.last().is_some_and(|&c| c > self.horizon) {
            return Err(WalkError::InvalidConfig(
                "checkpoints must not exceed the horizon".into(),
            ));
        }
        if self.record_full_path && self.horizon >= PATH_GUARD {
            return Err(WalkError::PathGuard);
        }
        Ok(())
    }
}

/// Why the run ended. When several rules fire on the same step the recorded
/// reason follows the fixed priority horizon < radius < hitting set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Horizon,
    RadiusExceeded,
    HitSet,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Checkpoint {
    pub step: u64,
    pub position: LatticePoint,
    /// `T(step)`: visits to the membrane among times `0..step-1`.
    pub occupation_total: u64,
}

/// Visit counts per membrane point (`T_x(n)`) and their sum (`T(n)`),
/// counting times `0..n-1` where `n` is the number of executed steps.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OccupationCounters {
    pub per_point: Vec<u64>,
    pub total: u64,
}

impl OccupationCounters {
    /// Count for a membrane point; `None` marks a point absent from `A`.
    pub fn of(&self, membrane: &Membrane, p: &LatticePoint) -> Option<u64> {
        membrane.index_of(p).map(|i| self.per_point[i])
    }
}

/// A kick whose radius exceeded the representable range; the walker applied
/// a clamped displacement and kept going (unless configured to abort).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaturationEvent {
    /// Time index of the post-kick position.
    pub time: u64,
    /// Membrane index of the kick law, `None` for the base law.
    pub source: Option<usize>,
    /// Exact `log log` of the sampled real-valued radius.
    pub ln_ln_radius: f64,
}

#[derive(Clone, Debug)]
pub struct TrajectorySummary {
    pub final_position: LatticePoint,
    pub steps_executed: u64,
    pub stop: StopReason,
    pub checkpoints: Vec<Checkpoint>,
    pub occupation: OccupationCounters,
    /// First `k >= 1` with `X(k) in B`.
    pub first_hit: Option<u64>,
    /// First `k >= 0` with `X(k) in B`.
    pub first_entry: Option<u64>,
    /// `max_{k <= steps} sup_norm(X(k))`; saturated kicks contribute the
    /// clamped magnitude.
    pub running_max: u64,
    pub saturations: Vec<SaturationEvent>,
    pub path: Option<Vec<LatticePoint>>,
}

impl TrajectorySummary {
    /// True when the recorded maximum exceeds `threshold`, treating any
    /// saturated kick as exceeding every desk-scale threshold.
    pub fn max_exceeds(&self, threshold: u64) -> bool {
        self.running_max > threshold
    }
}

/// Full increment ledger of a coupled run. Saturated kicks enter as their
/// clamped displacements, so the replay identity stays exact in integers.
#[derive(Clone, Debug)]
pub struct CouplingLedger {
    pub start: LatticePoint,
    /// `X(0..=steps)`.
    pub positions: Vec<LatticePoint>,
    /// Base increments in consumption order.
    pub base_draws: Vec<LatticePoint>,
    /// Kick increments per membrane point in consumption order.
    pub kick_draws: Vec<Vec<LatticePoint>>,
}

#[derive(Debug, Error, PartialEq)]
pub enum CouplingViolation {
    #[error("representation identity fails at step {time}: expected {expected:?}, found {found:?}")]
    Identity {
        time: u64,
        expected: LatticePoint,
        found: LatticePoint,
    },
    #[error("ledger shorter than the recorded path")]
    Truncated,
}

impl CouplingLedger {
    /// Replay the representation identity at every recorded step, computing
    /// the occupation counters independently from path membership.
    #[allow(clippy::result_large_err)] // diagnostics payload, cold path
    pub fn verify(&self, membrane: &Membrane) -> Result<(), CouplingViolation> {
        let dim = self.start.dim();
        let mut per_point = vec![0usize; membrane.len()];
        let mut total = 0usize;
        let mut base_sum = LatticePoint::origin(dim);
        let mut kick_sums = vec![LatticePoint::origin(dim); membrane.len()];
        for (n, expected) in self.positions.iter().enumerate() {
            // S_xi(n - T(n)) + sum_x S_eta_x(T_x(n)), built incrementally
            if n > 0 {
                let prev = self.positions[n - 1];
                match membrane.index_of(&prev) {
                    Some(i) => {
                        let draw = self.kick_draws[i]
                            .get(per_point[i])
                            .ok_or(CouplingViolation::Truncated)?;
                        kick_sums[i] = kick_sums[i]
                            .checked_add(draw)
                            .map_err(|_| CouplingViolation::Truncated)?;
                        per_point[i] += 1;
                        total += 1;
                    }
                    None => {
                        let draw = self
                            .base_draws
                            .get(n - 1 - total)
                            .ok_or(CouplingViolation::Truncated)?;
                        base_sum = base_sum
                            .checked_add(draw)
                            .map_err(|_| CouplingViolation::Truncated)?;
                    }
                }
            }
            let mut reconstructed = self
                .start
                .checked_add(&base_sum)
                .map_err(|_| CouplingViolation::Truncated)?;
            for ks in &kick_sums {
                reconstructed = reconstructed
                    .checked_add(ks)
                    .map_err(|_| CouplingViolation::Truncated)?;
            }
            if reconstructed != *expected {
                return Err(CouplingViolation::Identity {
                    time: n as u64,
                    expected: *expected,
                    found: reconstructed,
                });
            }
        }
        Ok(())
    }
}

/// Result of a single transition of the kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub position: LatticePoint,
    /// Set when the sampled kick radius exceeded the representable range
    /// and the clamped displacement was applied instead.
    pub saturation: Option<crate::law::SaturationDraw>,
}

/// One transition of the perturbed kernel: an increment of the base law off
/// the membrane, a kick of the point's own law on it. The full runs use one
/// stream per increment family instead of a single `rng`; this standalone
/// kernel serves single-transition checks.
pub fn step(
    position: &LatticePoint,
    membrane: &Membrane,
    base: &JumpLaw,
    rng: &mut CounterRng,
) -> Result<StepOutcome, WalkError> {
    let law = membrane.law_of(position).unwrap_or(base);
    let (displacement, saturation) = match law.sample(rng) {
        Draw::Step(s) => (s, None),
        Draw::Saturated(sd) => (sd.clamped_step(position.dim()), Some(sd)),
    };
    let position = position
        .checked_add(&displacement)
        .map_err(|_| WalkError::Overflow { time: 1 })?;
    Ok(StepOutcome {
        position,
        saturation,
    })
}

enum EngineMode {
    Plain,
    Coupled,
    Auxiliary(LatticePoint),
}

/// Execute the chain; all summary fields are populated per their
/// definitions and the result is a pure function of `(config, key)`.
pub fn run(config: &WalkConfig, key: RunKey) -> Result<TrajectorySummary, WalkError> {
    run_engine(config, key, EngineMode::Plain).map(|(s, _)| s)
}

/// Execute the chain and retain the increment ledger of the coupled
/// representation.
pub fn coupled_run(
    config: &WalkConfig,
    key: RunKey,
) -> Result<(TrajectorySummary, CouplingLedger), WalkError> {
    if config.horizon >= PATH_GUARD {
        return Err(WalkError::PathGuard);
    }
    let (summary, ledger) = run_engine(config, key, EngineMode::Coupled)?;
    Ok((summary, ledger.expect("coupled mode retains the ledger")))
}

/// Variant chain that jumps to the fixed state `v` from every membrane
/// point (consuming no randomness on those steps); identical in law to
/// [`run`] when the membrane is empty.
pub fn run_auxiliary(
    config: &WalkConfig,
    v: LatticePoint,
    key: RunKey,
) -> Result<TrajectorySummary, WalkError> {
    if config.membrane.index_of(&v).is_some() {
        return Err(WalkError::InvalidConfig(
            "auxiliary target v must lie outside the membrane".into(),
        ));
    }
    if v.dim() != config.dim() {
        return Err(WalkError::InvalidConfig(
            "auxiliary target dimension mismatch".into(),
        ));
    }
    run_engine(config, key, EngineMode::Auxiliary(v)).map(|(s, _)| s)
}

fn run_engine(
    config: &WalkConfig,
    key: RunKey,
    mode: EngineMode,
) -> Result<(TrajectorySummary, Option<CouplingLedger>), WalkError> {
    config.validate()?;
    let dim = config.dim();
    let membrane = &config.membrane;
    let coupled = matches!(mode, EngineMode::Coupled);

    let mut base_rng = CounterRng::new(key.stream(StreamFamily::Base));
    let mut kick_rngs: Vec<CounterRng> = (0..membrane.len())
        .map(|i| CounterRng::new(key.stream(StreamFamily::Membrane(i))))
        .collect();

    let mut pos = config.start;
    let mut time: u64 = 0;
    let mut occupation = OccupationCounters {
        per_point: vec![0; membrane.len()],
        total: 0,
    };
    let mut running_max = sup_norm(&pos);
    let mut saturations = Vec::new();
    let mut first_hit: Option<u64> = None;
    let in_set = |p: &LatticePoint, set: &Option<Vec<LatticePoint>>| {
        set.as_ref().is_some_and(|b| b.contains(p))
    };
    let mut first_entry: Option<u64> = if in_set(&pos, &config.hitting_set) {
        Some(0)
    } else {
        None
    };

    let mut checkpoints = Vec::with_capacity(config.checkpoints.len());
    let mut next_cp = config.checkpoints.iter().copied().peekable();
    if next_cp.peek() == Some(&0) {
        next_cp.next();
        checkpoints.push(Checkpoint {
            step: 0,
            position: pos,
            occupation_total: 0,
        });
    }

    let mut path = if config.record_full_path || coupled {
        let mut v = Vec::with_capacity(config.horizon as usize + 1);
        v.push(pos);
        Some(v)
    } else {
        None
    };
    let mut ledger = if coupled {
        Some(CouplingLedger {
            start: pos,
            positions: Vec::new(),
            base_draws: Vec::new(),
            kick_draws: vec![Vec::new(); membrane.len()],
        })
    } else {
        None
    };

    let stop = loop {
        // the position at `time` is visited now; it counts into T(time+1)
        let membrane_idx = membrane.index_of(&pos);
        if let Some(i) = membrane_idx {
            occupation.per_point[i] += 1;
            occupation.total += 1;
        }

        // one transition
        let step: LatticePoint = match (&mode, membrane_idx) {
            (EngineMode::Auxiliary(v), Some(_)) => v.checked_sub(&pos).map_err(|_| {
                WalkError::Overflow { time: time + 1 }
            })?,
            (_, Some(i)) => match membrane.law(i).sample(&mut kick_rngs[i]) {
                Draw::Step(s) => s,
                Draw::Saturated(sd) => {
                    saturations.push(SaturationEvent {
                        time: time + 1,
                        source: Some(i),
                        ln_ln_radius: sd.ln_ln_radius,
                    });
                    if config.abort_on_saturation {
                        return Err(WalkError::SaturationAbort { time: time + 1 });
                    }
                    sd.clamped_step(dim)
                }
            },
            (_, None) => match config.base.sample(&mut base_rng) {
                Draw::Step(s) => s,
                Draw::Saturated(sd) => {
                    saturations.push(SaturationEvent {
                        time: time + 1,
                        source: None,
                        ln_ln_radius: sd.ln_ln_radius,
                    });
                    if config.abort_on_saturation {
                        return Err(WalkError::SaturationAbort { time: time + 1 });
                    }
                    sd.clamped_step(dim)
                }
            },
        };
        if let Some(l) = ledger.as_mut() {
            match membrane_idx {
                Some(i) => l.kick_draws[i].push(step),
                None => l.base_draws.push(step),
            }
        }
        pos = pos
            .checked_add(&step)
            .map_err(|_| WalkError::Overflow { time: time + 1 })?;
        time += 1;

        running_max = running_max.max(sup_norm(&pos));
        if let Some(p) = path.as_mut() {
            p.push(pos);
        }
        let hit_now = in_set(&pos, &config.hitting_set);
        if hit_now && first_hit.is_none() {
            first_hit = Some(time);
            if first_entry.is_none() {
                first_entry = Some(time);
            }
        }
        if next_cp.peek() == Some(&time) {
            next_cp.next();
            checkpoints.push(Checkpoint {
                step: time,
                position: pos,
                occupation_total: occupation.total,
            });
        }

        // stop rules, fixed priority
        if time >= config.horizon {
            break StopReason::Horizon;
        }
        if config.radius_stop.is_some_and(|r| sup_norm(&pos) > r) {
            break StopReason::RadiusExceeded;
        }
        if hit_now {
            break StopReason::HitSet;
        }
    };

    if let Some(l) = ledger.as_mut() {
        l.positions = path.clone().expect("coupled mode records the path");
    }
    let path = if config.record_full_path { path } else { None };
    Ok((
        TrajectorySummary {
            final_position: pos,
            steps_executed: time,
            stop,
            checkpoints,
            occupation,
            first_hit,
            first_entry,
            running_max,
            saturations,
            path,
        },
        ledger,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(c: &[i64]) -> LatticePoint {
        LatticePoint::new(c).unwrap()
    }

    fn key(replicate: u64) -> RunKey {
        RunKey {
            seed: 99,
            experiment: 0,
            phase: 0,
            replicate,
        }
    }

    fn simple_config(horizon: u64) -> WalkConfig {
        WalkConfig::new(
            point(&[0, 0]),
            JumpLaw::simple_neighbor(2).unwrap(),
            Membrane::empty(),
            horizon,
        )
    }

    #[test]
    fn step_kernel_dispatches_on_the_membrane() {
        let membrane = Membrane::new(vec![(
            point(&[0, 0]),
            JumpLaw::deterministic(point(&[7, 0])),
        )])
        .unwrap();
        let base = JumpLaw::simple_neighbor(2).unwrap();
        let mut rng = crate::rng::CounterRng::from_words(&[5]);

        // off the membrane: a base increment of sup norm 1
        let from_outside = step(&point(&[5, 5]), &membrane, &base, &mut rng).unwrap();
        assert_eq!(
            crate::lattice::sup_norm(&from_outside.position.checked_sub(&point(&[5, 5])).unwrap()),
            1
        );
        // on the membrane: the deterministic kick
        let from_membrane = step(&point(&[0, 0]), &membrane, &base, &mut rng).unwrap();
        assert_eq!(from_membrane.position, point(&[7, 0]));
        assert!(from_membrane.saturation.is_none());

        // empty membrane reduces to the standard walk for every position
        let empty = Membrane::empty();
        let outcome = step(&point(&[0, 0]), &empty, &base, &mut rng).unwrap();
        assert_eq!(crate::lattice::sup_norm(&outcome.position), 1);
    }

    #[test]
    fn auxiliary_with_empty_membrane_equals_run() {
        let config = simple_config(2_000);
        let v = point(&[9, 9]);
        let plain = run(&config, key(6)).unwrap();
        let aux = run_auxiliary(&config, v, key(6)).unwrap();
        assert_eq!(plain.final_position, aux.final_position);
        assert_eq!(plain.running_max, aux.running_max);
    }

    #[test]
    fn horizon_one_with_empty_membrane() {
        let summary = run(&simple_config(1), key(0)).unwrap();
        assert_eq!(summary.steps_executed, 1);
        assert_eq!(summary.occupation.total, 0);
        assert_eq!(summary.stop, StopReason::Horizon);
    }

    #[test]
    fn start_on_membrane_counts_at_time_zero() {
        let mut config = simple_config(1);
        config.membrane = Membrane::new(vec![(
            point(&[0, 0]),
            JumpLaw::deterministic(point(&[7, 0])),
        )])
        .unwrap();
        let summary = run(&config, key(0)).unwrap();
        assert_eq!(summary.occupation.total, 1);
        assert_eq!(summary.occupation.per_point, vec![1]);
        assert_eq!(summary.final_position, point(&[7, 0]));
    }

    #[test]
    fn hitting_own_start_records_sigma_zero_and_tau_return() {
        let mut config = simple_config(10_000);
        config.hitting_set = Some(vec![point(&[0, 0])]);
        let summary = run(&config, key(1)).unwrap();
        assert_eq!(summary.first_entry, Some(0));
        if let Some(tau) = summary.first_hit {
            assert!(tau >= 1);
            assert_eq!(summary.stop, StopReason::HitSet);
            assert_eq!(summary.final_position, point(&[0, 0]));
            assert_eq!(summary.steps_executed, tau);
        } else {
            assert_eq!(summary.stop, StopReason::Horizon);
        }
    }

    #[test]
    fn runs_are_deterministic_in_the_key() {
        let mut config = simple_config(5_000);
        config.membrane = Membrane::new(vec![(
            point(&[1, 1]),
            JumpLaw::simple_neighbor(2).unwrap(),
        )])
        .unwrap();
        config.checkpoints = vec![100, 5_000];
        let a = run(&config, key(7)).unwrap();
        let b = run(&config, key(7)).unwrap();
        assert_eq!(a.final_position, b.final_position);
        assert_eq!(a.occupation, b.occupation);
        assert_eq!(a.checkpoints, b.checkpoints);
        let c = run(&config, key(8)).unwrap();
        assert!(
            c.final_position != a.final_position || c.occupation != a.occupation,
            "distinct replicates should decorrelate"
        );
    }

    #[test]
    fn empty_membrane_run_equals_coupled_run() {
        let mut config = simple_config(2_000);
        config.record_full_path = true;
        let plain = run(&config, key(3)).unwrap();
        let (coupled, ledger) = coupled_run(&config, key(3)).unwrap();
        assert_eq!(plain.final_position, coupled.final_position);
        assert_eq!(plain.path.as_ref().unwrap(), &ledger.positions);
        ledger.verify(&config.membrane).unwrap();
    }

    #[test]
    fn coupling_identity_with_membrane() {
        let mut config = simple_config(3_000);
        config.membrane = Membrane::new(vec![
            (point(&[0, 0]), JumpLaw::deterministic(point(&[2, 1]))),
            (
                point(&[1, 0]),
                JumpLaw::categorical(vec![(point(&[-1, 0]), 0.5), (point(&[0, 1]), 0.5)])
                    .unwrap(),
            ),
        ])
        .unwrap();
        let (summary, ledger) = coupled_run(&config, key(11)).unwrap();
        assert!(summary.occupation.total > 0, "walk should revisit the membrane");
        ledger.verify(&config.membrane).unwrap();
    }

    #[test]
    fn one_visit_consumes_the_first_kick() {
        let mut config = simple_config(1);
        config.membrane = Membrane::new(vec![(
            point(&[0, 0]),
            JumpLaw::simple_neighbor(2).unwrap(),
        )])
        .unwrap();
        let (summary, ledger) = coupled_run(&config, key(5)).unwrap();
        assert_eq!(ledger.kick_draws[0].len(), 1);
        assert_eq!(
            summary.final_position,
            point(&[0, 0]).checked_add(&ledger.kick_draws[0][0]).unwrap()
        );
    }

    #[test]
    fn auxiliary_chain_jumps_to_v_from_the_membrane() {
        let mut config = simple_config(1);
        config.membrane = Membrane::new(vec![(
            point(&[0, 0]),
            JumpLaw::simple_neighbor(2).unwrap(),
        )])
        .unwrap();
        let v = point(&[3, 4]);
        let summary = run_auxiliary(&config, v, key(0)).unwrap();
        assert_eq!(summary.final_position, v);

        // v inside the membrane is rejected
        assert!(run_auxiliary(&config, point(&[0, 0]), key(0)).is_err());
    }

    #[test]
    fn auxiliary_occupation_counts_arrivals() {
        let mut config = simple_config(20_000);
        config.membrane = Membrane::new(vec![(
            point(&[0, 0]),
            JumpLaw::simple_neighbor(2).unwrap(),
        )])
        .unwrap();
        config.record_full_path = true;
        let v = point(&[1, 1]);
        let summary = run_auxiliary(&config, v, key(21)).unwrap();
        let path = summary.path.as_ref().unwrap();
        let arrivals = path[..path.len() - 1]
            .iter()
            .filter(|p| **p == point(&[0, 0]))
            .count() as u64;
        assert_eq!(summary.occupation.total, arrivals);
        assert!(arrivals > 0);
    }

    #[test]
    fn occupation_is_monotone_along_checkpoints() {
        let mut config = simple_config(10_000);
        config.membrane = Membrane::new(vec![(
            point(&[0, 0]),
            JumpLaw::simple_neighbor(2).unwrap(),
        )])
        .unwrap();
        config.checkpoints = (1..=10).map(|k| k * 1_000).collect();
        let summary = run(&config, key(2)).unwrap();
        for w in summary.checkpoints.windows(2) {
            assert!(w[1].occupation_total >= w[0].occupation_total);
            let free0 = w[0].step - w[0].occupation_total;
            let free1 = w[1].step - w[1].occupation_total;
            assert!(free1 >= free0, "n - T(n) must be nondecreasing");
        }
    }

    #[test]
    fn radius_stop_fires() {
        let mut config = simple_config(1_000_000);
        config.radius_stop = Some(10);
        let summary = run(&config, key(4)).unwrap();
        assert_eq!(summary.stop, StopReason::RadiusExceeded);
        assert!(summary.running_max > 10);
        assert!(summary.steps_executed < 1_000_000);
    }

    #[test]
    fn saturated_kick_is_recorded_and_run_continues() {
        let mut config = simple_config(50);
        config.membrane = Membrane::new(vec![(
            point(&[0, 0]),
            JumpLaw::log_log_radial(1.0).unwrap(),
        )])
        .unwrap();
        // scan replicates until one saturates on the first kick (probability ~0.26)
        let mut saturated = None;
        for rep in 0..64 {
            let summary = run(&config, key(rep)).unwrap();
            if !summary.saturations.is_empty() {
                saturated = Some(summary);
                break;
            }
        }
        let summary = saturated.expect("a saturated kick should occur within 64 replicates");
        assert_eq!(summary.stop, StopReason::Horizon);
        assert!(summary.running_max >= crate::law::SATURATED_MAG as u64);
        let ev = summary.saturations[0];
        assert_eq!(ev.source, Some(0));
        assert!(ev.ln_ln_radius > 3.7);

        config.abort_on_saturation = true;
        let mut aborted = false;
        for rep in 0..64 {
            if matches!(
                run(&config, key(rep)),
                Err(WalkError::SaturationAbort { .. })
            ) {
                aborted = true;
                break;
            }
        }
        assert!(aborted);
    }

    #[test]
    fn config_validation_rejects_bad_inputs() {
        let mut config = simple_config(0);
        assert!(matches!(
            run(&config, key(0)),
            Err(WalkError::InvalidConfig(_))
        ));
        config.horizon = 10;
        config.checkpoints = vec![5, 5];
        assert!(run(&config, key(0)).is_err());
        config.checkpoints = vec![5, 20];
        assert!(run(&config, key(0)).is_err());
    }
}
