//! The heavy-tail counterexample: kicks with tail `a / log log t` make
//! `P{max_{k<=n} |X(k)| > n}` stay bounded away from zero, so the scaled
//! walk has no distributional limit. Sup norm throughout.

use super::{ExperimentError, ExperimentResult, Flag, PlotSeries, RunContext, StatRow};
use crate::exec::map_replicates;
use crate::lattice::{LatticePoint, Membrane, Norm};
use crate::law::JumpLaw;
use crate::oracle::{counterexample_first_term, counterexample_first_term_limit};
use crate::stats::binomial_ci;
use crate::walker::{run, WalkConfig};

#[derive(Clone, Debug)]
pub struct CounterexampleSpec {
    /// Tail scale `a` of the log-log kick law.
    pub scale: f64,
    pub horizons: Vec<u64>,
    /// Replicates per horizon (aligned with `horizons`).
    pub replicates: Vec<u64>,
    /// The lower confidence bound of every estimate must clear this floor.
    pub floor: f64,
    pub confidence_z: f64,
}

impl CounterexampleSpec {
    fn validate(&self) -> Result<(), ExperimentError> {
        if self.horizons.is_empty() || self.horizons.len() != self.replicates.len() {
            return Err(ExperimentError::Precondition(
                "horizons and replicate counts must align".into(),
            ));
        }
        if self.replicates.iter().any(|&r| r < 100) {
            return Err(ExperimentError::Precondition(
                "replicate count must be at least 100".into(),
            ));
        }
        Ok(())
    }
}

pub fn run_counterexample(
    spec: &CounterexampleSpec,
    ctx: RunContext,
) -> Result<ExperimentResult, ExperimentError> {
    spec.validate()?;
    let kick = JumpLaw::log_log_radial(spec.scale)?;
    let tail = {
        let law = kick.clone();
        move |t: f64| law.tail(t, Norm::Sup).expect("positive threshold").mid()
    };
    let origin = LatticePoint::origin(2);
    let membrane = Membrane::new(vec![(origin, kick)])?;
    let base = JumpLaw::simple_neighbor(2)?;

    let mut rows = Vec::new();
    let mut plot = Vec::new();
    let mut flags = Vec::new();
    let mut notes = Vec::new();

    for (idx, (&n, &reps)) in spec.horizons.iter().zip(&spec.replicates).enumerate() {
        let mut config = WalkConfig::new(origin, base.clone(), membrane.clone(), n);
        // early exit: the event is decided as soon as the max clears n
        config.radius_stop = Some(n);
        let exceed: u64 = map_replicates(reps, |rep| {
            let summary = run(&config, ctx.key(idx as u64, rep)).expect("validated config");
            u64::from(summary.max_exceeds(n))
        })
        .into_iter()
        .sum();
        let (p_hat, lo, hi) = binomial_ci(exceed, reps, spec.confidence_z)?;
        rows.push(StatRow::band(n, "max_exceeds_horizon", p_hat, lo, hi));
        plot.push((n as f64, p_hat, lo, hi));
        flags.push(Flag::new(
            format!("liminf_floor_n{n}"),
            lo >= spec.floor,
            lo,
            spec.floor,
            format!("P{{max > n}} = {p_hat:.4} from {reps} replicates (99% lower bound {lo:.4})"),
        ));

        match counterexample_first_term(spec.scale, &tail, n) {
            Ok(term) => {
                rows.push(StatRow::point(n, "exact_first_term", term));
            }
            Err(_) => notes.push(format!(
                "n = {n} sits below the kick law's cutoff regime; the closed-form first \
                 term is undefined there"
            )),
        }
    }

    let limit = counterexample_first_term_limit(spec.scale);
    rows.push(StatRow::point(
        *spec.horizons.last().expect("nonempty"),
        "first_term_limit",
        limit,
    ));
    notes.push(format!(
        "closed-form first-term reference: limit (1 - e^(-2a))/2 = {limit:.5} for a = {}",
        spec.scale
    ));

    Ok(ExperimentResult {
        name: String::new(),
        kind: "counterexample",
        claim: "kicks with tail a/loglog t produce early huge jumps: the probability \
                that the running maximum exceeds the horizon stays bounded away from \
                zero, so no scaling limit exists (sup norm)",
        seed: ctx.seed,
        flags,
        rows,
        plots: vec![PlotSeries {
            name: "max_exceeds_horizon".into(),
            rows: plot,
        }],
        notes,
    })
}
