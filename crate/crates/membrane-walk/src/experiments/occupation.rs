//! Membrane occupation growth for recurrent planar bases: `T(n) / log n`
//! stays bounded in probability, and the occupation of the jump-to-`v`
//! auxiliary chain is asymptotically exponential.

use super::{ExperimentError, ExperimentResult, Flag, PlotSeries, RunContext, StatRow};
use crate::condition::condition_b_check;
use crate::exec::map_replicates;
use crate::lattice::{LatticePoint, Membrane};
use crate::law::JumpLaw;
use crate::stats::{exponential_qq_correlation, quantile};
use crate::walker::{run, run_auxiliary, WalkConfig};

#[derive(Clone, Debug)]
pub struct OccupationSpec {
    pub base: JumpLaw,
    pub membrane: Membrane,
    pub start: LatticePoint,
    /// Two horizons spanning the decades over which the quantiles of
    /// `T(n)/log n` must stay within a factor of each other.
    pub horizons: (u64, u64),
    pub replicates: u64,
    /// Fixed landing state of the auxiliary chain (outside the membrane).
    pub aux_target: LatticePoint,
    pub aux_replicates: u64,
    pub quantile_ratio_threshold: f64,
    pub qq_min_correlation: f64,
    pub condition_b_radius: i64,
}

impl OccupationSpec {
    fn validate(&self) -> Result<(), ExperimentError> {
        if self.base.dim() != 2 {
            return Err(ExperimentError::Precondition(
                "occupation growth needs a planar base".into(),
            ));
        }
        let (n1, n2) = self.horizons;
        if n1 < 2 || n1 >= n2 {
            return Err(ExperimentError::Precondition(
                "horizons must satisfy 2 <= n1 < n2".into(),
            ));
        }
        if self.replicates < 100 || self.aux_replicates < 100 {
            return Err(ExperimentError::Precondition(
                "replicate count must be at least 100".into(),
            ));
        }
        let (mean, _) = self.base.mean_and_covariance()?;
        if mean.iter().any(|m| m.abs() > 1e-12) {
            return Err(ExperimentError::Precondition(
                "base law must be centered".into(),
            ));
        }
        Ok(())
    }
}

pub fn run_occupation_growth(
    spec: &OccupationSpec,
    ctx: RunContext,
) -> Result<ExperimentResult, ExperimentError> {
    spec.validate()?;
    let (n1, n2) = spec.horizons;
    let mut notes = Vec::new();

    if !spec.membrane.is_empty() {
        let report = condition_b_check(&spec.base, &spec.membrane, spec.condition_b_radius)?;
        if !report.aperiodic || !report.accessibility_ok {
            return Err(ExperimentError::Precondition(format!(
                "Condition B fails: aperiodic = {}, accessibility_ok = {} \
                 (subgroup index {}, {} unreached window points)",
                report.aperiodic,
                report.accessibility_ok,
                report.generated_subgroup_index,
                report.unreached_count
            )));
        }
        notes.push(format!(
            "Condition B verified within radius {}: subgroup index {}, window fully reachable",
            report.search_radius, report.generated_subgroup_index
        ));
    }

    // Phase 0: occupation at both horizons from shared paths.
    let mut config = WalkConfig::new(spec.start, spec.base.clone(), spec.membrane.clone(), n2);
    config.checkpoints = vec![n1, n2];
    let occupations: Vec<(u64, u64)> = map_replicates(spec.replicates, |rep| {
        let summary = run(&config, ctx.key(0, rep)).expect("validated config");
        (
            summary.checkpoints[0].occupation_total,
            summary.checkpoints[1].occupation_total,
        )
    });
    let scaled1: Vec<f64> = occupations
        .iter()
        .map(|&(a, _)| a as f64 / (n1 as f64).ln())
        .collect();
    let scaled2: Vec<f64> = occupations
        .iter()
        .map(|&(_, b)| b as f64 / (n2 as f64).ln())
        .collect();

    let mut rows = Vec::new();
    let mut plots = Vec::new();
    let mut quantile_rows = Vec::new();
    for (&n, sample) in [(&n1, &scaled1), (&n2, &scaled2)] {
        for q in [0.5, 0.9, 0.99] {
            let v = quantile(sample, q)?;
            rows.push(StatRow::point(n, format!("occupation_per_log_q{:02}", (q * 100.0) as u32), v));
            quantile_rows.push((n, q, v));
        }
    }
    let q99_1 = quantile_rows.iter().find(|r| r.0 == n1 && r.1 == 0.99).expect("recorded").2;
    let q99_2 = quantile_rows.iter().find(|r| r.0 == n2 && r.1 == 0.99).expect("recorded").2;
    let ratio = if q99_1 == 0.0 && q99_2 == 0.0 {
        1.0
    } else if q99_1.min(q99_2) == 0.0 {
        f64::INFINITY
    } else {
        (q99_1 / q99_2).max(q99_2 / q99_1)
    };
    plots.push(PlotSeries {
        name: "occupation_quantiles".into(),
        rows: quantile_rows
            .iter()
            .map(|&(n, q, v)| (n as f64, v, q, q))
            .collect(),
    });

    // Phase 1: auxiliary chain occupation against the exponential shape.
    // The scale of the limit is fitted (its constant inherits the
    // return-tail constant ambiguity); the QQ correlation tests shape only.
    let aux_config = WalkConfig::new(spec.start, spec.base.clone(), spec.membrane.clone(), n2);
    let aux_target = spec.aux_target;
    let aux_scaled: Vec<f64> = map_replicates(spec.aux_replicates, |rep| {
        let summary =
            run_auxiliary(&aux_config, aux_target, ctx.key(1, rep)).expect("validated config");
        summary.occupation.total as f64 / (n2 as f64).ln()
    });
    let qq_corr = exponential_qq_correlation(&aux_scaled)?;
    rows.push(StatRow::point(n2, "aux_exponential_qq_correlation", qq_corr));
    rows.push(StatRow::point(
        n2,
        "aux_occupation_per_log_mean",
        crate::stats::mean(&aux_scaled),
    ));

    let flags = vec![
        Flag::new(
            "occupation_log_growth_bounded",
            ratio <= spec.quantile_ratio_threshold,
            ratio,
            spec.quantile_ratio_threshold,
            format!("99% quantile of T(n)/log n: {q99_1:.4} at n = {n1}, {q99_2:.4} at n = {n2}"),
        ),
        Flag::new(
            "aux_occupation_exponential_shape",
            qq_corr >= spec.qq_min_correlation,
            qq_corr,
            spec.qq_min_correlation,
            "QQ correlation of the auxiliary chain occupation against exponential quantiles",
        ),
    ];

    Ok(ExperimentResult {
        name: String::new(),
        kind: "occupation_growth",
        claim: "for a centered finite-variance planar base, membrane occupation grows \
                like log n (bounded in probability after scaling) and the jump-to-v \
                auxiliary chain occupation is asymptotically exponential",
        seed: ctx.seed,
        flags,
        rows,
        plots,
        notes,
    })
}
