//! Transient preservation: when the base walk is transient the membrane is
//! visited finitely often, so the perturbed walk inherits the unperturbed
//! scaling limit.

use super::{
    family_ks_pass_two_sample, ExperimentError, ExperimentResult, Flag, PlotSeries, RunContext,
    StatRow,
};
use crate::exec::map_replicates;
use crate::lattice::{LatticePoint, Membrane};
use crate::law::JumpLaw;
use crate::stats::{mean_ci, two_sample_ks, Z_99};
use crate::walker::{run, WalkConfig};

/// How positions are rescaled before distributional comparisons.
#[derive(Clone, Copy, Debug)]
pub enum ScalingSequence {
    /// `a_n = sqrt(n)` for finite-variance bases.
    SqrtN,
    /// `a_n = n^exponent` for stable-domain bases (`exponent = 1/alpha`).
    Power(f64),
}

impl ScalingSequence {
    fn value(&self, n: u64) -> f64 {
        match self {
            ScalingSequence::SqrtN => (n as f64).sqrt(),
            ScalingSequence::Power(e) => (n as f64).powf(*e),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TransientSpec {
    pub base: JumpLaw,
    pub membrane: Membrane,
    pub start: LatticePoint,
    /// Occupation is compared at these two horizons (shared paths, so the
    /// difference isolates genuinely late visits).
    pub stabilization_horizons: (u64, u64),
    pub stabilization_replicates: u64,
    pub ks_horizon: u64,
    pub ks_replicates: u64,
    pub seed_repetitions: u64,
    pub scaling: ScalingSequence,
    /// Relative tolerance on the mean-occupation difference.
    pub stabilization_rel_tol: f64,
    /// Required fraction of seed repetitions whose two-sample KS family
    /// passes at the 5% level.
    pub ks_pass_rate: f64,
}

impl TransientSpec {
    fn validate(&self) -> Result<(), ExperimentError> {
        let (n1, n2) = self.stabilization_horizons;
        if n1 == 0 || n1 >= n2 {
            return Err(ExperimentError::Precondition(
                "stabilization horizons must be ordered".into(),
            ));
        }
        if self.stabilization_replicates < 100 || self.ks_replicates < 100 {
            return Err(ExperimentError::Precondition(
                "replicate count must be at least 100".into(),
            ));
        }
        // transience heuristics: genuinely d-dimensional with d >= 3, a
        // planar power tail with alpha in (0,2), or a one-dimensional
        // stable-domain law with alpha in (0,1)
        let transient = match &self.base {
            JumpLaw::PolynomialTail(p) => p.alpha() < 2.0,
            JumpLaw::RegVaryingRadial(_) => true,
            law => law.dim() >= 3,
        };
        if !transient {
            return Err(ExperimentError::Precondition(
                "base law is recurrent per the transience heuristics".into(),
            ));
        }
        Ok(())
    }
}

pub fn run_transient_preservation(
    spec: &TransientSpec,
    ctx: RunContext,
) -> Result<ExperimentResult, ExperimentError> {
    spec.validate()?;
    let (n1, n2) = spec.stabilization_horizons;
    let dim = spec.start.dim();

    // Phase 0: occupation stabilization on shared paths out to n2.
    let mut config = WalkConfig::new(
        spec.start,
        spec.base.clone(),
        spec.membrane.clone(),
        n2,
    );
    config.checkpoints = vec![n1, n2];
    let occupations: Vec<(u64, u64)> = map_replicates(spec.stabilization_replicates, |rep| {
        let summary = run(&config, ctx.key(0, rep)).expect("validated config");
        (
            summary.checkpoints[0].occupation_total,
            summary.checkpoints[1].occupation_total,
        )
    });
    let t1: Vec<f64> = occupations.iter().map(|&(a, _)| a as f64).collect();
    let t2: Vec<f64> = occupations.iter().map(|&(_, b)| b as f64).collect();
    let (mean1, half1) = mean_ci(&t1, Z_99)?;
    let (mean2, half2) = mean_ci(&t2, Z_99)?;
    let rel_diff = if mean1 > 0.0 {
        (mean2 - mean1).abs() / mean1
    } else {
        0.0
    };
    let still_growing = occupations.iter().filter(|&&(a, b)| b > a).count() as f64
        / occupations.len() as f64;

    // KS branch: perturbed vs unperturbed scaled marginals, repeated seeds.
    let a_n = spec.scaling.value(spec.ks_horizon);
    let ks_config = WalkConfig::new(
        spec.start,
        spec.base.clone(),
        spec.membrane.clone(),
        spec.ks_horizon,
    );
    let free_config = WalkConfig::new(
        spec.start,
        spec.base.clone(),
        Membrane::empty(),
        spec.ks_horizon,
    );
    let mut ks_rows = Vec::new();
    let mut passes = 0u64;
    for rep_idx in 0..spec.seed_repetitions {
        let perturbed: Vec<LatticePoint> = map_replicates(spec.ks_replicates, |rep| {
            run(&ks_config, ctx.key(1 + 2 * rep_idx, rep))
                .expect("validated config")
                .final_position
        });
        let unperturbed: Vec<LatticePoint> = map_replicates(spec.ks_replicates, |rep| {
            run(&free_config, ctx.key(2 + 2 * rep_idx, rep))
                .expect("validated config")
                .final_position
        });
        let mut stats = Vec::with_capacity(dim);
        for coord in 0..dim {
            let xs: Vec<f64> = perturbed
                .iter()
                .map(|p| p.coord(coord) as f64 / a_n)
                .collect();
            let ys: Vec<f64> = unperturbed
                .iter()
                .map(|p| p.coord(coord) as f64 / a_n)
                .collect();
            stats.push(two_sample_ks(&xs, &ys)?);
        }
        if family_ks_pass_two_sample(
            &stats,
            0.05,
            spec.ks_replicates as usize,
            spec.ks_replicates as usize,
        ) {
            passes += 1;
        }
        for (coord, d) in stats.iter().enumerate() {
            ks_rows.push(StatRow::point(
                spec.ks_horizon,
                format!("two_sample_ks_seed{rep_idx}_coord{coord}"),
                *d,
            ));
        }
    }
    let pass_rate = passes as f64 / spec.seed_repetitions as f64;

    let mut rows = vec![
        StatRow::band(n1, "mean_occupation", mean1, mean1 - half1, mean1 + half1),
        StatRow::band(n2, "mean_occupation", mean2, mean2 - half2, mean2 + half2),
        StatRow::point(n2, "mean_occupation_rel_diff", rel_diff),
        StatRow::point(n2, "fraction_still_visiting", still_growing),
        StatRow::point(spec.ks_horizon, "ks_family_pass_rate", pass_rate),
    ];
    rows.append(&mut ks_rows);

    let flags = vec![
        Flag::new(
            "occupation_stabilizes",
            rel_diff < spec.stabilization_rel_tol,
            rel_diff,
            spec.stabilization_rel_tol,
            format!("mean T({n1}) = {mean1:.4}, mean T({n2}) = {mean2:.4}"),
        ),
        Flag::new(
            "scaled_marginals_match",
            pass_rate >= spec.ks_pass_rate,
            pass_rate,
            spec.ks_pass_rate,
            format!(
                "two-sample KS family at 5% passed in {passes}/{} seed repetitions",
                spec.seed_repetitions
            ),
        ),
    ];

    let plots = vec![PlotSeries {
        name: "mean_occupation".into(),
        rows: vec![
            (n1 as f64, mean1, mean1 - half1, mean1 + half1),
            (n2 as f64, mean2, mean2 - half2, mean2 + half2),
        ],
    }];

    Ok(ExperimentResult {
        name: String::new(),
        kind: "transient_preservation",
        claim: "a transient base walk visits the membrane finitely often, so local \
                perturbations leave the scaling limit unchanged",
        seed: ctx.seed,
        flags,
        rows,
        plots,
        notes: vec![],
    })
}
