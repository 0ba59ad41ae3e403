//! Integration tests for the experiment kit: edge cases (empty membranes,
//! degenerate bases), calibration of the KS machinery, and Monte Carlo
//! agreement with the exact oracles.

use membrane_walk::exec::map_replicates;
use membrane_walk::experiments::*;
use membrane_walk::lattice::{LatticePoint, Membrane};
use membrane_walk::law::JumpLaw;
use membrane_walk::oracle::build_grid;
use membrane_walk::stats::{two_sample_ks, Z_99};
use membrane_walk::walker::{run, RunKey, WalkConfig};

fn point(c: &[i64]) -> LatticePoint {
    LatticePoint::new(c).unwrap()
}

#[test]
fn occupation_with_empty_membrane_is_identically_zero() {
    let spec = OccupationSpec {
        base: JumpLaw::lazy_simple_neighbor(2, 0.5).unwrap(),
        membrane: Membrane::empty(),
        start: point(&[0, 0]),
        horizons: (1_000, 10_000),
        replicates: 200,
        aux_target: point(&[1, 1]),
        aux_replicates: 200,
        quantile_ratio_threshold: 1.5,
        qq_min_correlation: 0.97,
        condition_b_radius: 8,
    };
    let result = run_occupation_growth(&spec, RunContext::new(9, 0)).unwrap();
    for row in result
        .rows
        .iter()
        .filter(|r| r.statistic.starts_with("occupation_per_log_q"))
    {
        assert_eq!(row.value, 0.0, "{}", row.statistic);
    }
    // the bounded-growth flag treats all-zero quantiles as stable
    assert!(result.flags.iter().any(|f| f.name == "occupation_log_growth_bounded" && f.passed));
}

#[test]
fn donsker_rejects_degenerate_bases_with_a_skew_hint() {
    let spec = DonskerSpec {
        base: JumpLaw::diagonal_embedding(vec![(0, 0.5), (1, 0.25), (-1, 0.25)]).unwrap(),
        membrane: Membrane::empty(),
        start: point(&[0, 0]),
        horizon: 1_000,
        replicates: 200,
        checkpoints_t: vec![1.0],
        seed_repetitions: 2,
        ks_level: 0.05,
        ks_pass_rate: 0.9,
        cov_rel_tolerance: 0.05,
        condition_b_radius: 8,
    };
    let err = run_donsker_preservation(&spec, RunContext::new(9, 1)).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("degenerate"), "{msg}");
    assert!(msg.contains("skew"), "{msg}");
}

#[test]
fn donsker_flags_heavy_kick_tails_but_still_runs() {
    let origin = point(&[0, 0]);
    let spec = DonskerSpec {
        base: JumpLaw::simple_neighbor(2).unwrap(),
        membrane: Membrane::new(vec![(origin, JumpLaw::log_log_radial(1.0).unwrap())]).unwrap(),
        start: origin,
        horizon: 1_000,
        replicates: 300,
        checkpoints_t: vec![1.0],
        seed_repetitions: 2,
        ks_level: 0.05,
        ks_pass_rate: 0.0, // reporting run: thresholds irrelevant
        cov_rel_tolerance: f64::INFINITY,
        condition_b_radius: 20,
    };
    let result = run_donsker_preservation(&spec, RunContext::new(9, 2)).unwrap();
    assert!(
        result.notes.iter().any(|n| n.contains("heavy")),
        "expected a tail-condition warning, got {:?}",
        result.notes
    );
}

#[test]
fn donsker_with_empty_membrane_is_a_clt_check() {
    let spec = DonskerSpec {
        base: JumpLaw::simple_neighbor(2).unwrap(),
        membrane: Membrane::empty(),
        start: point(&[0, 0]),
        horizon: 10_000,
        replicates: 2_000,
        checkpoints_t: vec![1.0],
        seed_repetitions: 5,
        ks_level: 0.05,
        ks_pass_rate: 0.8,
        cov_rel_tolerance: 0.05,
        condition_b_radius: 8,
    };
    let result = run_donsker_preservation(&spec, RunContext::new(10, 3)).unwrap();
    assert!(result.passed(), "{:#?}", result.flags);
}

#[test]
fn donsker_with_far_point_kicks_passes_at_matched_power() {
    // kicks uniform on the four neighbors of a far point have nonzero mean;
    // their effect shrinks like log n / sqrt(n), so the preservation holds
    // at horizons where the drift sits below the test's resolution
    let origin = point(&[0, 0]);
    let far = [(6i64, 5i64), (4, 5), (5, 6), (5, 4)];
    let kick = JumpLaw::categorical(
        far.iter()
            .map(|&(x, y)| (point(&[x, y]), 0.25))
            .collect(),
    )
    .unwrap();
    let spec = DonskerSpec {
        base: JumpLaw::simple_neighbor(2).unwrap(),
        membrane: Membrane::new(vec![(origin, kick)]).unwrap(),
        start: origin,
        horizon: 400_000,
        replicates: 1_000,
        checkpoints_t: vec![1.0],
        seed_repetitions: 1,
        ks_level: 0.05,
        ks_pass_rate: 1.0,
        // the variance estimator's own noise at 1000 replicates is ~4.5%,
        // so the 5% production tolerance would gate on noise here
        cov_rel_tolerance: 0.15,
        condition_b_radius: 12,
    };
    let result = run_donsker_preservation(&spec, RunContext::new(21, 12)).unwrap();
    assert!(result.passed(), "{:#?}", result.flags);
}

#[test]
fn manifest_hashes_revalidate_the_outputs() {
    use membrane_walk::config::parse_config;
    use membrane_walk::output::{run_all, validate_manifest};
    let config = parse_config(
        r#"{
            "seed": 3,
            "experiments": [
                {
                    "name": "tiny",
                    "kind": "counterexample",
                    "spec": {"scale": 1.0, "horizons": [1000], "replicates": [200]}
                }
            ]
        }"#,
    )
    .unwrap();
    let out = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("manifest_check");
    let _ = std::fs::remove_dir_all(&out);
    run_all(&config, None, &out).unwrap();
    assert!(validate_manifest(&out).unwrap().is_empty());

    // corrupting an output must be detected
    let victim = out.join("tiny_results.csv");
    let mut bytes = std::fs::read(&victim).unwrap();
    bytes.push(b'x');
    std::fs::write(&victim, bytes).unwrap();
    let mismatches = validate_manifest(&out).unwrap();
    assert_eq!(mismatches.len(), 1);
    assert!(mismatches[0].contains("tiny_results.csv"));
}

#[test]
fn two_sample_ks_calibration_on_identical_configs() {
    // perturbed and unperturbed configs coincide (both empty membranes):
    // the family-wise 5% test must reject in at most 10% of 100 repetitions
    let config = WalkConfig::new(
        point(&[0, 0]),
        JumpLaw::simple_neighbor(2).unwrap(),
        Membrane::empty(),
        1_000,
    );
    let n = 500u64;
    let mut rejects = 0;
    for rep in 0..100u64 {
        let a: Vec<LatticePoint> = map_replicates(n, |r| {
            run(
                &config,
                RunKey {
                    seed: 42,
                    experiment: 50,
                    phase: 2 * rep,
                    replicate: r,
                },
            )
            .unwrap()
            .final_position
        });
        let b: Vec<LatticePoint> = map_replicates(n, |r| {
            run(
                &config,
                RunKey {
                    seed: 42,
                    experiment: 50,
                    phase: 2 * rep + 1,
                    replicate: r,
                },
            )
            .unwrap()
            .final_position
        });
        let scale = (1_000f64).sqrt();
        let mut stats = Vec::new();
        for coord in 0..2 {
            let xs: Vec<f64> = a.iter().map(|p| p.coord(coord) as f64 / scale).collect();
            let ys: Vec<f64> = b.iter().map(|p| p.coord(coord) as f64 / scale).collect();
            stats.push(two_sample_ks(&xs, &ys).unwrap());
        }
        if !family_ks_pass_two_sample(&stats, 0.05, n as usize, n as usize) {
            rejects += 1;
        }
    }
    assert!(rejects <= 10, "rejected {rejects} of 100 null repetitions");
}

#[test]
fn skew_symmetric_kick_centers_on_one_half() {
    let spec = SkewSpec {
        base_steps: vec![(0, 0.5), (1, 0.25), (-1, 0.25)],
        kick_steps: vec![(3, 0.5), (-3, 0.5)],
        horizon: 10_000,
        replicates: 20_000,
        positive_tolerance: 0.02,
        ks_threshold: 0.03,
    };
    let result = run_skew_embedded(&spec, RunContext::new(11, 4)).unwrap();
    assert!(result.passed(), "{:#?}", result.flags);
    let row = result
        .rows
        .iter()
        .find(|r| r.statistic == "positive_mass")
        .unwrap();
    assert!(row.lo <= 0.5 && 0.5 <= row.hi, "CI must contain 1/2");
}

#[test]
fn skew_reflected_kick_pushes_mass_positive() {
    // eta = +1 surely: gamma = 1, the walk reflects at 0
    let spec = SkewSpec {
        base_steps: vec![(0, 0.5), (1, 0.25), (-1, 0.25)],
        kick_steps: vec![(1, 1.0)],
        horizon: 10_000,
        replicates: 20_000,
        positive_tolerance: 0.02,
        ks_threshold: 0.03,
    };
    let result = run_skew_embedded(&spec, RunContext::new(11, 5)).unwrap();
    let row = result
        .rows
        .iter()
        .find(|r| r.statistic == "positive_mass")
        .unwrap();
    assert!(row.value > 0.98, "P(X>0) = {} should approach 1", row.value);
    assert!(result.passed(), "{:#?}", result.flags);
}

#[test]
fn g_ratio_at_the_membrane_point_is_one() {
    let spec = GRatioSpec {
        base: JumpLaw::simple_neighbor(2).unwrap(),
        membrane_points: vec![point(&[0, 0])],
        y: point(&[0, 0]),
        horizons: vec![2_000, 10_000],
        replicates: 20_000,
    };
    let result = estimate_g_ratio(&spec, RunContext::new(12, 6)).unwrap();
    assert!(result.passed(), "{:#?}", result.flags);
    for row in result.rows.iter().filter(|r| r.statistic == "g_ratio") {
        // both batches estimate the same survival probability; allow the
        // ratio a generous noise band around the forced value 1
        assert!(
            (row.value - 1.0).abs() < 0.06,
            "ratio at horizon {} should be near 1, got {} (95% CI [{}, {}])",
            row.horizon,
            row.value,
            row.lo,
            row.hi
        );
    }
}

#[test]
fn g_ratio_for_distant_points_is_reported_with_bands() {
    let spec = GRatioSpec {
        base: JumpLaw::simple_neighbor(2).unwrap(),
        membrane_points: vec![point(&[0, 0])],
        y: point(&[40, 0]),
        horizons: vec![2_000, 10_000],
        replicates: 20_000,
    };
    let result = estimate_g_ratio(&spec, RunContext::new(12, 7)).unwrap();
    let ratios: Vec<f64> = result
        .rows
        .iter()
        .filter(|r| r.statistic == "g_ratio")
        .map(|r| r.value)
        .collect();
    // avoiding a distant point is easier than avoiding the origin
    assert!(ratios.iter().all(|&r| r > 1.0));
}

#[test]
fn transient_requires_a_transient_base() {
    let spec = TransientSpec {
        base: JumpLaw::simple_neighbor(2).unwrap(), // recurrent
        membrane: Membrane::empty(),
        start: point(&[0, 0]),
        stabilization_horizons: (1_000, 10_000),
        stabilization_replicates: 200,
        ks_horizon: 1_000,
        ks_replicates: 200,
        seed_repetitions: 2,
        scaling: transient::ScalingSequence::SqrtN,
        stabilization_rel_tol: 0.01,
        ks_pass_rate: 0.9,
    };
    let err = run_transient_preservation(&spec, RunContext::new(13, 8)).unwrap_err();
    assert!(err.to_string().contains("recurrent"), "{err}");
}

#[test]
fn occupation_requires_condition_b() {
    // kick that traps the walk on a sublattice breaks accessibility
    let origin = point(&[0, 0]);
    let spec = OccupationSpec {
        base: JumpLaw::diagonal_embedding(vec![(0, 0.5), (1, 0.25), (-1, 0.25)]).unwrap(),
        membrane: Membrane::new(vec![(
            origin,
            JumpLaw::diagonal_embedding(vec![(1, 1.0)]).unwrap(),
        )])
        .unwrap(),
        start: origin,
        horizons: (1_000, 10_000),
        replicates: 200,
        aux_target: point(&[1, 1]),
        aux_replicates: 200,
        quantile_ratio_threshold: 1.5,
        qq_min_correlation: 0.97,
        condition_b_radius: 8,
    };
    let err = run_occupation_growth(&spec, RunContext::new(13, 9)).unwrap_err();
    assert!(err.to_string().contains("Condition B"), "{err}");
}

#[test]
fn mc_return_probabilities_match_the_grid_oracle() {
    // U_k = P{S(k) = 0} for the planar simple walk, 10^5 replicates,
    // k <= 50, within 5 binomial SDs of the exact convolution
    let base = JumpLaw::simple_neighbor(2).unwrap();
    let grid = build_grid(&base, 50, None, false).unwrap();
    let horizon = 50u64;
    let mut config = WalkConfig::new(point(&[0, 0]), base, Membrane::empty(), horizon);
    config.record_full_path = true;
    let n = 100_000u64;
    let at_zero_counts: Vec<u64> = {
        let per_rep: Vec<Vec<bool>> = map_replicates(n, |rep| {
            let summary = run(
                &config,
                RunKey {
                    seed: 14,
                    experiment: 60,
                    phase: 0,
                    replicate: rep,
                },
            )
            .unwrap();
            summary
                .path
                .unwrap()
                .iter()
                .map(|p| p.is_origin())
                .collect()
        });
        let mut counts = vec![0u64; horizon as usize + 1];
        for path in per_rep {
            for (k, hit) in path.into_iter().enumerate() {
                counts[k] += u64::from(hit);
            }
        }
        counts
    };
    for (k, &hits) in at_zero_counts.iter().enumerate().skip(1) {
        let exact = grid.u()[k].mid();
        let mc = hits as f64 / n as f64;
        let sd = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!(
            (mc - exact).abs() <= 5.0 * sd + 1e-12,
            "k = {k}: MC {mc} vs exact {exact} (sd {sd})"
        );
    }
}

#[test]
fn counterexample_reference_vanishes_with_the_scale() {
    // a -> 0 sends the first-term limit to 0
    let mut prev = f64::INFINITY;
    for a in [1.0, 0.5, 0.1, 0.01] {
        let limit = membrane_walk::oracle::counterexample_first_term_limit(a);
        assert!(limit < prev);
        prev = limit;
    }
    assert!(prev < 0.01);
}

#[test]
fn transient_with_bounded_kick_offset_vanishes_under_scaling() {
    // deterministic kick to a fixed neighbor displacement: X differs from
    // the free walk by an a.s. bounded offset, so scaled marginals match
    let origin = point(&[0, 0, 0]);
    let spec = TransientSpec {
        base: JumpLaw::simple_neighbor(3).unwrap(),
        membrane: Membrane::new(vec![(origin, JumpLaw::deterministic(point(&[1, 0, 0])))])
            .unwrap(),
        start: origin,
        stabilization_horizons: (10_000, 100_000),
        stabilization_replicates: 1_000,
        ks_horizon: 20_000,
        ks_replicates: 1_000,
        seed_repetitions: 5,
        scaling: transient::ScalingSequence::SqrtN,
        stabilization_rel_tol: 0.05,
        ks_pass_rate: 0.8,
    };
    let result = run_transient_preservation(&spec, RunContext::new(15, 10)).unwrap();
    assert!(result.passed(), "{:#?}", result.flags);
}

#[test]
fn experiment_results_are_reproducible_for_a_fixed_seed() {
    let spec = CounterexampleSpec {
        scale: 1.0,
        horizons: vec![1_000],
        replicates: vec![500],
        floor: 0.05,
        confidence_z: Z_99,
    };
    let a = run_counterexample(&spec, RunContext::new(77, 11)).unwrap();
    let b = run_counterexample(&spec, RunContext::new(77, 11)).unwrap();
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        assert_eq!(ra.value.to_bits(), rb.value.to_bits());
        assert_eq!(ra.lo.to_bits(), rb.lo.to_bits());
        assert_eq!(ra.hi.to_bits(), rb.hi.to_bits());
    }
}
