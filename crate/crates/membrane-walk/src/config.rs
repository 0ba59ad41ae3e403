//! Config-driven experiment construction.
//!
//! Configs are strict JSON: unknown fields are rejected with the path to
//! the offending field, probabilities may be written as decimal strings
//! (so the canonical config hash does not depend on binary float
//! formatting), and every law/membrane invariant is checked during
//! parsing.

use crate::experiments::{
    transient::ScalingSequence, CounterexampleSpec, DonskerSpec, GRatioSpec, OccupationSpec,
    ReturnTailSpec, SkewSpec, TransientSpec,
};
use crate::lattice::{LatticePoint, Membrane};
use crate::law::JumpLaw;
use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Json(String),
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid value at {path}: {message}")]
    Invalid { path: String, message: String },
}

/// Probability that deserializes from a JSON number or a decimal string.
#[derive(Clone, Copy, Debug)]
pub struct Prob(pub f64);

impl<'de> Deserialize<'de> for Prob {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Prob;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                write!(f, "a probability as a number or decimal string")
            }
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<Prob, E> {
                Ok(Prob(v))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Prob, E> {
                Ok(Prob(v as f64))
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Prob, E> {
                Ok(Prob(v as f64))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Prob, E> {
                v.parse::<f64>()
                    .map(Prob)
                    .map_err(|_| E::custom(format!("not a decimal probability: {v}")))
            }
        }
        deserializer.deserialize_any(V)
    }
}

fn strict<T: serde::de::DeserializeOwned>(value: Value, path: &str) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let full = if inner == "." {
            path.to_string()
        } else {
            format!("{path}.{inner}")
        };
        ConfigError::Schema {
            path: full,
            message: e.inner().to_string(),
        }
    })
}

fn invalid(path: &str, message: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        path: path.to_string(),
        message: message.to_string(),
    }
}

// ---- law configs ----------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomCfg {
    point: Vec<i64>,
    prob: Prob,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScalarAtomCfg {
    value: i64,
    prob: Prob,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimpleNeighborCfg {
    dim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LazyCfg {
    dim: usize,
    hold_prob: Prob,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CategoricalCfg {
    atoms: Vec<AtomCfg>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolynomialCfg {
    alpha: f64,
    #[serde(default = "default_poly_window")]
    window: i64,
}

fn default_poly_window() -> i64 {
    128
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegVaryingCfg {
    alpha: f64,
    pos_weight: Prob,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LogLogCfg {
    scale: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagonalCfg {
    atoms: Vec<ScalarAtomCfg>,
}

/// Parse one law object `{"kind": ..., ...params}`.
pub fn parse_law(value: &Value, path: &str) -> Result<JumpLaw, ConfigError> {
    let obj = value
        .as_object()
        .ok_or_else(|| invalid(path, "law must be an object"))?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| invalid(&format!("{path}.kind"), "missing or non-string kind tag"))?
        .to_string();
    let mut rest = obj.clone();
    rest.remove("kind");
    let rest = Value::Object(rest);
    let law = match kind.as_str() {
        "simple_neighbor" => {
            let cfg: SimpleNeighborCfg = strict(rest, path)?;
            JumpLaw::simple_neighbor(cfg.dim)
        }
        "lazy_simple_neighbor" => {
            let cfg: LazyCfg = strict(rest, path)?;
            JumpLaw::lazy_simple_neighbor(cfg.dim, cfg.hold_prob.0)
        }
        "categorical" => {
            let cfg: CategoricalCfg = strict(rest, path)?;
            let atoms = cfg
                .atoms
                .iter()
                .map(|a| LatticePoint::new(&a.point).map(|p| (p, a.prob.0)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| invalid(&format!("{path}.atoms"), e))?;
            JumpLaw::categorical(atoms)
        }
        "polynomial_tail" => {
            let cfg: PolynomialCfg = strict(rest, path)?;
            JumpLaw::polynomial_tail(cfg.alpha, cfg.window)
        }
        "reg_varying_radial" => {
            let cfg: RegVaryingCfg = strict(rest, path)?;
            JumpLaw::reg_varying_radial(cfg.alpha, cfg.pos_weight.0)
        }
        "log_log_radial" => {
            let cfg: LogLogCfg = strict(rest, path)?;
            JumpLaw::log_log_radial(cfg.scale)
        }
        "diagonal_embedding" => {
            let cfg: DiagonalCfg = strict(rest, path)?;
            JumpLaw::diagonal_embedding(cfg.atoms.iter().map(|a| (a.value, a.prob.0)).collect())
        }
        other => {
            return Err(invalid(
                &format!("{path}.kind"),
                format!("unknown law kind {other:?}"),
            ))
        }
    };
    law.map_err(|e| invalid(path, e))
}

// ---- walk section ----------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MembraneEntryCfg {
    point: Vec<i64>,
    law: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WalkCfg {
    start: Vec<i64>,
    base_law: Value,
    #[serde(default)]
    membrane: Vec<MembraneEntryCfg>,
}

struct WalkParts {
    start: LatticePoint,
    base: JumpLaw,
    membrane: Membrane,
}

fn parse_walk(value: Value, path: &str) -> Result<WalkParts, ConfigError> {
    let cfg: WalkCfg = strict(value, path)?;
    let start =
        LatticePoint::new(&cfg.start).map_err(|e| invalid(&format!("{path}.start"), e))?;
    let base = parse_law(&cfg.base_law, &format!("{path}.base_law"))?;
    let mut entries = Vec::with_capacity(cfg.membrane.len());
    for (i, entry) in cfg.membrane.iter().enumerate() {
        let p = LatticePoint::new(&entry.point)
            .map_err(|e| invalid(&format!("{path}.membrane[{i}].point"), e))?;
        let law = parse_law(&entry.law, &format!("{path}.membrane[{i}].law"))?;
        entries.push((p, law));
    }
    let membrane = Membrane::new(entries).map_err(|e| match e {
        crate::lattice::LatticeError::DuplicateMembranePoint => invalid(
            &format!("{path}.membrane"),
            "membrane points must be distinct",
        ),
        other => invalid(&format!("{path}.membrane"), other),
    })?;
    Ok(WalkParts {
        start,
        base,
        membrane,
    })
}

// ---- experiment configs ------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TransientCfg {
    walk: Value,
    stabilization_horizons: [u64; 2],
    stabilization_replicates: u64,
    ks_horizon: u64,
    ks_replicates: u64,
    #[serde(default = "default_seed_reps")]
    seed_repetitions: u64,
    #[serde(default)]
    scaling_exponent: Option<f64>,
    #[serde(default = "default_stab_tol")]
    stabilization_rel_tol: f64,
    #[serde(default = "default_pass_rate")]
    ks_pass_rate: f64,
}

fn default_seed_reps() -> u64 {
    20
}
fn default_stab_tol() -> f64 {
    0.01
}
fn default_pass_rate() -> f64 {
    0.9
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OccupationCfg {
    walk: Value,
    horizons: [u64; 2],
    replicates: u64,
    aux_target: Vec<i64>,
    #[serde(default)]
    aux_replicates: Option<u64>,
    #[serde(default = "default_quantile_ratio")]
    quantile_ratio_threshold: f64,
    #[serde(default = "default_qq_corr")]
    qq_min_correlation: f64,
    #[serde(default = "default_condition_radius")]
    condition_b_radius: i64,
}

fn default_quantile_ratio() -> f64 {
    1.5
}
fn default_qq_corr() -> f64 {
    0.97
}
fn default_condition_radius() -> i64 {
    24
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReturnTailCfg {
    base_law: Value,
    mc_replicates: u64,
    #[serde(default = "default_mc_horizon")]
    mc_horizon: u64,
    exact_nmax: usize,
    #[serde(default)]
    use_closed_form: Option<bool>,
    #[serde(default)]
    grid_window: Option<i64>,
    trend_range: [usize; 2],
    #[serde(default = "default_trend_change")]
    trend_max_per_decade: f64,
    #[serde(default = "default_sd_tol")]
    mc_sd_tolerance: f64,
    halving_ratio_at: usize,
    #[serde(default = "default_halving_min")]
    halving_ratio_min: f64,
}

fn default_mc_horizon() -> u64 {
    50
}
fn default_trend_change() -> f64 {
    0.15
}
fn default_sd_tol() -> f64 {
    5.0
}
fn default_halving_min() -> f64 {
    0.9
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DonskerCfg {
    walk: Value,
    horizon: u64,
    replicates: u64,
    #[serde(default = "default_checkpoints")]
    checkpoints_t: Vec<f64>,
    #[serde(default = "default_seed_reps")]
    seed_repetitions: u64,
    #[serde(default = "default_ks_level")]
    ks_level: f64,
    #[serde(default = "default_pass_rate")]
    ks_pass_rate: f64,
    #[serde(default = "default_cov_tol")]
    cov_rel_tolerance: f64,
    #[serde(default = "default_condition_radius")]
    condition_b_radius: i64,
}

fn default_checkpoints() -> Vec<f64> {
    vec![0.25, 0.5, 1.0]
}
fn default_ks_level() -> f64 {
    0.05
}
fn default_cov_tol() -> f64 {
    0.05
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SkewCfg {
    base_steps: Vec<ScalarAtomCfg>,
    kick_steps: Vec<ScalarAtomCfg>,
    horizon: u64,
    replicates: u64,
    #[serde(default = "default_positive_tol")]
    positive_tolerance: f64,
    #[serde(default = "default_skew_ks")]
    ks_threshold: f64,
}

fn default_positive_tol() -> f64 {
    0.02
}
fn default_skew_ks() -> f64 {
    0.03
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CounterexampleCfg {
    scale: f64,
    horizons: Vec<u64>,
    replicates: Vec<u64>,
    #[serde(default = "default_floor")]
    floor: f64,
}

fn default_floor() -> f64 {
    0.05
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GRatioCfg {
    base_law: Value,
    membrane_points: Vec<Vec<i64>>,
    y: Vec<i64>,
    horizons: Vec<u64>,
    replicates: u64,
}

// ---- top level ------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileCfg {
    #[serde(default = "default_master_seed")]
    seed: u64,
    experiments: Vec<Value>,
}

fn default_master_seed() -> u64 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryHeader {
    name: String,
    kind: String,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    spec: Option<Value>,
}

/// One fully validated experiment.
#[derive(Debug)]
pub enum ExperimentSpec {
    Transient(TransientSpec),
    Occupation(OccupationSpec),
    ReturnTail(ReturnTailSpec),
    Donsker(DonskerSpec),
    Skew(SkewSpec),
    Counterexample(CounterexampleSpec),
    GRatio(GRatioSpec),
}

#[derive(Debug)]
pub struct ParsedExperiment {
    pub name: String,
    pub seed: u64,
    pub spec: ExperimentSpec,
}

#[derive(Debug)]
pub struct ParsedConfig {
    pub master_seed: u64,
    pub experiments: Vec<ParsedExperiment>,
    pub config_hash: String,
}

/// Canonical form of a config: serde_json with sorted object keys and no
/// insignificant whitespace.
pub fn canonical_text(value: &Value) -> String {
    serde_json::to_string(value).expect("JSON value serializes")
}

/// Stable digest of the canonicalized config text.
pub fn config_hash(value: &Value) -> String {
    let mut hasher = Sha256::new();
    hasher.update(canonical_text(value).as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn parse_config(text: &str) -> Result<ParsedConfig, ConfigError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
    let hash = config_hash(&value);
    let file: FileCfg = strict(value, "$")?;
    let mut experiments = Vec::with_capacity(file.experiments.len());
    let mut seen_names = std::collections::BTreeSet::new();
    for (i, entry) in file.experiments.into_iter().enumerate() {
        let path = format!("experiments[{i}]");
        let header: EntryHeader = strict(entry, &path)?;
        if !seen_names.insert(header.name.clone()) {
            return Err(invalid(
                &format!("{path}.name"),
                format!("duplicate experiment name {:?}", header.name),
            ));
        }
        let spec_value = header.spec.unwrap_or(Value::Object(Default::default()));
        let spec_path = format!("{path}.spec");
        let spec = build_spec(&header.kind, spec_value, &spec_path)?;
        experiments.push(ParsedExperiment {
            name: header.name,
            seed: header.seed.unwrap_or(file.seed),
            spec,
        });
    }
    Ok(ParsedConfig {
        master_seed: file.seed,
        experiments,
        config_hash: hash,
    })
}

fn parse_point(coords: &[i64], path: &str) -> Result<LatticePoint, ConfigError> {
    LatticePoint::new(coords).map_err(|e| invalid(path, e))
}

fn build_spec(kind: &str, value: Value, path: &str) -> Result<ExperimentSpec, ConfigError> {
    match kind {
        "transient_preservation" => {
            let cfg: TransientCfg = strict(value, path)?;
            let walk = parse_walk(cfg.walk, &format!("{path}.walk"))?;
            check_replicates(cfg.stabilization_replicates, path)?;
            check_replicates(cfg.ks_replicates, path)?;
            Ok(ExperimentSpec::Transient(TransientSpec {
                base: walk.base,
                membrane: walk.membrane,
                start: walk.start,
                stabilization_horizons: (
                    cfg.stabilization_horizons[0],
                    cfg.stabilization_horizons[1],
                ),
                stabilization_replicates: cfg.stabilization_replicates,
                ks_horizon: cfg.ks_horizon,
                ks_replicates: cfg.ks_replicates,
                seed_repetitions: cfg.seed_repetitions,
                scaling: match cfg.scaling_exponent {
                    None => ScalingSequence::SqrtN,
                    Some(e) => ScalingSequence::Power(e),
                },
                stabilization_rel_tol: cfg.stabilization_rel_tol,
                ks_pass_rate: cfg.ks_pass_rate,
            }))
        }
        "occupation_growth" => {
            let cfg: OccupationCfg = strict(value, path)?;
            let walk = parse_walk(cfg.walk, &format!("{path}.walk"))?;
            check_replicates(cfg.replicates, path)?;
            check_sorted(&cfg.horizons, &format!("{path}.horizons"))?;
            Ok(ExperimentSpec::Occupation(OccupationSpec {
                base: walk.base,
                membrane: walk.membrane,
                start: walk.start,
                horizons: (cfg.horizons[0], cfg.horizons[1]),
                replicates: cfg.replicates,
                aux_target: parse_point(&cfg.aux_target, &format!("{path}.aux_target"))?,
                aux_replicates: cfg.aux_replicates.unwrap_or(cfg.replicates),
                quantile_ratio_threshold: cfg.quantile_ratio_threshold,
                qq_min_correlation: cfg.qq_min_correlation,
                condition_b_radius: cfg.condition_b_radius,
            }))
        }
        "return_tail" => {
            let cfg: ReturnTailCfg = strict(value, path)?;
            let base = parse_law(&cfg.base_law, &format!("{path}.base_law"))?;
            check_replicates(cfg.mc_replicates, path)?;
            let closed = cfg
                .use_closed_form
                .unwrap_or(matches!(base, JumpLaw::SimpleNeighbor { dim: 2 }));
            Ok(ExperimentSpec::ReturnTail(ReturnTailSpec {
                base,
                mc_replicates: cfg.mc_replicates,
                mc_horizon: cfg.mc_horizon,
                exact_nmax: cfg.exact_nmax,
                use_closed_form: closed,
                grid_window: cfg.grid_window,
                trend_range: (cfg.trend_range[0], cfg.trend_range[1]),
                trend_max_per_decade: cfg.trend_max_per_decade,
                mc_sd_tolerance: cfg.mc_sd_tolerance,
                halving_ratio_at: cfg.halving_ratio_at,
                halving_ratio_min: cfg.halving_ratio_min,
            }))
        }
        "donsker_preservation" => {
            let cfg: DonskerCfg = strict(value, path)?;
            let walk = parse_walk(cfg.walk, &format!("{path}.walk"))?;
            check_replicates(cfg.replicates, path)?;
            Ok(ExperimentSpec::Donsker(DonskerSpec {
                base: walk.base,
                membrane: walk.membrane,
                start: walk.start,
                horizon: cfg.horizon,
                replicates: cfg.replicates,
                checkpoints_t: cfg.checkpoints_t,
                seed_repetitions: cfg.seed_repetitions,
                ks_level: cfg.ks_level,
                ks_pass_rate: cfg.ks_pass_rate,
                cov_rel_tolerance: cfg.cov_rel_tolerance,
                condition_b_radius: cfg.condition_b_radius,
            }))
        }
        "skew_embedded" => {
            let cfg: SkewCfg = strict(value, path)?;
            check_replicates(cfg.replicates, path)?;
            Ok(ExperimentSpec::Skew(SkewSpec {
                base_steps: cfg.base_steps.iter().map(|a| (a.value, a.prob.0)).collect(),
                kick_steps: cfg.kick_steps.iter().map(|a| (a.value, a.prob.0)).collect(),
                horizon: cfg.horizon,
                replicates: cfg.replicates,
                positive_tolerance: cfg.positive_tolerance,
                ks_threshold: cfg.ks_threshold,
            }))
        }
        "counterexample" => {
            let cfg: CounterexampleCfg = strict(value, path)?;
            check_sorted(&cfg.horizons, &format!("{path}.horizons"))?;
            for &r in &cfg.replicates {
                check_replicates(r, path)?;
            }
            Ok(ExperimentSpec::Counterexample(CounterexampleSpec {
                scale: cfg.scale,
                horizons: cfg.horizons,
                replicates: cfg.replicates,
                floor: cfg.floor,
                confidence_z: crate::stats::Z_99,
            }))
        }
        "g_ratio" => {
            let cfg: GRatioCfg = strict(value, path)?;
            check_replicates(cfg.replicates, path)?;
            check_sorted(&cfg.horizons, &format!("{path}.horizons"))?;
            let membrane_points = cfg
                .membrane_points
                .iter()
                .enumerate()
                .map(|(i, c)| parse_point(c, &format!("{path}.membrane_points[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(ExperimentSpec::GRatio(GRatioSpec {
                base: parse_law(&cfg.base_law, &format!("{path}.base_law"))?,
                membrane_points,
                y: parse_point(&cfg.y, &format!("{path}.y"))?,
                horizons: cfg.horizons,
                replicates: cfg.replicates,
            }))
        }
        other => Err(invalid(
            &format!("{path}.kind"),
            format!("unknown experiment kind {other:?}"),
        )),
    }
}

fn check_replicates(r: u64, path: &str) -> Result<(), ConfigError> {
    if r < 100 {
        Err(invalid(
            path,
            format!("replicate count {r} below minimum 100"),
        ))
    } else {
        Ok(())
    }
}

fn check_sorted(h: &[u64], path: &str) -> Result<(), ConfigError> {
    if h.is_empty() || h.windows(2).any(|w| w[0] >= w[1]) {
        Err(invalid(path, "horizons must be strictly increasing"))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses() {
        let text = r#"{
            "seed": 5,
            "experiments": [
                {
                    "name": "smoke",
                    "kind": "counterexample",
                    "spec": {"scale": 1.0, "horizons": [1000], "replicates": [200]}
                }
            ]
        }"#;
        let parsed = parse_config(text).unwrap();
        assert_eq!(parsed.master_seed, 5);
        assert_eq!(parsed.experiments.len(), 1);
        assert_eq!(parsed.experiments[0].seed, 5);
        assert_eq!(parsed.config_hash.len(), 64);
    }

    #[test]
    fn unknown_fields_are_rejected_with_a_path() {
        let text = r#"{
            "seed": 5,
            "experiments": [
                {
                    "name": "smoke",
                    "kind": "counterexample",
                    "spec": {"scale": 1.0, "horizons": [1000], "replicates": [200], "bogus": 1}
                }
            ]
        }"#;
        let err = parse_config(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("experiments[0].spec"), "{msg}");
        assert!(msg.contains("bogus"), "{msg}");
    }

    #[test]
    fn bad_probability_sum_names_the_law() {
        let text = r#"{
            "experiments": [
                {
                    "name": "walk",
                    "kind": "donsker_preservation",
                    "spec": {
                        "walk": {
                            "start": [0, 0],
                            "base_law": {"kind": "categorical", "atoms": [
                                {"point": [1, 0], "prob": "0.5"},
                                {"point": [-1, 0], "prob": "0.49"}
                            ]}
                        },
                        "horizon": 1000,
                        "replicates": 200
                    }
                }
            ]
        }"#;
        let err = parse_config(text).unwrap_err().to_string();
        assert!(err.contains("base_law"), "{err}");
        assert!(err.contains("0.99"), "{err}");
    }

    #[test]
    fn duplicate_membrane_points_are_rejected() {
        let text = r#"{
            "experiments": [
                {
                    "name": "walk",
                    "kind": "occupation_growth",
                    "spec": {
                        "walk": {
                            "start": [0, 0],
                            "base_law": {"kind": "lazy_simple_neighbor", "dim": 2, "hold_prob": 0.5},
                            "membrane": [
                                {"point": [0, 0], "law": {"kind": "simple_neighbor", "dim": 2}},
                                {"point": [0, 0], "law": {"kind": "simple_neighbor", "dim": 2}}
                            ]
                        },
                        "horizons": [100, 1000],
                        "replicates": 200,
                        "aux_target": [1, 1]
                    }
                }
            ]
        }"#;
        let err = parse_config(text).unwrap_err().to_string();
        assert!(err.contains("membrane points must be distinct"), "{err}");
    }

    #[test]
    fn canonicalization_ignores_whitespace_and_key_order() {
        let a = r#"{"seed": 1, "experiments": []}"#;
        let b = "{\n  \"experiments\": [],  \"seed\": 1\n}";
        let ha = config_hash(&serde_json::from_str(a).unwrap());
        let hb = config_hash(&serde_json::from_str(b).unwrap());
        assert_eq!(ha, hb);
    }

    #[test]
    fn replicate_minimum_is_enforced() {
        let text = r#"{
            "experiments": [
                {
                    "name": "tiny",
                    "kind": "counterexample",
                    "spec": {"scale": 1.0, "horizons": [1000], "replicates": [10]}
                }
            ]
        }"#;
        assert!(matches!(
            parse_config(text),
            Err(ConfigError::Invalid { .. })
        ));
    }

    #[test]
    fn empty_experiment_list_is_valid() {
        let parsed = parse_config(r#"{"experiments": []}"#).unwrap();
        assert!(parsed.experiments.is_empty());
    }
}
