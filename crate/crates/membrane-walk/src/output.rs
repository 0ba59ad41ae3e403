//! Result persistence and the experiment runner.
//!
//! All data files are byte-stable: UTF-8, LF line endings, shortest
//! round-trip float formatting, rows emitted in a fixed order. Rerunning
//! the same config and seed with any worker count reproduces every CSV and
//! the summary JSON byte for byte (the manifest additionally records
//! wall-clock and worker count, which vary by design).

use crate::config::{ExperimentSpec, ParsedConfig, ParsedExperiment};
use crate::exec::with_worker_pool;
use crate::experiments::{
    estimate_g_ratio, run_counterexample, run_donsker_preservation, run_occupation_growth,
    run_return_tail, run_skew_embedded, run_transient_preservation, ExperimentError,
    ExperimentResult, RunContext,
};
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("output directory error: {0}")]
    Io(#[from] std::io::Error),
    #[error("experiment {name} failed: {source}")]
    Experiment {
        name: String,
        #[source]
        source: ExperimentError,
    },
}

/// Shortest round-trip decimal representation.
fn fmt(v: f64) -> String {
    format!("{v}")
}

pub fn write_csv(
    path: &Path,
    header: &str,
    rows: impl IntoIterator<Item = String>,
) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())
}

/// Export an exact return-tail table as CSV.
pub fn write_return_tail_csv(
    path: &Path,
    table: &crate::oracle::ReturnTailTable,
) -> std::io::Result<()> {
    write_csv(
        path,
        "k,u,u_lower,u_upper,r,r_lower,r_upper",
        table.u.iter().zip(&table.r).enumerate().map(|(k, (u, r))| {
            format!(
                "{k},{},{},{},{},{},{}",
                fmt(u.mid()),
                fmt(u.lo),
                fmt(u.hi),
                fmt(r.mid()),
                fmt(r.lo),
                fmt(r.hi)
            )
        }),
    )
}

#[derive(Serialize)]
struct FlagJson {
    name: String,
    passed: bool,
    value: f64,
    threshold: f64,
    detail: String,
}

#[derive(Serialize)]
struct ExperimentJson {
    name: String,
    kind: String,
    claim: String,
    seed: u64,
    passed: bool,
    flags: Vec<FlagJson>,
    notes: Vec<String>,
    results_csv: String,
    plot_files: Vec<String>,
}

#[derive(Serialize)]
struct SummaryJson {
    config_hash: String,
    master_seed: u64,
    all_passed: bool,
    experiments: Vec<ExperimentJson>,
}

#[derive(Serialize, serde::Deserialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub master_seed: u64,
    pub worker_count: usize,
    pub tool_version: String,
    pub outputs: Vec<OutputRecord>,
    pub failures: Vec<String>,
    pub wall_clock_seconds: f64,
    pub all_passed: bool,
}

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Re-validate a run directory against its manifest: every referenced
/// output must exist and hash to its recorded digest. Returns the list of
/// mismatches (empty = valid).
pub fn validate_manifest(out_dir: &Path) -> std::io::Result<Vec<String>> {
    #[derive(serde::Deserialize)]
    struct ManifestOutputs {
        outputs: Vec<OutputRecord>,
    }
    let text = fs::read_to_string(out_dir.join("manifest.json"))?;
    let manifest: ManifestOutputs = serde_json::from_str(&text)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
    let mut mismatches = Vec::new();
    for record in manifest.outputs {
        match fs::read(out_dir.join(&record.path)) {
            Ok(bytes) if sha256_hex(&bytes) == record.sha256 => {}
            Ok(_) => mismatches.push(format!("{}: digest mismatch", record.path)),
            Err(e) => mismatches.push(format!("{}: {e}", record.path)),
        }
    }
    Ok(mismatches)
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn write_experiment_outputs(
    out_dir: &Path,
    result: &ExperimentResult,
) -> std::io::Result<(String, Vec<String>)> {
    let stem = sanitize(&result.name);
    let results_name = format!("{stem}_results.csv");
    write_csv(
        &out_dir.join(&results_name),
        "horizon,statistic,value,lo,hi",
        result.rows.iter().map(|r| {
            format!(
                "{},{},{},{},{}",
                r.horizon,
                r.statistic,
                fmt(r.value),
                fmt(r.lo),
                fmt(r.hi)
            )
        }),
    )?;
    let mut plot_files = Vec::new();
    for plot in &result.plots {
        let plot_name = format!("{stem}_plot_{}.csv", sanitize(&plot.name));
        write_csv(
            &out_dir.join(&plot_name),
            "x,y,y_lo,y_hi",
            plot.rows
                .iter()
                .map(|(x, y, lo, hi)| format!("{},{},{},{}", fmt(*x), fmt(*y), fmt(*lo), fmt(*hi))),
        )?;
        plot_files.push(plot_name);
    }
    Ok((results_name, plot_files))
}

/// Execute one parsed experiment.
pub fn execute(
    parsed: &ParsedExperiment,
    experiment_index: u64,
) -> Result<ExperimentResult, ExperimentError> {
    let ctx = RunContext::new(parsed.seed, experiment_index);
    let mut result = match &parsed.spec {
        ExperimentSpec::Transient(spec) => run_transient_preservation(spec, ctx)?,
        ExperimentSpec::Occupation(spec) => run_occupation_growth(spec, ctx)?,
        ExperimentSpec::ReturnTail(spec) => run_return_tail(spec, ctx)?,
        ExperimentSpec::Donsker(spec) => run_donsker_preservation(spec, ctx)?,
        ExperimentSpec::Skew(spec) => run_skew_embedded(spec, ctx)?,
        ExperimentSpec::Counterexample(spec) => run_counterexample(spec, ctx)?,
        ExperimentSpec::GRatio(spec) => estimate_g_ratio(spec, ctx)?,
    };
    result.name = parsed.name.clone();
    Ok(result)
}

/// Outcome of a full config run: everything needed for exit-code mapping.
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub all_passed: bool,
    pub failures: Vec<(String, ExperimentError)>,
}

/// Run every experiment of a parsed config, emit CSV/JSON outputs, a
/// human-readable report and the manifest. Experiments run sequentially in
/// config order; replicates fan out on the worker pool. Failed experiments
/// do not abort the run: completed outputs are kept and the failures are
/// indexed.
pub fn run_all(
    config: &ParsedConfig,
    workers: Option<usize>,
    out_dir: &Path,
) -> Result<RunOutcome, RunError> {
    fs::create_dir_all(out_dir)?;
    let started = std::time::Instant::now();
    let results: Vec<Result<ExperimentResult, ExperimentError>> = with_worker_pool(workers, || {
        config
            .experiments
            .iter()
            .enumerate()
            .map(|(i, parsed)| execute(parsed, i as u64))
            .collect()
    });

    let mut outputs = Vec::new();
    let mut experiments_json = Vec::new();
    let mut failures = Vec::new();
    let mut report = String::new();
    report.push_str("experiment report\n=================\n\n");
    for (parsed, result) in config.experiments.iter().zip(results) {
        match result {
            Ok(result) => {
                let (results_csv, plot_files) = write_experiment_outputs(out_dir, &result)?;
                outputs.push(results_csv.clone());
                outputs.extend(plot_files.iter().cloned());
                report.push_str(&format!(
                    "{} [{}]\n  claim: {}\n  status: {}\n",
                    result.name,
                    result.kind,
                    result.claim,
                    if result.passed() { "PASS" } else { "FAIL" }
                ));
                for flag in &result.flags {
                    report.push_str(&format!(
                        "  - {}: {} (value {}, threshold {}) {}\n",
                        flag.name,
                        if flag.passed { "pass" } else { "FAIL" },
                        fmt(flag.value),
                        fmt(flag.threshold),
                        flag.detail
                    ));
                }
                for note in &result.notes {
                    report.push_str(&format!("  note: {note}\n"));
                }
                report.push('\n');
                experiments_json.push(ExperimentJson {
                    name: result.name.clone(),
                    kind: result.kind.to_string(),
                    claim: result.claim.to_string(),
                    seed: result.seed,
                    passed: result.passed(),
                    flags: result
                        .flags
                        .iter()
                        .map(|f| FlagJson {
                            name: f.name.clone(),
                            passed: f.passed,
                            value: f.value,
                            threshold: f.threshold,
                            detail: f.detail.clone(),
                        })
                        .collect(),
                    notes: result.notes.clone(),
                    results_csv,
                    plot_files,
                });
            }
            Err(err) => {
                report.push_str(&format!("{}\n  status: ERROR\n  error: {err}\n\n", parsed.name));
                failures.push((parsed.name.clone(), err));
            }
        }
    }

    let all_passed = failures.is_empty() && experiments_json.iter().all(|e| e.passed);
    let summary = SummaryJson {
        config_hash: config.config_hash.clone(),
        master_seed: config.master_seed,
        all_passed,
        experiments: experiments_json,
    };
    fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary).expect("serializable") + "\n",
    )?;
    outputs.push("summary.json".into());
    fs::write(out_dir.join("report.txt"), &report)?;
    outputs.push("report.txt".into());
    if !failures.is_empty() {
        let index: Vec<String> = failures
            .iter()
            .map(|(name, err)| format!("{name}: {err}"))
            .collect();
        fs::write(out_dir.join("errors.txt"), index.join("\n") + "\n")?;
        outputs.push("errors.txt".into());
    }

    let output_records = outputs
        .iter()
        .map(|name| {
            let bytes = fs::read(out_dir.join(name))?;
            Ok(OutputRecord {
                path: name.clone(),
                sha256: sha256_hex(&bytes),
            })
        })
        .collect::<std::io::Result<Vec<_>>>()?;
    let manifest = RunManifest {
        config_hash: config.config_hash.clone(),
        master_seed: config.master_seed,
        worker_count: workers.unwrap_or(0),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: output_records,
        failures: failures.iter().map(|(n, _)| n.clone()).collect(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        all_passed,
    };
    fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("serializable") + "\n",
    )?;

    Ok(RunOutcome {
        all_passed,
        failures: failures.into_iter().collect(),
        manifest,
    })
}

/// Paths of the byte-stable data files of a run (everything except the
/// manifest, which records wall-clock and worker count).
pub fn stable_output_paths(out_dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(out_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().is_some_and(|n| n != "manifest.json"))
        .collect();
    paths.sort();
    Ok(paths)
}
