//! `mwalk`: config-driven experiments on locally perturbed lattice walks.
//!
//! Exit codes: 0 all checks pass, 1 an experiment threshold failed,
//! 2 configuration error, 3 runtime error.

use clap::{Parser, Subcommand};
use membrane_walk::condition::condition_b_check;
use membrane_walk::config::{self, ExperimentSpec, ParsedConfig};
use membrane_walk::oracle::{
    build_grid, llt_constant_report, return_tail_constant_report, return_tail_exact,
    return_tail_from_exact_u, simple_walk_2d_u_closed_form,
};
use membrane_walk::output::{run_all, write_return_tail_csv};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_THRESHOLD: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "mwalk", version, about = "Locally perturbed lattice walk experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments of a config file and write CSV/JSON results.
    Run {
        /// Path to the JSON config.
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Worker thread count (0 = library default pool).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Override the config's master seed (applies to every experiment).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Export the exact return-tail table of a jump law as CSV.
    Oracle {
        /// Law spec: inline JSON or a path to a JSON file.
        law_spec: String,
        /// Table horizon.
        #[arg(long)]
        nmax: usize,
        /// Convolution window radius (default: escape-free, capped).
        #[arg(long)]
        window: Option<i64>,
        /// Use the closed product form of the planar simple walk.
        #[arg(long)]
        closed_form: bool,
        /// Output CSV path.
        #[arg(long, default_value = "return_tail.csv")]
        out: PathBuf,
    },
    /// Validate a config and report Condition B for each walk in it.
    Check {
        /// Path to the JSON config.
        config: PathBuf,
        /// Window radius of the accessibility search.
        #[arg(long, default_value_t = 24)]
        radius: i64,
    },
}

fn load_config(path: &PathBuf, seed: Option<u64>) -> Result<ParsedConfig, (u8, String)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| (EXIT_CONFIG, format!("cannot read {}: {e}", path.display())))?;
    let mut parsed = config::parse_config(&text).map_err(|e| (EXIT_CONFIG, format!("{e}")))?;
    if let Some(seed) = seed {
        parsed.master_seed = seed;
        for exp in &mut parsed.experiments {
            exp.seed = seed;
        }
    }
    Ok(parsed)
}

fn cmd_run(
    config_path: PathBuf,
    out: PathBuf,
    workers: usize,
    seed: Option<u64>,
) -> Result<u8, (u8, String)> {
    let parsed = load_config(&config_path, seed)?;
    let workers = (workers > 0).then_some(workers);
    let outcome = run_all(&parsed, workers, &out)
        .map_err(|e| (EXIT_RUNTIME, format!("run failed: {e}")))?;
    for (name, err) in &outcome.failures {
        eprintln!("error: experiment {name}: {err}");
    }
    println!(
        "wrote {} outputs to {} (config {})",
        outcome.manifest.outputs.len(),
        out.display(),
        &parsed.config_hash[..12]
    );
    if !outcome.failures.is_empty() {
        // precondition violations are configuration-class errors
        let config_class = outcome.failures.iter().any(|(_, e)| {
            matches!(
                e,
                membrane_walk::experiments::ExperimentError::Precondition(_)
            )
        });
        return Ok(if config_class { EXIT_CONFIG } else { EXIT_RUNTIME });
    }
    Ok(if outcome.all_passed { 0 } else { EXIT_THRESHOLD })
}

fn cmd_oracle(
    law_spec: String,
    nmax: usize,
    window: Option<i64>,
    closed_form: bool,
    out: PathBuf,
) -> Result<u8, (u8, String)> {
    let text = if law_spec.trim_start().starts_with('{') {
        law_spec
    } else {
        std::fs::read_to_string(&law_spec)
            .map_err(|e| (EXIT_CONFIG, format!("cannot read {law_spec}: {e}")))?
    };
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| (EXIT_CONFIG, format!("law spec: {e}")))?;
    let law = config::parse_law(&value, "law").map_err(|e| (EXIT_CONFIG, format!("{e}")))?;

    let table = if closed_form {
        if !matches!(law, membrane_walk::JumpLaw::SimpleNeighbor { dim: 2 }) {
            return Err((
                EXIT_CONFIG,
                "closed-form return probabilities exist only for the planar simple walk".into(),
            ));
        }
        return_tail_from_exact_u(&simple_walk_2d_u_closed_form(nmax))
    } else {
        build_grid(&law, nmax, window, false).and_then(|grid| return_tail_exact(grid.u()))
    }
    .map_err(|e| (EXIT_RUNTIME, format!("oracle failed: {e}")))?;

    write_return_tail_csv(&out, &table)
        .map_err(|e| (EXIT_RUNTIME, format!("cannot write {}: {e}", out.display())))?;
    println!("period c = {}", table.period);
    if let Ok((_, gamma)) = law.mean_and_covariance() {
        if let Ok(report) = return_tail_constant_report(&table, &gamma) {
            println!(
                "R_n log n = {} at n = {} (statement candidate {}, proof-body candidate {}; \
                 the data supports the {})",
                report.final_value,
                nmax,
                report.statement_constant,
                report.proof_body_constant,
                report.supported
            );
        }
        if let Ok(report) = llt_constant_report(&table.u, table.period, &gamma) {
            println!(
                "n U_cn = {} at the last block (statement candidate {}, covariance reading {}; \
                 the data supports the {})",
                report.final_value,
                report.statement_constant,
                report.covariance_reading_constant,
                report.supported
            );
        }
    }
    println!("wrote {}", out.display());
    Ok(0)
}

fn cmd_check(config_path: PathBuf, radius: i64) -> Result<u8, (u8, String)> {
    let parsed = load_config(&config_path, None)?;
    println!("config ok: hash {}", parsed.config_hash);
    let mut all_ok = true;
    for exp in &parsed.experiments {
        let (base, membrane) = match &exp.spec {
            ExperimentSpec::Transient(s) => (&s.base, s.membrane.clone()),
            ExperimentSpec::Occupation(s) => (&s.base, s.membrane.clone()),
            ExperimentSpec::Donsker(s) => (&s.base, s.membrane.clone()),
            _ => {
                println!("{}: no walk section to check", exp.name);
                continue;
            }
        };
        match condition_b_check(base, &membrane, radius) {
            Ok(report) => {
                let ok = report.aperiodic && report.accessibility_ok;
                all_ok &= ok;
                println!(
                    "{}: aperiodic = {} (subgroup index {}), accessibility = {} \
                     ({} unreached window points, radius {})",
                    exp.name,
                    report.aperiodic,
                    report.generated_subgroup_index,
                    report.accessibility_ok,
                    report.unreached_count,
                    report.search_radius
                );
            }
            Err(e) => {
                all_ok = false;
                println!("{}: inconclusive: {e}", exp.name);
            }
        }
    }
    Ok(if all_ok { 0 } else { EXIT_THRESHOLD })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            workers,
            seed,
        } => cmd_run(config, out, workers, seed),
        Command::Oracle {
            law_spec,
            nmax,
            window,
            closed_form,
            out,
        } => cmd_oracle(law_spec, nmax, window, closed_form, out),
        Command::Check { config, radius } => cmd_check(config, radius),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
