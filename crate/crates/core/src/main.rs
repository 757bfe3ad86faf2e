//! Batch front end. Three subcommands share one JSON config: `check`
//! validates the configured density without solving, `run` minimizes a
//! single scenario and writes artifacts, `sweep` re-solves while one numeric
//! field steps through a value list, warm-starting each step.
//!
//! Exit codes: 0 success, 2 config or input error, 3 solver stopped without
//! converging (artifacts still written), 4 density hypothesis violated.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use velum::analysis::{eta_estimate, residual_suite, BasisSpec, EtaReport};
use velum::config::{OutputFormat, RunConfig};
use velum::discretization::ProblemSpec;
use velum::energy::{
    hypothesis_check, lifted_bending_density, objectivity_check, polyconvexity_probe,
    EnergyBreakdown, HypothesisReport, MaterialParams, ObjectivityReport, PolyconvexityReport,
    Status,
};
use velum::io::{trace_csv, vtk_surface, write_atomic, write_json};
use velum::solver::{minimize, MinimizeResult, StopReason};
use velum::Error;

/// Objectivity deviations beyond this fail the gate.
const OBJECTIVITY_GATE: f64 = 1e-10;
const HYPOTHESIS_SAMPLES: usize = 2000;
const OBJECTIVITY_SAMPLES: usize = 1000;
const CONVEXITY_SEGMENTS: usize = 500;

const EXIT_CONFIG: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_HYPOTHESIS: u8 = 4;

#[derive(Parser)]
#[command(name = "velum", version, about = "second-gradient elastic surface solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate the configured density: growth exponent, sampled coercivity,
    /// objectivity and a chord-convexity probe. No solve.
    Check {
        #[arg(long)]
        config: PathBuf,
        /// Accept a split density whose tangential weight is zero.
        #[arg(long)]
        allow_noncoercive: bool,
    },
    /// Minimize the configured scenario and write surface, trace and report
    /// artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override outputs.directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override solver.seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        allow_noncoercive: bool,
    },
    /// Re-solve while one numeric config field steps through a value list,
    /// warm-starting each step from the previous minimizer.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Dotted path into the config, e.g. material.c_b or loads.b.2.
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Override outputs.directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        allow_noncoercive: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Check {
            config,
            allow_noncoercive,
        } => cmd_check(&config, allow_noncoercive),
        Cmd::Run {
            config,
            out,
            seed,
            allow_noncoercive,
        } => cmd_run(&config, out, seed, allow_noncoercive),
        Cmd::Sweep {
            config,
            param,
            values,
            out,
            allow_noncoercive,
        } => cmd_sweep(&config, &param, &values, out, allow_noncoercive),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::SweepNotConverged { .. } => EXIT_NOT_CONVERGED,
                Error::HypothesisViolation { .. } | Error::Inapplicable { .. } => EXIT_HYPOTHESIS,
                _ => EXIT_CONFIG,
            })
        }
    }
}

fn config_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

struct DensityChecks {
    hypothesis: HypothesisReport,
    objectivity: ObjectivityReport,
    convexity: PolyconvexityReport,
}

fn density_checks(material: &MaterialParams, seed: u64) -> Result<DensityChecks, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hypothesis = hypothesis_check(material, HYPOTHESIS_SAMPLES, 0.1, 10.0, &mut rng)?;
    let objectivity = objectivity_check(material, OBJECTIVITY_SAMPLES, &mut rng)?;
    let convexity =
        polyconvexity_probe(lifted_bending_density(material), CONVEXITY_SEGMENTS, &mut rng);
    Ok(DensityChecks {
        hypothesis,
        objectivity,
        convexity,
    })
}

struct Gate {
    failures: Vec<String>,
    warnings: Vec<String>,
}

fn evaluate_gate(checks: &DensityChecks, material: &MaterialParams, allow_noncoercive: bool) -> Gate {
    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    let h = &checks.hypothesis;
    if !h.growth_ok {
        failures.push(format!(
            "growth exponent q = {} is below the coercivity threshold 2p/(p-2) = {}",
            h.q, h.growth_threshold,
        ));
    }
    if h.coercivity_violations > 0 {
        failures.push(format!(
            "sampled coercivity bound failed on {} of {} states (min ratio {:.3e} < c_low {:.3e})",
            h.coercivity_violations, h.sample_count, h.min_coercivity_ratio, h.c_low,
        ));
    }
    let dev = checks.objectivity.max_relative_deviation;
    if dev > OBJECTIVITY_GATE {
        failures.push(format!(
            "objectivity deviation {dev:.3e} exceeds {OBJECTIVITY_GATE:.0e}"
        ));
    }
    if material.noncoercive_split() {
        let msg = "split density with c_Gamma = 0 is non-coercive: \
                   only the normal part of the second gradient is controlled";
        if allow_noncoercive {
            warnings.push(msg.to_string());
        } else {
            failures.push(format!("{msg} (pass --allow-noncoercive to proceed)"));
        }
    }
    Gate { failures, warnings }
}

fn print_check_report(checks: &DensityChecks) {
    for rec in &checks.hypothesis.records {
        let status = match rec.status {
            Status::Pass => "pass",
            Status::Warn => "warn",
            Status::Fail => "FAIL",
        };
        let consts: Vec<String> = rec
            .witness_constants
            .iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .collect();
        println!("{:<28} {:<4} {}", rec.check, status, consts.join(", "));
    }
    let o = &checks.objectivity;
    println!(
        "{:<28} {:<4} max relative deviation {:.3e} over {} rotations",
        "objectivity",
        if o.max_relative_deviation <= OBJECTIVITY_GATE { "pass" } else { "FAIL" },
        o.max_relative_deviation,
        o.sample_count,
    );
    let c = &checks.convexity;
    println!(
        "{:<28} {:<4} {} chord violations in {} checks",
        "polyconvexity_probe",
        if c.violations.is_empty() { "pass" } else { "warn" },
        c.violations.len(),
        c.checks,
    );
}

fn cmd_check(config_path: &Path, allow_noncoercive: bool) -> Result<u8, Error> {
    let cfg = RunConfig::from_path(config_path)?;
    cfg.build(&config_dir(config_path))?;
    let checks = density_checks(&cfg.material, cfg.solver.seed)?;
    print_check_report(&checks);
    let gate = evaluate_gate(&checks, &cfg.material, allow_noncoercive);
    for w in &gate.warnings {
        println!("warning: {w}");
    }
    if gate.failures.is_empty() {
        println!("check: ok");
        Ok(0)
    } else {
        for f in &gate.failures {
            eprintln!("check failed: {f}");
        }
        Ok(EXIT_HYPOTHESIS)
    }
}

/// eta.json holds the report itself when the estimator applies, and an
/// explicit refusal with the reason otherwise.
#[derive(Serialize)]
#[serde(untagged)]
enum EtaArtifact {
    Report(Box<EtaReport>),
    Unavailable { available: bool, reason: String },
}

#[derive(Serialize)]
struct RunSummary<'a> {
    converged: bool,
    stop: StopReason,
    iterations: usize,
    grad_norm: f64,
    #[serde(rename = "min_J")]
    min_j: f64,
    energy: EnergyBreakdown,
    load_work: f64,
    potential: f64,
    seed: u64,
    grid: [usize; 2],
    eta: Option<f64>,
    max_normalized_residual: f64,
    hypothesis: &'a HypothesisReport,
    objectivity: &'a ObjectivityReport,
}

struct StepSummary {
    eta: Option<f64>,
    max_residual: f64,
}

fn write_run_artifacts(
    dir: &Path,
    cfg: &RunConfig,
    problem: &ProblemSpec,
    result: &MinimizeResult,
    checks: &DensityChecks,
) -> Result<StepSummary, Error> {
    let formats = &cfg.outputs.formats;
    if formats.contains(&OutputFormat::Vtk) {
        let vtk = vtk_surface(&result.field, &problem.grid, &problem.material);
        write_atomic(&dir.join("surface.vtk"), vtk.as_bytes())?;
    }
    if formats.contains(&OutputFormat::Csv) {
        write_atomic(&dir.join("trace.csv"), trace_csv(&result.trace).as_bytes())?;
    }
    let residual = residual_suite(result, problem, &BasisSpec::default())?;
    let eta_artifact = match eta_estimate(result, problem) {
        Ok(report) => EtaArtifact::Report(Box::new(report)),
        Err(
            e @ (Error::Inapplicable { .. }
            | Error::InvalidInput(_)
            | Error::BisectionFailure { .. }),
        ) => EtaArtifact::Unavailable {
            available: false,
            reason: e.to_string(),
        },
        Err(e) => return Err(e),
    };
    let eta = match &eta_artifact {
        EtaArtifact::Report(r) => Some(r.eta),
        EtaArtifact::Unavailable { .. } => None,
    };
    if formats.contains(&OutputFormat::Json) {
        write_json(&dir.join("residual.json"), &residual)?;
        write_json(&dir.join("eta.json"), &eta_artifact)?;
        let summary = RunSummary {
            converged: result.converged,
            stop: result.stop,
            iterations: result.iterations,
            grad_norm: result.grad_norm,
            min_j: result.min_j,
            energy: result.energy,
            load_work: result.load_work,
            potential: result.potential,
            seed: cfg.solver.seed,
            grid: [problem.grid.nx, problem.grid.ny],
            eta,
            max_normalized_residual: residual.max_normalized,
            hypothesis: &checks.hypothesis,
            objectivity: &checks.objectivity,
        };
        write_json(&dir.join("run.json"), &summary)?;
    }
    Ok(StepSummary {
        eta,
        max_residual: residual.max_normalized,
    })
}

fn cmd_run(
    config_path: &Path,
    out: Option<PathBuf>,
    seed: Option<u64>,
    allow_noncoercive: bool,
) -> Result<u8, Error> {
    let mut cfg = RunConfig::from_path(config_path)?;
    if let Some(dir) = out {
        cfg.outputs.directory = dir;
    }
    if let Some(s) = seed {
        cfg.solver.seed = s;
    }
    let (problem, solve_cfg) = cfg.build(&config_dir(config_path))?;

    let checks = density_checks(&cfg.material, cfg.solver.seed)?;
    let gate = evaluate_gate(&checks, &cfg.material, allow_noncoercive);
    for w in &gate.warnings {
        eprintln!("warning: {w}");
    }
    if !gate.failures.is_empty() {
        for f in &gate.failures {
            eprintln!("check failed: {f}");
        }
        return Ok(EXIT_HYPOTHESIS);
    }

    let start = problem.boundary.f_o.clone();
    let result = minimize(&start, &problem, &solve_cfg)?;
    let dir = cfg.outputs.directory.clone();
    write_run_artifacts(&dir, &cfg, &problem, &result, &checks)?;
    println!(
        "{}: energy {:.6e}, potential {:.6e}, grad {:.3e}, min J {:.6}, {} iterations -> {}",
        if result.converged { "converged" } else { "not converged" },
        result.energy.total,
        result.potential,
        result.grad_norm,
        result.min_j,
        result.iterations,
        dir.display(),
    );
    if !result.converged {
        eprintln!(
            "solver stopped without converging ({}); artifacts written and flagged",
            stop_label(result.stop),
        );
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(0)
}

fn stop_label(stop: StopReason) -> &'static str {
    match stop {
        StopReason::Converged => "converged",
        StopReason::MaxIterations => "iteration budget exhausted",
        StopReason::LineSearchStalled => "line search stalled",
    }
}

struct SummaryRow {
    value: f64,
    energy: EnergyBreakdown,
    load_work: f64,
    potential: f64,
    min_j: f64,
    eta: Option<f64>,
    max_residual: f64,
    converged: bool,
}

fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(
        "param,energy,membrane,bending,barrier,load_work,potential,min_J,eta,max_residual,converged\n",
    );
    for r in rows {
        let eta = r.eta.map(|v| format!("{v:.12e}")).unwrap_or_default();
        out.push_str(&format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{:.12e},{}\n",
            r.value,
            r.energy.total,
            r.energy.membrane,
            r.energy.bending,
            r.energy.barrier,
            r.load_work,
            r.potential,
            r.min_j,
            eta,
            r.max_residual,
            r.converged,
        ));
    }
    out
}

fn cmd_sweep(
    config_path: &Path,
    param: &str,
    values: &[f64],
    out: Option<PathBuf>,
    allow_noncoercive: bool,
) -> Result<u8, Error> {
    let mut base_cfg = RunConfig::from_path(config_path)?;
    if let Some(dir) = out {
        base_cfg.outputs.directory = dir;
    }
    let base = config_dir(config_path);

    // Materialize and gate every step up front, so a bad value or an
    // inadmissible density fails before any solve has run.
    let mut steps = Vec::new();
    for &v in values {
        let mut cfg = base_cfg.clone();
        cfg.set_path(param, v)?;
        let (problem, solve) = cfg.build(&base)?;
        let checks = density_checks(&cfg.material, cfg.solver.seed)?;
        let gate = evaluate_gate(&checks, &cfg.material, allow_noncoercive);
        for w in &gate.warnings {
            eprintln!("warning: {param} = {v}: {w}");
        }
        if !gate.failures.is_empty() {
            for f in &gate.failures {
                eprintln!("check failed: {param} = {v}: {f}");
            }
            return Ok(EXIT_HYPOTHESIS);
        }
        steps.push((v, cfg, problem, solve, checks));
    }

    let root = base_cfg.outputs.directory.clone();
    let mut rows = Vec::new();
    let mut current = steps[0].2.boundary.f_o.clone();
    let mut stalled = None;
    for (k, (v, cfg, problem, solve, checks)) in steps.iter().enumerate() {
        problem.project_field(&mut current);
        let result = minimize(&current, problem, solve).map_err(|e| {
            Error::InvalidInput(format!("sweep step {k} ({param} = {v}): {e}"))
        })?;
        let dir = root.join(format!("step_{k:02}"));
        let step = write_run_artifacts(&dir, cfg, problem, &result, checks)?;
        println!(
            "step {k}: {param} = {v}: {}, energy {:.6e}, min J {:.6}",
            if result.converged { "converged" } else { "not converged" },
            result.energy.total,
            result.min_j,
        );
        rows.push(SummaryRow {
            value: *v,
            energy: result.energy,
            load_work: result.load_work,
            potential: result.potential,
            min_j: result.min_j,
            eta: step.eta,
            max_residual: step.max_residual,
            converged: result.converged,
        });
        let converged = result.converged;
        current = result.field;
        if !converged {
            stalled = Some(k);
            break;
        }
    }
    write_atomic(&root.join("summary.csv"), summary_csv(&rows).as_bytes())?;
    println!("summary: {}", root.join("summary.csv").display());
    if let Some(k) = stalled {
        eprintln!("sweep stopped: step {k} did not converge; artifacts written and flagged");
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(0)
}
