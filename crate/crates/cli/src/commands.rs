use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Result};
use serde::Serialize;

use lvg_core::harness::{build_problem, energy_records_to_csv, run_energy_scan, BoundarySpec, ExperimentSpec};
use lvg_core::io;
use lvg_core::isoperimetry::brute_force_cis;
use lvg_core::solver::{residual, solve_with_fallback, NewtonOptions, Nonlinearity};
use lvg_core::{chain_audit, Error, LatticeWindow};

use crate::Command;

pub const EXIT_IO: u8 = 1;
pub const EXIT_NONCONVERGENCE: u8 = 2;
pub const EXIT_SINGULAR: u8 = 3;
pub const EXIT_INPUT: u8 = 4;
pub const EXIT_AUDIT: u8 = 5;
pub const EXIT_SIZE_LIMIT: u8 = 6;

/// Raised when an audit ran to completion but some step was violated.
#[derive(Debug)]
struct AuditFailed(String);

impl std::fmt::Display for AuditFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for AuditFailed {}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<AuditFailed>().is_some() {
        return EXIT_AUDIT;
    }
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err.root() {
                Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
                Error::SingularJacobian { .. } => EXIT_SINGULAR,
                Error::SizeLimit { .. } => EXIT_SIZE_LIMIT,
                Error::Io { .. } => EXIT_IO,
                _ => EXIT_INPUT,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return EXIT_IO;
        }
    }
    EXIT_INPUT
}

/// The error chain joined with `: `, stopping at the first library error
/// since its message already carries its own sources.
pub fn describe(e: &anyhow::Error) -> String {
    let mut parts = Vec::new();
    for cause in e.chain() {
        parts.push(cause.to_string());
        if cause.downcast_ref::<Error>().is_some() {
            break;
        }
    }
    parts.join(": ")
}

pub(crate) fn run(cmd: Command, w: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::GenLattice { n, ghost, out } => gen_lattice(n, ghost, out.as_deref(), w),
        Command::Solve { graph, boundary, nonlinearity, tol, out } => {
            solve(&graph, &boundary, &nonlinearity, tol, &out, w)
        }
        Command::Audit { graph, solution, cis, sigma_min, out } => audit(&graph, &solution, cis, &sigma_min, &out, w),
        Command::Isoperimetry { graph, admissible, limit } => isoperimetry(&graph, admissible.as_deref(), limit, w),
        Command::EnergyScan { n, lambdas, center, tol, out } => energy_scan(n, lambdas, center, tol, out, w),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    Ok(())
}

fn gen_lattice(n: usize, ghost: bool, out: Option<&Path>, w: &mut dyn Write) -> Result<()> {
    let win = LatticeWindow::new(n, ghost)?;
    let text = io::graph_to_json(win.graph());
    match out {
        Some(path) => io::write_string(path, &text)?,
        None => write!(w, "{text}")?,
    }
    Ok(())
}

fn parse_nonlinearity(name: &str) -> Result<Nonlinearity> {
    match name {
        "exp" => Ok(Nonlinearity::exponential()),
        "zero" => Ok(Nonlinearity::zero()),
        other => Err(Error::Domain(format!("unknown nonlinearity `{other}` (expected exp or zero)")).into()),
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    converged: bool,
    residual_sup: f64,
    iterations: usize,
    damping_events: Option<usize>,
    continuation_steps: &'a [f64],
    energy_interior: f64,
    energy_convention: &'static str,
    tolerance: f64,
    error: Option<String>,
    solution: &'a [f64],
}

const ENERGY_CONVENTION: &str = "sum of mu e^u over interior vertices; boundary vertices excluded";

fn solve(graph: &Path, boundary: &str, nonlinearity: &str, tol: f64, out: &Path, w: &mut dyn Write) -> Result<()> {
    let spec: BoundarySpec = boundary.parse()?;
    let nl = parse_nonlinearity(nonlinearity)?;
    let g = io::read_graph(graph)?;
    let p = build_problem(g, &spec, nl)?;
    let opts = NewtonOptions { tol, ..NewtonOptions::default() };
    create_dir(out)?;
    let solution_path = out.join("solution.csv");
    let report_path = out.join("report.json");

    match solve_with_fallback(&p, &opts) {
        Ok(rep) => {
            io::write_string(&solution_path, &io::solution_to_csv(p.graph(), &rep.solution))?;
            let output = SolveOutput {
                converged: true,
                residual_sup: rep.residual_sup,
                iterations: rep.iterations,
                damping_events: Some(rep.damping_events),
                continuation_steps: &rep.continuation_steps,
                energy_interior: rep.energy_interior,
                energy_convention: ENERGY_CONVENTION,
                tolerance: tol,
                error: None,
                solution: rep.solution.values(),
            };
            io::write_string(&report_path, &(serde_json::to_string_pretty(&output)? + "\n"))?;
            writeln!(
                w,
                "converged in {} iterations, residual {}, interior energy {}",
                rep.iterations,
                io::fmt_f64(rep.residual_sup),
                io::fmt_f64(rep.energy_interior)
            )?;
            Ok(())
        }
        Err(err) => {
            // keep the last iterate around for inspection
            if let Some(last) = err.last_iterate() {
                let res = residual(&p, last).map(|r| r.sup_norm()).unwrap_or(f64::NAN);
                let (iterations, steps) = match &err {
                    Error::Continuation { t, source } => (iterations_of(source), vec![*t]),
                    other => (iterations_of(other), vec![1.0]),
                };
                io::write_string(&solution_path, &io::solution_to_csv(p.graph(), last))?;
                let output = SolveOutput {
                    converged: false,
                    residual_sup: res,
                    iterations,
                    damping_events: None,
                    continuation_steps: &steps,
                    energy_interior: p.energy_interior(last),
                    energy_convention: ENERGY_CONVENTION,
                    tolerance: tol,
                    error: Some(err.to_string()),
                    solution: last.values(),
                };
                io::write_string(&report_path, &(serde_json::to_string_pretty(&output)? + "\n"))?;
            }
            Err(anyhow::Error::new(err).context("solve failed"))
        }
    }
}

fn iterations_of(err: &Error) -> usize {
    match err.root() {
        Error::NonConvergence { iterations, .. } => *iterations,
        Error::SingularJacobian { iteration, .. } => *iteration,
        _ => 0,
    }
}

fn audit(graph: &Path, solution: &Path, cis: f64, sigma_min: &str, out: &Path, w: &mut dyn Write) -> Result<()> {
    let g = io::read_graph(graph)?;
    let u = io::read_solution(solution, &g)?;
    let flagged = g.boundary_flagged();
    let sigma_min = match sigma_min {
        "auto" => flagged.indices().map(|x| u.get(x)).fold(f64::NEG_INFINITY, f64::max),
        "none" => f64::NEG_INFINITY,
        s => s.parse().map_err(|_| Error::Domain(format!("--sigma-min must be auto, none or a number, got `{s}`")))?,
    };
    let interior = (!flagged.is_empty()).then(|| flagged.complement());
    let ledger = chain_audit(&g, &u, cis, sigma_min, interior.as_ref())?;

    create_dir(out)?;
    io::write_string(&out.join("ledger.json"), &(serde_json::to_string_pretty(&ledger)? + "\n"))?;
    io::write_string(&out.join("ledger.csv"), &ledger.to_csv())?;

    if ledger.passed {
        writeln!(
            w,
            "audit passed: {} levels, min slack {}, lower bound {}",
            ledger.records.len(),
            io::fmt_f64(ledger.min_slack()),
            io::fmt_f64(ledger.final_lower_bound)
        )?;
        return Ok(());
    }
    let first = &ledger.violations[0];
    let sigma = first.sigma.map(io::fmt_f64).unwrap_or_else(|| "-".into());
    Err(AuditFailed(format!(
        "audit failed: {} violation(s); first at step {} sigma {}: slack {} beyond tolerance {}",
        ledger.violations.len(),
        first.step.name(),
        sigma,
        io::fmt_f64(first.slack),
        io::fmt_f64(first.tolerance)
    ))
    .into())
}

fn isoperimetry(graph: &Path, admissible: Option<&[i64]>, limit: usize, w: &mut dyn Write) -> Result<()> {
    let g = io::read_graph(graph)?;
    let adm = match admissible {
        Some(ids) => g.set_from_ids(ids.iter().copied())?,
        None => {
            let flagged = g.boundary_flagged();
            if flagged.is_empty() {
                g.full_set()
            } else {
                flagged.complement()
            }
        }
    };
    let report = brute_force_cis(&g, &adm, limit)?;
    writeln!(w, "{}", serde_json::to_string(&report)?)?;
    Ok(())
}

fn jobs_from_env() -> Result<Option<usize>> {
    match std::env::var("LVG_JOBS") {
        Ok(v) => {
            let j: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|&j| j > 0)
                .ok_or_else(|| anyhow!(Error::Domain(format!("LVG_JOBS must be a positive integer, got `{v}`"))))?;
            Ok(Some(j))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => bail!(Error::Domain(format!("LVG_JOBS: {e}"))),
    }
}

fn energy_scan(
    n: Vec<usize>,
    lambdas: Vec<f64>,
    center: Option<Vec<f64>>,
    tol: f64,
    out: Option<PathBuf>,
    w: &mut dyn Write,
) -> Result<()> {
    let mut spec = ExperimentSpec::new(n, lambdas);
    spec.center = center.map(|c| [c[0], c[1]]);
    spec.tolerance = tol;
    if let Some(dir) = &out {
        spec.output_dir = dir.clone();
    }
    let jobs = jobs_from_env()?;
    let records = run_energy_scan(&spec, jobs)?;
    let csv = energy_records_to_csv(&records);
    match out {
        Some(dir) => {
            create_dir(&dir)?;
            let path = dir.join("energy_scan.csv");
            io::write_string(&path, &csv)?;
            let converged = records.iter().filter(|r| r.converged).count();
            writeln!(w, "{} cells ({converged} converged) written to {}", records.len(), path.display())?;
        }
        None => write!(w, "{csv}")?,
    }
    Ok(())
}
