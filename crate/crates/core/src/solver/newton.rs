use serde::Serialize;

use super::{lu_factor, DirichletProblem};
use crate::error::{Error, Result};
use crate::graph::ScalarField;

/// Relative pivot floor for the dense LU.
pub(crate) const PIVOT_FLOOR: f64 = 1e-14;

/// Schedule used by [`solve_with_fallback`] when plain Newton fails.
pub const FALLBACK_SCHEDULE: [f64; 3] = [0.25, 0.5, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Sup-norm residual tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Step halvings allowed per iteration before giving up.
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 50, max_halvings: 30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub solution: ScalarField,
    pub residual_sup: f64,
    pub iterations: usize,
    pub damping_events: usize,
    pub continuation_steps: Vec<f64>,
    /// `sum_{x interior} mu_x e^{u(x)}`; the boundary layer is excluded.
    pub energy_interior: f64,
    pub converged: bool,
}

struct Run {
    full: Vec<f64>,
    residual_sup: f64,
    iterations: usize,
    damping_events: usize,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton for `Lap u + t F(u) = 0` from `full` (boundary included).
fn newton_scaled(p: &DirichletProblem, mut full: Vec<f64>, t: f64, opts: &NewtonOptions) -> Result<Run> {
    let n = p.unknowns();
    let mut r = p.residual_raw(&full, t);
    let mut damping_events = 0;
    for iteration in 0..=opts.max_iter {
        let residual_sup = sup(&r);
        if residual_sup <= opts.tol {
            return Ok(Run { full, residual_sup, iterations: iteration, damping_events });
        }
        if iteration == opts.max_iter {
            return Err(Error::NonConvergence {
                iterations: iteration,
                residual_sup,
                reason: "iteration limit reached",
                last_iterate: Box::new(ScalarField::raw(full)),
            });
        }

        let jac = p.jacobian_raw(&full, t);
        let lu = match lu_factor(jac, n, PIVOT_FLOOR) {
            Ok(lu) => lu,
            Err(pivot) => {
                return Err(Error::SingularJacobian {
                    iteration,
                    column: pivot.column,
                    pivot: pivot.pivot,
                    threshold: pivot.threshold,
                    last_iterate: Box::new(ScalarField::raw(full)),
                })
            }
        };
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = lu.solve(&neg);

        let norm0 = norm2(&r);
        let mut step = 1.0;
        let mut accepted = None;
        for halving in 0..=opts.max_halvings {
            let mut trial = full.clone();
            for (&x, d) in p.interior_indices().iter().zip(&delta) {
                trial[x] += step * d;
            }
            let rt = p.residual_raw(&trial, t);
            let nt = norm2(&rt);
            if nt.is_finite() && nt < norm0 {
                if halving > 0 {
                    damping_events += 1;
                }
                accepted = Some((trial, rt));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((trial, rt)) => {
                full = trial;
                r = rt;
            }
            None => {
                return Err(Error::NonConvergence {
                    iterations: iteration,
                    residual_sup,
                    reason: "line search found no decrease",
                    last_iterate: Box::new(ScalarField::raw(full)),
                })
            }
        }
    }
    unreachable!("loop returns at max_iter")
}

fn check_options(opts: &NewtonOptions) -> Result<()> {
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {}", opts.tol)));
    }
    Ok(())
}

fn report(p: &DirichletProblem, run: Run, continuation_steps: Vec<f64>) -> Result<SolveReport> {
    let solution = ScalarField::from_values(p.graph(), run.full)?;
    Ok(SolveReport {
        energy_interior: p.energy_interior(&solution),
        solution,
        residual_sup: run.residual_sup,
        iterations: run.iterations,
        damping_events: run.damping_events,
        continuation_steps,
        converged: true,
    })
}

/// Damped Newton on the interior unknowns with dense LU steps and a halving
/// line search on the Euclidean residual norm. Converged means the sup-norm
/// residual is at most `opts.tol`.
pub fn newton_solve(p: &DirichletProblem, initial: &ScalarField, opts: &NewtonOptions) -> Result<SolveReport> {
    check_options(opts)?;
    p.check_boundary(initial)?;
    let run = newton_scaled(p, initial.values().to_vec(), 1.0, opts)?;
    report(p, run, vec![1.0])
}

/// Solves with `t F` for each `t` in the schedule, warm-starting each stage
/// from the previous one and the first from the harmonic extension.
pub fn continuation_solve(p: &DirichletProblem, schedule: &[f64], opts: &NewtonOptions) -> Result<SolveReport> {
    check_options(opts)?;
    if schedule.is_empty() {
        return Err(Error::domain("continuation schedule is empty"));
    }
    if schedule.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::domain("continuation parameters must lie in (0, 1]"));
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("continuation schedule must be strictly increasing"));
    }
    if schedule.last() != Some(&1.0) {
        return Err(Error::domain("continuation schedule must end at 1"));
    }

    let mut full = p.harmonic_extension()?.into_values();
    let mut iterations = 0;
    let mut damping_events = 0;
    let mut residual_sup = 0.0;
    for &t in schedule {
        let run = newton_scaled(p, full, t, opts).map_err(|e| Error::Continuation { t, source: Box::new(e) })?;
        iterations += run.iterations;
        damping_events += run.damping_events;
        residual_sup = run.residual_sup;
        full = run.full;
    }
    report(p, Run { full, residual_sup, iterations, damping_events }, schedule.to_vec())
}

/// Plain Newton from the harmonic extension, then [`FALLBACK_SCHEDULE`]
/// continuation if that fails to converge.
pub fn solve_with_fallback(p: &DirichletProblem, opts: &NewtonOptions) -> Result<SolveReport> {
    let start = p.harmonic_extension()?;
    match newton_solve(p, &start, opts) {
        Ok(r) => Ok(r),
        Err(Error::NonConvergence { .. } | Error::SingularJacobian { .. }) => {
            continuation_solve(p, &FALLBACK_SCHEDULE, opts)
        }
        Err(e) => Err(e),
    }
}
