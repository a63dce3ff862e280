//! Experiment plumbing shared by the command-line tool: boundary-data
//! specifications and the lattice energy scan.
//!
//! Energy-scan CSV columns, in order:
//!
//! `n,lambda,converged,iterations,residual_sup,energy_interior,bubble_window_energy,sigma_min_used,audited_chain_ok,min_slack,final_lower_bound,error`
//!
//! Energies are interior-only (ghost ring excluded). `bubble_window_energy`
//! is `sum mu e^bubble` over the interior window, the quadrature of the
//! continuum profile on the same cells. Cells that fail leave the solution
//! columns empty and carry the error text.

use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ScalarField, VertexId, WeightedGraph};
use crate::io::fmt_f64;
use crate::lattice::Z2_ISOPERIMETRIC_CONSTANT;
use crate::level_sets::chain_audit;
use crate::solver::{bubble, solve_with_fallback, DirichletProblem, NewtonOptions, Nonlinearity};

/// How Dirichlet data are supplied to `solve`.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySpec {
    Zero,
    /// Bubble trace with the given `lambda`; centre defaults to the middle
    /// of the interior's coordinate bounding box.
    Bubble {
        lambda: f64,
        center: Option<[f64; 2]>,
    },
    File(PathBuf),
}

impl FromStr for BoundarySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "zero" {
            return Ok(BoundarySpec::Zero);
        }
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err(Error::domain("boundary spec `file:` needs a path"));
            }
            return Ok(BoundarySpec::File(PathBuf::from(path)));
        }
        if let Some(rest) = s.strip_prefix("bubble:") {
            let nums = rest
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::domain(format!("cannot parse bubble parameters `{rest}`")))?;
            let center = match nums.len() {
                1 => None,
                3 => Some([nums[1], nums[2]]),
                _ => return Err(Error::domain("bubble boundary takes `bubble:LAMBDA` or `bubble:LAMBDA,CX,CY`")),
            };
            if !(nums[0].is_finite() && nums[0] > 0.0) {
                return Err(Error::domain(format!("bubble lambda must be positive, got {}", nums[0])));
            }
            return Ok(BoundarySpec::Bubble { lambda: nums[0], center });
        }
        Err(Error::domain(format!("unknown boundary spec `{s}` (expected zero, bubble:LAMBDA[,CX,CY] or file:PATH)")))
    }
}

/// Builds the Dirichlet problem on `g`.
///
/// The interior is the set of vertices without the boundary flag. For
/// `file:` data on a graph with no flags at all, the listed vertices become
/// the boundary.
pub fn build_problem(g: WeightedGraph, spec: &BoundarySpec, nonlinearity: Nonlinearity) -> Result<DirichletProblem> {
    match spec {
        BoundarySpec::Zero => {
            let bv = ScalarField::constant(&g, 0.0);
            DirichletProblem::from_boundary_flags(g, &bv, nonlinearity)
        }
        BoundarySpec::Bubble { lambda, center } => {
            let mut values = vec![0.0; g.len()];
            let mut lo = [f64::INFINITY; 2];
            let mut hi = [f64::NEG_INFINITY; 2];
            for x in 0..g.len() {
                let meta = g.meta(x);
                match meta.coord {
                    Some(c) if !meta.boundary => {
                        for k in 0..2 {
                            lo[k] = lo[k].min(c[k] as f64);
                            hi[k] = hi[k].max(c[k] as f64);
                        }
                    }
                    None if meta.boundary => {
                        return Err(Error::domain(format!(
                            "bubble boundary data need lattice coordinates on boundary vertex {}",
                            g.id(x)
                        )))
                    }
                    _ => {}
                }
            }
            let x0 = match center {
                Some(c) => *c,
                None if lo[0].is_finite() => [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0],
                None => return Err(Error::domain("no interior vertex carries coordinates")),
            };
            for (x, v) in values.iter_mut().enumerate() {
                let meta = g.meta(x);
                if let (true, Some([i, j])) = (meta.boundary, meta.coord) {
                    *v = bubble([i as f64, j as f64], x0, *lambda)?;
                }
            }
            let bv = ScalarField::from_values(&g, values)?;
            DirichletProblem::from_boundary_flags(g, &bv, nonlinearity)
        }
        BoundarySpec::File(path) => {
            let entries = crate::io::read_boundary(path)?;
            file_problem(g, &entries, nonlinearity)
        }
    }
}

pub(crate) fn file_problem(
    g: WeightedGraph,
    entries: &[(VertexId, f64)],
    nonlinearity: Nonlinearity,
) -> Result<DirichletProblem> {
    let flagged = g.boundary_flagged();
    let use_flags = !flagged.is_empty();
    let mut values = vec![0.0; g.len()];
    let mut given = vec![false; g.len()];
    for &(id, v) in entries {
        let x = g.index_of(id).map_err(|_| Error::Format(format!("boundary CSV: unknown vertex {id}")))?;
        if use_flags && !flagged.contains(x) {
            return Err(Error::Format(format!("boundary CSV: vertex {id} is not a boundary vertex of the graph")));
        }
        values[x] = v;
        given[x] = true;
    }
    let interior: Vec<usize> = if use_flags {
        if let Some(x) = flagged.indices().find(|&x| !given[x]) {
            return Err(Error::Format(format!("boundary CSV: no value for boundary vertex {}", g.id(x))));
        }
        flagged.complement().indices().collect()
    } else {
        (0..g.len()).filter(|&x| !given[x]).collect()
    };
    let bv = ScalarField::from_values(&g, values)?;
    DirichletProblem::new(g, interior, &bv, nonlinearity)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Interior window sizes; each must be odd and at least 3.
    pub window_sizes: Vec<usize>,
    pub lambda_grid: Vec<f64>,
    /// Bubble centre; `None` puts it at the window centre.
    pub center: Option<[f64; 2]>,
    pub tolerance: f64,
    pub output_dir: PathBuf,
}

impl ExperimentSpec {
    pub fn new(window_sizes: Vec<usize>, lambda_grid: Vec<f64>) -> Self {
        Self {
            window_sizes,
            lambda_grid,
            center: None,
            tolerance: NewtonOptions::default().tol,
            output_dir: PathBuf::from("."),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_sizes.is_empty() {
            return Err(Error::domain("no window sizes given"));
        }
        for &n in &self.window_sizes {
            if n < 3 || n % 2 == 0 {
                return Err(Error::domain(format!("window size must be odd and at least 3, got {n}")));
            }
        }
        if self.lambda_grid.is_empty() {
            return Err(Error::domain("lambda grid is empty"));
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::domain(format!("lambda must be positive, got {l}")));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::domain(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        Ok(())
    }

    /// `(n, lambda)` cells in table order.
    pub fn cells(&self) -> Vec<(usize, f64)> {
        self.window_sizes.iter().flat_map(|&n| self.lambda_grid.iter().map(move |&l| (n, l))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub n: usize,
    pub lambda: f64,
    pub converged: bool,
    pub iterations: Option<usize>,
    pub residual_sup: Option<f64>,
    /// `sum_{x interior} mu_x e^{u(x)}`.
    pub energy_interior: Option<f64>,
    pub bubble_window_energy: f64,
    pub sigma_min_used: f64,
    pub audited_chain_ok: bool,
    pub min_slack: Option<f64>,
    pub final_lower_bound: Option<f64>,
    pub error: Option<String>,
}

pub const ENERGY_CSV_HEADER: &str = "n,lambda,converged,iterations,residual_sup,energy_interior,bubble_window_energy,sigma_min_used,audited_chain_ok,min_slack,final_lower_bound,error";

/// Solves, audits and records one `(n, lambda)` cell. Failures are
/// recorded, not returned.
pub fn energy_cell(n: usize, lambda: f64, center: Option<[f64; 2]>, tol: f64) -> Result<EnergyRecord> {
    let p = DirichletProblem::lattice_bubble(n, lambda, center, Nonlinearity::exponential())?;
    let x0 = center.unwrap_or_else(|| {
        let c = (n as f64 - 1.0) / 2.0;
        [c, c]
    });
    let g = p.graph();
    let mut bubble_window_energy = 0.0;
    for &x in p.interior_indices() {
        let [i, j] = g.meta(x).coord.expect("lattice coordinates");
        bubble_window_energy += g.mu(x) * bubble([i as f64, j as f64], x0, lambda)?.exp();
    }
    let sigma_min = p.max_boundary_value();
    let mut rec = EnergyRecord {
        n,
        lambda,
        converged: false,
        iterations: None,
        residual_sup: None,
        energy_interior: None,
        bubble_window_energy,
        sigma_min_used: sigma_min,
        audited_chain_ok: false,
        min_slack: None,
        final_lower_bound: None,
        error: None,
    };
    let opts = NewtonOptions { tol, ..NewtonOptions::default() };
    match solve_with_fallback(&p, &opts) {
        Ok(sol) => {
            rec.converged = true;
            rec.iterations = Some(sol.iterations);
            rec.residual_sup = Some(sol.residual_sup);
            rec.energy_interior = Some(sol.energy_interior);
            let interior = p.interior_set();
            let ledger = chain_audit(g, &sol.solution, Z2_ISOPERIMETRIC_CONSTANT, sigma_min, Some(&interior))?;
            rec.audited_chain_ok = ledger.passed;
            rec.min_slack = Some(ledger.min_slack());
            rec.final_lower_bound = Some(ledger.final_lower_bound);
        }
        Err(e @ (Error::NonConvergence { .. } | Error::SingularJacobian { .. } | Error::Continuation { .. })) => {
            rec.error = Some(e.to_string());
        }
        Err(e) => return Err(e),
    }
    Ok(rec)
}

/// Runs every cell of `spec` on up to `jobs` worker threads (all cores when
/// `None`). Rows come back in `(n, lambda)` order.
pub fn run_energy_scan(spec: &ExperimentSpec, jobs: Option<usize>) -> Result<Vec<EnergyRecord>> {
    spec.validate()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = pool.build().map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?;
    let cells = spec.cells();
    pool.install(|| cells.par_iter().map(|&(n, l)| energy_cell(n, l, spec.center, spec.tolerance)).collect())
}

fn opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn energy_records_to_csv(records: &[EnergyRecord]) -> String {
    let mut out = format!("{ENERGY_CSV_HEADER}\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            fmt_f64(r.lambda),
            r.converged,
            r.iterations.map(|i| i.to_string()).unwrap_or_default(),
            opt_f64(r.residual_sup),
            opt_f64(r.energy_interior),
            fmt_f64(r.bubble_window_energy),
            fmt_f64(r.sigma_min_used),
            r.audited_chain_ok,
            opt_f64(r.min_slack),
            opt_f64(r.final_lower_bound),
            csv_text(r.error.as_deref().unwrap_or("")),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use crate::lattice::LatticeWindow;

    #[test]
    fn boundary_spec_parsing() {
        assert_eq!("zero".parse::<BoundarySpec>().unwrap(), BoundarySpec::Zero);
        assert_eq!("bubble:0.5".parse::<BoundarySpec>().unwrap(), BoundarySpec::Bubble { lambda: 0.5, center: None });
        assert_eq!(
            "bubble:1,2.5,-1".parse::<BoundarySpec>().unwrap(),
            BoundarySpec::Bubble { lambda: 1.0, center: Some([2.5, -1.0]) }
        );
        assert_eq!("file:b.csv".parse::<BoundarySpec>().unwrap(), BoundarySpec::File("b.csv".into()));
        for bad in ["", "bubble:", "bubble:-1", "bubble:1,2", "file:", "ones"] {
            assert!(bad.parse::<BoundarySpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn bubble_spec_matches_lattice_constructor() {
        let win = LatticeWindow::new(5, true).unwrap();
        let spec = BoundarySpec::Bubble { lambda: 0.8, center: None };
        let a = build_problem(win.into_graph(), &spec, Nonlinearity::exponential()).unwrap();
        let b = DirichletProblem::lattice_bubble(5, 0.8, None, Nonlinearity::exponential()).unwrap();
        assert_eq!(a.boundary_values(), b.boundary_values());
        assert_eq!(a.interior_indices(), b.interior_indices());
    }

    #[test]
    fn file_boundary_on_unflagged_graph() {
        let mut b = GraphBuilder::new();
        b.vertex(10, 1.0).vertex(11, 1.0).vertex(12, 1.0);
        b.edge(10, 11, 1.0).edge(11, 12, 1.0);
        let g = b.build().unwrap();
        let p = file_problem(g, &[(10, -1.0), (12, -3.0)], Nonlinearity::zero()).unwrap();
        assert_eq!(p.interior_indices(), &[1]);
        let h = p.harmonic_extension().unwrap();
        assert!((h.get(1) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn file_boundary_must_cover_flags() {
        let win = LatticeWindow::new(1, true).unwrap();
        let g = win.into_graph();
        assert!(matches!(file_problem(g.clone(), &[(1, 0.0)], Nonlinearity::zero()), Err(Error::Format(_))));
        assert!(matches!(file_problem(g.clone(), &[(0, 0.0)], Nonlinearity::zero()), Err(Error::Format(_))));
        file_problem(g, &[(1, 0.0), (2, 0.0), (3, 0.0), (4, 0.0)], Nonlinearity::zero()).unwrap();
    }

    #[test]
    fn spec_validation() {
        assert!(ExperimentSpec::new(vec![5], vec![1.0]).validate().is_ok());
        assert!(ExperimentSpec::new(vec![4], vec![1.0]).validate().is_err());
        assert!(ExperimentSpec::new(vec![1], vec![1.0]).validate().is_err());
        assert!(ExperimentSpec::new(vec![5], vec![]).validate().is_err());
        assert!(ExperimentSpec::new(vec![5], vec![0.0]).validate().is_err());
        assert!(ExperimentSpec::new(vec![], vec![1.0]).validate().is_err());
    }

    #[test]
    fn scan_order_and_determinism() {
        let spec = ExperimentSpec::new(vec![5, 3], vec![10.0, 4.0, 0.5]);
        let a = run_energy_scan(&spec, Some(3)).unwrap();
        let b = run_energy_scan(&spec, Some(1)).unwrap();
        let order: Vec<_> = a.iter().map(|r| (r.n, r.lambda)).collect();
        assert_eq!(order, spec.cells());
        assert_eq!(energy_records_to_csv(&a), energy_records_to_csv(&b));
        assert!(a.iter().any(|r| r.converged) && a.iter().any(|r| !r.converged));
        for r in &a {
            if r.converged {
                assert!(r.audited_chain_ok, "{r:?}");
                assert_eq!(r.final_lower_bound, Some(4.0));
            } else {
                assert!(r.error.is_some());
            }
        }
    }

    #[test]
    fn csv_columns() {
        let spec = ExperimentSpec::new(vec![3], vec![10.0]);
        let rows = run_energy_scan(&spec, None).unwrap();
        let csv = energy_records_to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(ENERGY_CSV_HEADER));
        let cells: Vec<_> = lines.next().unwrap().split(',').collect();
        assert_eq!(cells.len(), ENERGY_CSV_HEADER.split(',').count());
        assert_eq!(&cells[..3], &["3", "10", "true"]);
    }
}
