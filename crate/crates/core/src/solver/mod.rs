//! Dirichlet problems `Lap u + F(u) = 0` on the interior of a finite window
//! with prescribed values on the remaining (boundary) vertices.
//!
//! Unknowns are the interior values only. Boundary values enter the
//! interior equations as data, so the Jacobian is square with one row per
//! interior vertex: the interior-restricted Laplacian plus `diag(F'(u))`.

mod bubble;
mod lu;
mod newton;
mod nonlinearity;
mod obstruction;

use crate::error::{Error, Result};
use crate::graph::{laplacian_raw, ScalarField, VertexSet, WeightedGraph};
use crate::lattice::LatticeWindow;

pub use bubble::{bubble, bubble_lattice_energy};
pub use lu::{lu_factor, LuFactors, SingularPivot};
pub use newton::{
    continuation_solve, newton_solve, solve_with_fallback, NewtonOptions, SolveReport, FALLBACK_SCHEDULE,
};
pub use nonlinearity::{Nonlinearity, NonlinearityKind};
pub use obstruction::{closed_graph_obstruction, closed_residual_sup};

#[derive(Debug, Clone)]
pub struct DirichletProblem {
    graph: WeightedGraph,
    /// Interior vertex indices, ascending; position = unknown index.
    interior: Vec<usize>,
    /// Vertex index -> unknown index.
    slot: Vec<Option<usize>>,
    /// Full-length; entries at interior vertices are unused and set to 0.
    boundary_values: Vec<f64>,
    nonlinearity: Nonlinearity,
}

impl DirichletProblem {
    /// `boundary_values` is a full-length field; only its boundary entries
    /// are used.
    pub fn new(
        graph: WeightedGraph,
        interior: impl IntoIterator<Item = usize>,
        boundary_values: &ScalarField,
        nonlinearity: Nonlinearity,
    ) -> Result<Self> {
        graph.check_field(boundary_values)?;
        let mut slot = vec![None; graph.len()];
        for x in interior {
            if x >= graph.len() {
                return Err(Error::domain(format!("interior vertex index {x} out of range")));
            }
            slot[x] = Some(0);
        }
        let interior: Vec<usize> = (0..graph.len()).filter(|&x| slot[x].is_some()).collect();
        if interior.is_empty() {
            return Err(Error::domain("Dirichlet problem has no interior vertices"));
        }
        for (k, &x) in interior.iter().enumerate() {
            slot[x] = Some(k);
        }
        let boundary_values =
            (0..graph.len()).map(|x| if slot[x].is_some() { 0.0 } else { boundary_values.get(x) }).collect();
        Ok(Self { graph, interior, slot, boundary_values, nonlinearity })
    }

    /// Interior = vertices without the boundary flag.
    pub fn from_boundary_flags(
        graph: WeightedGraph,
        boundary_values: &ScalarField,
        nonlinearity: Nonlinearity,
    ) -> Result<Self> {
        let interior: Vec<usize> = (0..graph.len()).filter(|&x| !graph.meta(x).boundary).collect();
        Self::new(graph, interior, boundary_values, nonlinearity)
    }

    /// `n x n` lattice window whose ghost ring carries the trace of the
    /// bubble with parameter `lambda` centred at `center` (default: the
    /// window centre).
    pub fn lattice_bubble(n: usize, lambda: f64, center: Option<[f64; 2]>, nonlinearity: Nonlinearity) -> Result<Self> {
        let win = LatticeWindow::new(n, true)?;
        let x0 = center.unwrap_or_else(|| win.center());
        let mut values = vec![0.0; win.graph().len()];
        for (x, v) in values.iter_mut().enumerate() {
            if win.graph().meta(x).boundary {
                let [i, j] = win.coord(x);
                *v = bubble([i as f64, j as f64], x0, lambda)?;
            }
        }
        let bv = ScalarField::from_values(win.graph(), values)?;
        Self::from_boundary_flags(win.into_graph(), &bv, nonlinearity)
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    pub fn unknowns(&self) -> usize {
        self.interior.len()
    }

    pub fn interior_indices(&self) -> &[usize] {
        &self.interior
    }

    pub fn is_interior(&self, x: usize) -> bool {
        self.slot[x].is_some()
    }

    pub fn interior_set(&self) -> VertexSet<'_> {
        self.graph.set_from_indices(self.interior.iter().copied()).expect("indices in range")
    }

    pub fn boundary_set(&self) -> VertexSet<'_> {
        self.interior_set().complement()
    }

    /// Boundary values, with zeros at interior vertices.
    pub fn boundary_values(&self) -> &[f64] {
        &self.boundary_values
    }

    /// Largest prescribed boundary value, or `-inf` when there is no boundary.
    pub fn max_boundary_value(&self) -> f64 {
        (0..self.graph.len())
            .filter(|&x| !self.is_interior(x))
            .map(|x| self.boundary_values[x])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Full field from interior values, boundary values filled in.
    pub fn assemble(&self, interior_values: &[f64]) -> Result<ScalarField> {
        if interior_values.len() != self.unknowns() {
            return Err(Error::domain(format!(
                "expected {} interior values, got {}",
                self.unknowns(),
                interior_values.len()
            )));
        }
        let mut full = self.boundary_values.clone();
        for (&x, &v) in self.interior.iter().zip(interior_values) {
            full[x] = v;
        }
        ScalarField::from_values(&self.graph, full)
    }

    pub(crate) fn check_boundary(&self, u: &ScalarField) -> Result<()> {
        self.graph.check_field(u)?;
        for x in 0..self.graph.len() {
            if !self.is_interior(x) && u.get(x) != self.boundary_values[x] {
                return Err(Error::domain(format!(
                    "field disagrees with boundary data at vertex {}: {} != {}",
                    self.graph.id(x),
                    u.get(x),
                    self.boundary_values[x]
                )));
            }
        }
        Ok(())
    }

    /// `sum_{x interior} mu_x e^{u(x)}`.
    pub fn energy_interior(&self, u: &ScalarField) -> f64 {
        self.interior.iter().map(|&x| self.graph.mu(x) * u.get(x).exp()).sum()
    }

    /// Interior residuals `Lap u + t F(u)`, ordered like the unknowns.
    pub(crate) fn residual_raw(&self, full: &[f64], t: f64) -> Vec<f64> {
        self.interior
            .iter()
            .map(|&x| laplacian_raw(&self.graph, full, x) + t * self.nonlinearity.eval(full[x]))
            .collect()
    }

    /// Dense row-major Jacobian of [`Self::residual_raw`] in the unknowns.
    pub(crate) fn jacobian_raw(&self, full: &[f64], t: f64) -> Vec<f64> {
        let n = self.unknowns();
        let mut jac = vec![0.0; n * n];
        for (k, &x) in self.interior.iter().enumerate() {
            let mu = self.graph.mu(x);
            let row = &mut jac[k * n..(k + 1) * n];
            row[k] = -self.graph.degree_raw(x) + t * self.nonlinearity.deriv(full[x]);
            for &(y, w) in self.graph.neighbors(x) {
                if let Some(l) = self.slot[y] {
                    row[l] += w / mu;
                }
            }
        }
        jac
    }

    /// Applies the Jacobian at `u` to a direction on the unknowns.
    pub fn jacobian_apply(&self, u: &ScalarField, direction: &[f64]) -> Result<Vec<f64>> {
        self.check_boundary(u)?;
        let n = self.unknowns();
        if direction.len() != n {
            return Err(Error::domain("direction length differs from the number of unknowns"));
        }
        let jac = self.jacobian_raw(u.values(), 1.0);
        Ok((0..n).map(|i| jac[i * n..(i + 1) * n].iter().zip(direction).map(|(a, b)| a * b).sum()).collect())
    }

    /// Discrete harmonic extension of the boundary data (one linear solve).
    pub fn harmonic_extension(&self) -> Result<ScalarField> {
        let start = self.boundary_values.clone();
        let r = self.residual_raw(&start, 0.0);
        let jac = self.jacobian_raw(&start, 0.0);
        let lu = lu_factor(jac, self.unknowns(), newton::PIVOT_FLOOR).map_err(|p| Error::SingularJacobian {
            iteration: 0,
            column: p.column,
            pivot: p.pivot,
            threshold: p.threshold,
            last_iterate: Box::new(ScalarField::raw(start.clone())),
        })?;
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = lu.solve(&neg);
        self.assemble(&delta)
    }
}

/// `Lap u + F(u)` at interior vertices, zero on the boundary.
pub fn residual(p: &DirichletProblem, u: &ScalarField) -> Result<ScalarField> {
    p.check_boundary(u)?;
    let r = p.residual_raw(u.values(), 1.0);
    let mut full = vec![0.0; p.graph.len()];
    for (&x, v) in p.interior.iter().zip(r) {
        full[x] = v;
    }
    Ok(ScalarField::raw(full))
}
