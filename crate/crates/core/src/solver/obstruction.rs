use super::Nonlinearity;
use crate::error::Result;
use crate::graph::{laplacian_raw, ScalarField, WeightedGraph};

/// `(sum_x mu_x Lap u(x), sum_x mu_x e^{u(x)})` on a finite graph.
///
/// The first entry vanishes for every field while the second is positive,
/// so `Lap u + e^u = 0` has no solution on a closed finite graph: the
/// sup-norm residual is at least `sum mu e^u / sum mu`.
pub fn closed_graph_obstruction(g: &WeightedGraph, u: &ScalarField) -> Result<(f64, f64)> {
    g.check_field(u)?;
    let sum_lap = (0..g.len()).map(|x| g.mu(x) * laplacian_raw(g, u.values(), x)).sum();
    Ok((sum_lap, g.exp_energy(u)?))
}

/// `max_x |Lap u(x) + F(u(x))|` over every vertex of `g`.
pub fn closed_residual_sup(g: &WeightedGraph, u: &ScalarField, f: &Nonlinearity) -> Result<f64> {
    g.check_field(u)?;
    Ok((0..g.len()).map(|x| (laplacian_raw(g, u.values(), x) + f.eval(u.get(x))).abs()).fold(0.0, f64::max))
}
