//! Superlevel sets `Omega_sigma = {u >= sigma}` of a field and the quantities
//! that live on their edge boundaries.
//!
//! At level `sigma` an edge `{x, y}` is *cut* when `u(x) < sigma <= u(y)`.
//! Edges with `u(x) = u(y)` are never cut. The cut set of `Omega_sigma` is
//! exactly its edge boundary, and every per-level quantity is a step
//! function of `sigma` that is constant on `(v_k, v_{k+1}]` for consecutive
//! distinct values `v_k` of `u`. All sigma-integrals below are evaluated
//! exactly on that decomposition.

mod ledger;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ScalarField, VertexSet, WeightedGraph};

pub use ledger::{chain_audit, ChainLedger, SigmaRecord, Step, StepCheck, StepSummary};

/// A cut edge oriented from its lower endpoint to its higher one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutEdge {
    pub low: usize,
    pub high: usize,
    pub w: f64,
    pub gap: f64,
}

/// Cut edges at one level together with the sums built from them.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelCut {
    pub sigma: f64,
    pub edges: Vec<CutEdge>,
    /// `sum w (u(y) - u(x))`.
    pub flux: f64,
    /// `G(sigma) = sum w / (u(y) - u(x))`.
    pub g_sigma: f64,
    /// `w(dOmega_sigma) = sum w`.
    pub cut_weight: f64,
}

pub fn superlevel_set<'g>(g: &'g WeightedGraph, u: &ScalarField, sigma: f64) -> Result<VertexSet<'g>> {
    g.check_field(u)?;
    g.set_from_indices((0..g.len()).filter(|&x| u.get(x) >= sigma))
}

pub fn level_cut(g: &WeightedGraph, u: &ScalarField, sigma: f64) -> Result<LevelCut> {
    g.check_field(u)?;
    Ok(level_cut_raw(g, u.values(), sigma))
}

pub(crate) fn level_cut_raw(g: &WeightedGraph, u: &[f64], sigma: f64) -> LevelCut {
    let mut edges = Vec::new();
    let (mut flux, mut g_sigma, mut cut_weight) = (0.0, 0.0, 0.0);
    for e in g.edges() {
        let (low, high) = if u[e.a] < u[e.b] { (e.a, e.b) } else { (e.b, e.a) };
        if u[low] < sigma && sigma <= u[high] {
            let gap = u[high] - u[low];
            flux += e.w * gap;
            g_sigma += e.w / gap;
            cut_weight += e.w;
            edges.push(CutEdge { low, high, w: e.w, gap });
        }
    }
    LevelCut { sigma, edges, flux, g_sigma, cut_weight }
}

/// Both sides of `-int_{Omega_sigma} Lap u = sum_cut w (u(y) - u(x))`, which
/// holds for every field `u`.
pub fn flux_identity_check(g: &WeightedGraph, u: &ScalarField, sigma: f64) -> Result<(f64, f64)> {
    g.check_field(u)?;
    let lhs = neg_laplacian_integral(g, u.values(), sigma);
    let rhs = level_cut_raw(g, u.values(), sigma).flux;
    Ok((lhs, rhs))
}

pub(crate) fn neg_laplacian_integral(g: &WeightedGraph, u: &[f64], sigma: f64) -> f64 {
    (0..g.len())
        .filter(|&x| u[x] >= sigma)
        .map(|x| g.neighbors(x).iter().map(|&(y, w)| w * (u[x] - u[y])).sum::<f64>())
        .sum()
}

/// `A = sum_{x, y in Omega, x ~ y} w_xy (u(x) - u(y))` over ordered pairs,
/// which vanishes by antisymmetry.
pub fn interior_antisymmetry(u: &ScalarField, s: &VertexSet<'_>) -> Result<f64> {
    let g = s.host();
    g.check_field(u)?;
    let u = u.values();
    Ok(s.indices()
        .map(|x| g.neighbors(x).iter().filter(|&&(y, _)| s.contains(y)).map(|&(y, w)| w * (u[x] - u[y])).sum::<f64>())
        .sum())
}

pub fn g_sigma(g: &WeightedGraph, u: &ScalarField, sigma: f64) -> Result<f64> {
    Ok(level_cut(g, u, sigma)?.g_sigma)
}

/// `(e^b - e^a) / (b - a) / e^b` for `a < b`, computed without cancellation.
fn secant_over_upper(a: f64, b: f64) -> f64 {
    let d = b - a;
    -(-d).exp_m1() / d
}

/// Closed form of `int e^sigma G(sigma) dsigma`:
/// `sum_{u(y) > u(x)} w (e^{u(y)} - e^{u(x)}) / (u(y) - u(x))`.
pub fn exact_exp_coarea(g: &WeightedGraph, u: &ScalarField) -> Result<f64> {
    g.check_field(u)?;
    Ok(exact_exp_coarea_raw(g, u.values()))
}

pub(crate) fn exact_exp_coarea_raw(g: &WeightedGraph, u: &[f64]) -> f64 {
    g.edges()
        .iter()
        .filter_map(|e| {
            let (a, b) = (u[e.a].min(u[e.b]), u[e.a].max(u[e.b]));
            (a < b).then(|| e.w * b.exp() * secant_over_upper(a, b))
        })
        .sum()
}

/// `(e^b - e^a) / (b - a) <= e^b` for `a < b`.
pub fn elementary_inequality_check(a: f64, b: f64) -> Result<bool> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::domain(format!("elementary inequality needs finite a < b, got a = {a}, b = {b}")));
    }
    Ok(secant_over_upper(a, b) <= 1.0)
}

/// `(G(sigma) * flux(sigma), w(dOmega_sigma)^2)`; the first dominates the
/// second for every field by Cauchy-Schwarz over the cut edges.
pub fn cauchy_schwarz_step(g: &WeightedGraph, u: &ScalarField, sigma: f64) -> Result<(f64, f64)> {
    let cut = level_cut(g, u, sigma)?;
    Ok((cut.g_sigma * cut.flux, cut.cut_weight * cut.cut_weight))
}

/// Sorted distinct values of `u`.
pub fn breakpoints(u: &ScalarField) -> Vec<f64> {
    let mut v = u.values().to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Query levels: every distinct value of `u` plus the midpoints between
/// consecutive ones, ascending.
pub fn sigma_queries(u: &ScalarField) -> Vec<f64> {
    let bp = breakpoints(u);
    let mut out = Vec::with_capacity(2 * bp.len());
    for (k, &v) in bp.iter().enumerate() {
        if k > 0 {
            out.push(0.5 * (bp[k - 1] + v));
        }
        out.push(v);
    }
    out
}

/// Step function `sigma -> F(Omega_sigma)` for an additive vertex weight
/// `F(Omega) = sum_{x in Omega} f(x)`, sampled at each breakpoint.
fn superlevel_sums(bp: &[f64], u: &[f64], f: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&x, &y| u[y].total_cmp(&u[x]));
    let mut sums = vec![0.0; bp.len()];
    let mut acc = 0.0;
    let mut cursor = 0;
    for k in (0..bp.len()).rev() {
        while cursor < order.len() && u[order[cursor]] >= bp[k] {
            acc += f(order[cursor]);
            cursor += 1;
        }
        sums[k] = acc;
    }
    sums
}

/// `int_{-inf}^{inf} h(sigma) e^sigma dsigma` for a step function `h` with
/// value `h[0]` on `(-inf, v_0]`, `h[k]` on `(v_{k-1}, v_k]`, and zero above
/// the top breakpoint.
fn exp_weighted_step_integral(bp: &[f64], h: &[f64]) -> f64 {
    let mut total = 0.0;
    for k in 0..bp.len() {
        if h[k] == 0.0 {
            continue;
        }
        let piece = if k == 0 { bp[0].exp() } else { bp[k].exp() * -(bp[k - 1] - bp[k]).exp_m1() };
        total += h[k] * piece;
    }
    total
}

/// Both sides of `int mu(Omega_sigma) e^sigma dsigma = int_V e^u`. The left
/// side is assembled from the breakpoint decomposition of `mu(Omega_sigma)`.
pub fn layer_cake(g: &WeightedGraph, u: &ScalarField) -> Result<(f64, f64)> {
    g.check_field(u)?;
    let bp = breakpoints(u);
    let masses = superlevel_sums(&bp, u.values(), |x| g.mu(x));
    Ok((exp_weighted_step_integral(&bp, &masses), g.exp_energy(u)?))
}

/// `int e^sigma G(sigma) dsigma` from the breakpoint decomposition of `G`:
/// a second route to [`exact_exp_coarea`].
pub fn piecewise_exp_coarea(g: &WeightedGraph, u: &ScalarField) -> Result<f64> {
    g.check_field(u)?;
    let bp = breakpoints(u);
    let gs: Vec<f64> = bp.iter().map(|&v| level_cut_raw(g, u.values(), v).g_sigma).collect();
    Ok(exp_weighted_step_integral(&bp, &gs))
}

/// One level of a [`LevelSetProfile`].
#[derive(Debug, Clone)]
pub struct LevelRecord<'g> {
    pub omega: VertexSet<'g>,
    pub cut: LevelCut,
}

/// Superlevel sets and cuts of `u` at every query level.
#[derive(Debug, Clone)]
pub struct LevelSetProfile<'g> {
    pub breakpoints: Vec<f64>,
    pub levels: Vec<LevelRecord<'g>>,
}

impl<'g> LevelSetProfile<'g> {
    pub fn new(g: &'g WeightedGraph, u: &ScalarField) -> Result<Self> {
        g.check_field(u)?;
        let levels = sigma_queries(u)
            .into_iter()
            .map(|sigma| {
                Ok(LevelRecord { omega: superlevel_set(g, u, sigma)?, cut: level_cut_raw(g, u.values(), sigma) })
            })
            .collect::<Result<_>>()?;
        Ok(Self { breakpoints: breakpoints(u), levels })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use crate::lattice::LatticeWindow;

    fn path3() -> (WeightedGraph, ScalarField) {
        let mut b = GraphBuilder::new();
        b.vertex(0, 1.0).vertex(1, 1.0).vertex(2, 1.0);
        b.edge(0, 1, 1.0).edge(1, 2, 1.0);
        let g = b.build().unwrap();
        let u = ScalarField::from_values(&g, vec![0.0, 1.0, 2.0]).unwrap();
        (g, u)
    }

    fn indicator() -> (LatticeWindow, ScalarField) {
        let win = LatticeWindow::new(3, true).unwrap();
        let origin = win.index_at(1, 1).unwrap();
        let u = ScalarField::from_fn(win.graph(), |x| if x == origin { 1.0 } else { 0.0 });
        (win, u)
    }

    #[test]
    fn superlevel_sets_by_hand() {
        let (g, u) = path3();
        assert_eq!(superlevel_set(&g, &u, 0.0).unwrap().len(), 3);
        assert!(superlevel_set(&g, &u, 3.0).unwrap().is_empty());
        assert_eq!(superlevel_set(&g, &u, 1.0).unwrap().ids(), vec![1, 2]);
    }

    #[test]
    fn indicator_level() {
        let (win, u) = indicator();
        let g = win.graph();
        assert_eq!(flux_identity_check(g, &u, 0.5).unwrap(), (4.0, 4.0));
        assert_eq!(g_sigma(g, &u, 0.5).unwrap(), 4.0);
        assert_eq!(cauchy_schwarz_step(g, &u, 0.5).unwrap(), (16.0, 16.0));
    }

    #[test]
    fn g_sigma_cases() {
        let (g, u) = path3();
        assert_eq!(g_sigma(&g, &u, 2.5).unwrap(), 0.0);

        let mut b = GraphBuilder::new();
        b.vertex(0, 1.0).vertex(1, 1.0).edge(0, 1, 1.0);
        let g = b.build().unwrap();
        let u = ScalarField::from_values(&g, vec![0.0, 2.0]).unwrap();
        assert_eq!(g_sigma(&g, &u, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn constant_fields() {
        let win = LatticeWindow::new(3, true).unwrap();
        let g = win.graph();
        let u = ScalarField::constant(g, 0.7);
        assert_eq!(flux_identity_check(g, &u, 0.7).unwrap(), (0.0, 0.0));
        assert_eq!(exact_exp_coarea(g, &u).unwrap(), 0.0);
        let (lhs, rhs) = layer_cake(g, &u).unwrap();
        let expected = g.total_measure() * 0.7f64.exp();
        assert!((lhs - expected).abs() <= 1e-12 * expected);
        assert!((rhs - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn single_edge_coarea() {
        let mut b = GraphBuilder::new();
        b.vertex(0, 1.0).vertex(1, 1.0).edge(0, 1, 1.0);
        let g = b.build().unwrap();
        let u = ScalarField::from_values(&g, vec![0.0, 1.0]).unwrap();
        let c = exact_exp_coarea(&g, &u).unwrap();
        assert!((c - (std::f64::consts::E - 1.0)).abs() < 1e-15);
        assert!((piecewise_exp_coarea(&g, &u).unwrap() - c).abs() < 1e-15);
    }

    #[test]
    fn two_point_layer_cake() {
        // mu = (1, 3), u = (0, 1): int mu(Omega) e^s = 4 e^0 + 3 (e - 1) = 1 + 3e
        let mut b = GraphBuilder::new();
        b.vertex(0, 1.0).vertex(1, 3.0).edge(0, 1, 1.0);
        let g = b.build().unwrap();
        let u = ScalarField::from_values(&g, vec![0.0, 1.0]).unwrap();
        let (lhs, rhs) = layer_cake(&g, &u).unwrap();
        let expected = 1.0 + 3.0 * std::f64::consts::E;
        assert!((lhs - expected).abs() < 1e-14);
        assert!((rhs - expected).abs() < 1e-14);
    }

    #[test]
    fn elementary_inequality() {
        assert!(elementary_inequality_check(0.0, 1.0).unwrap());
        assert!(elementary_inequality_check(-50.0, -49.0).unwrap());
        assert!(elementary_inequality_check(1.0, 1.0).is_err());
        assert!(elementary_inequality_check(2.0, 1.0).is_err());
        // ratio tends to 1 from below as b - a -> 0+
        let mut last = 0.0;
        for d in [1.0, 1e-2, 1e-4, 1e-6] {
            let r = secant_over_upper(0.0, d);
            assert!(r < 1.0 && r > last);
            last = r;
        }
        assert!(1.0 - last < 1e-6);
    }

    #[test]
    fn equal_gaps_give_cauchy_schwarz_equality() {
        let win = LatticeWindow::new(5, true).unwrap();
        let g = win.graph();
        // u = i + j has gap 1 across every edge
        let u = ScalarField::from_fn(g, |x| {
            let [i, j] = win.coord(x);
            (i + j) as f64
        });
        for sigma in sigma_queries(&u) {
            let (lhs, rhs) = cauchy_schwarz_step(g, &u, sigma).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn queries_interleave_midpoints() {
        let (_, u) = path3();
        assert_eq!(sigma_queries(&u), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn profile_is_nested() {
        let (win, u) = indicator();
        let p = LevelSetProfile::new(win.graph(), &u).unwrap();
        assert_eq!(p.breakpoints, vec![0.0, 1.0]);
        for pair in p.levels.windows(2) {
            assert!(pair[1].omega.is_subset_of(&pair[0].omega));
        }
    }

    #[test]
    fn field_length_mismatch() {
        let (g, _) = path3();
        let other = LatticeWindow::new(2, false).unwrap();
        let u = ScalarField::constant(other.graph(), 0.0);
        assert!(matches!(exact_exp_coarea(&g, &u), Err(Error::Domain(_))));
    }
}
