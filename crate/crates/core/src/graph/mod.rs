//! Weighted graphs `(V, E, mu, w)` and the linear operators living on them.
//!
//! Vertices are addressed two ways: by an opaque integer id (what files and
//! reports carry) and by a dense index `0..len()` (what every analysis
//! routine uses). Ids are mapped to indices once, at construction.

mod field;
mod set;

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

pub use field::ScalarField;
pub use set::VertexSet;

/// Opaque vertex identifier as it appears in graph files.
pub type VertexId = i64;

/// An undirected edge between dense indices `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub w: f64,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if self.a == x {
            self.b
        } else {
            self.a
        }
    }
}

/// Optional per-vertex annotations carried through files: lattice
/// coordinates and the Dirichlet boundary flag. Graph operators ignore them.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VertexMeta {
    pub coord: Option<[i64; 2]>,
    pub boundary: bool,
}

/// A finite, simple, undirected weighted graph. Immutable once built.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    ids: Vec<VertexId>,
    index: HashMap<VertexId, usize>,
    mu: Vec<f64>,
    meta: Vec<VertexMeta>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

/// Collects vertices and edges and validates them in one pass.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    vertices: Vec<(VertexId, f64, VertexMeta)>,
    edges: Vec<(VertexId, VertexId, f64)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, id: VertexId, mu: f64) -> &mut Self {
        self.vertices.push((id, mu, VertexMeta::default()));
        self
    }

    pub fn vertex_with_meta(&mut self, id: VertexId, mu: f64, meta: VertexMeta) -> &mut Self {
        self.vertices.push((id, mu, meta));
        self
    }

    pub fn edge(&mut self, a: VertexId, b: VertexId, w: f64) -> &mut Self {
        self.edges.push((a, b, w));
        self
    }

    pub fn build(&self) -> Result<WeightedGraph> {
        let n = self.vertices.len();
        let mut ids = Vec::with_capacity(n);
        let mut index = HashMap::with_capacity(n);
        let mut mu = Vec::with_capacity(n);
        let mut meta = Vec::with_capacity(n);
        for &(id, m, vm) in &self.vertices {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidGraph(format!("vertex {id}: measure mu = {m} must be positive and finite")));
            }
            if index.insert(id, ids.len()).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex id {id}")));
            }
            ids.push(id);
            mu.push(m);
            meta.push(vm);
        }

        let mut seen = HashSet::with_capacity(self.edges.len());
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b, w) in &self.edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge {{{a},{b}}}: weight w = {w} must be positive and finite"
                )));
            }
            let lookup = |id: VertexId| {
                index
                    .get(&id)
                    .copied()
                    .ok_or_else(|| Error::InvalidGraph(format!("edge {{{a},{b}}} references unknown vertex {id}")))
            };
            let (ia, ib) = (lookup(a)?, lookup(b)?);
            let (lo, hi) = if ia < ib { (ia, ib) } else { (ib, ia) };
            if !seen.insert((lo, hi)) {
                return Err(Error::InvalidGraph(format!("duplicate edge {{{a},{b}}}")));
            }
            edges.push(Edge { a: lo, b: hi, w });
            adjacency[lo].push((hi, w));
            adjacency[hi].push((lo, w));
        }

        Ok(WeightedGraph { ids, index, mu, meta, edges, adjacency })
    }
}

impl WeightedGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::new()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, x: usize) -> VertexId {
        self.ids[x]
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn index_of(&self, id: VertexId) -> Result<usize> {
        self.index.get(&id).copied().ok_or_else(|| Error::domain(format!("unknown vertex id {id}")))
    }

    pub fn mu(&self, x: usize) -> f64 {
        self.mu[x]
    }

    pub fn measures(&self) -> &[f64] {
        &self.mu
    }

    pub fn meta(&self, x: usize) -> VertexMeta {
        self.meta[x]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adjacency[x]
    }

    pub fn total_measure(&self) -> f64 {
        self.mu.iter().sum()
    }

    fn check_vertex(&self, x: usize) -> Result<()> {
        if x < self.len() {
            Ok(())
        } else {
            Err(Error::domain(format!("vertex index {x} out of range for a graph with {} vertices", self.len())))
        }
    }

    pub(crate) fn check_field(&self, u: &ScalarField) -> Result<()> {
        if u.len() == self.len() {
            Ok(())
        } else {
            Err(Error::domain(format!("field has {} values but the graph has {} vertices", u.len(), self.len())))
        }
    }

    /// `(1/mu_x) * sum_{y~x} w_xy (u(y) - u(x))`.
    pub fn laplacian_at(&self, u: &ScalarField, x: usize) -> Result<f64> {
        self.check_field(u)?;
        self.check_vertex(x)?;
        Ok(laplacian_raw(self, u.values(), x))
    }

    pub fn laplacian(&self, u: &ScalarField) -> Result<ScalarField> {
        self.check_field(u)?;
        let values = (0..self.len()).map(|x| laplacian_raw(self, u.values(), x)).collect();
        ScalarField::from_values(self, values)
    }

    /// `Deg(x) = sum_{y~x} w_xy / mu_x`.
    pub fn weighted_degree(&self, x: usize) -> Result<f64> {
        self.check_vertex(x)?;
        Ok(self.degree_raw(x))
    }

    pub(crate) fn degree_raw(&self, x: usize) -> f64 {
        self.adjacency[x].iter().map(|&(_, w)| w).sum::<f64>() / self.mu[x]
    }

    /// `Deg(G) = max_x Deg(x)`; zero for an empty graph.
    pub fn deg_sup(&self) -> f64 {
        (0..self.len()).map(|x| self.degree_raw(x)).fold(0.0, f64::max)
    }

    /// `sum_x f(x) mu_x`.
    pub fn integral(&self, f: &ScalarField) -> Result<f64> {
        self.check_field(f)?;
        Ok(f.values().iter().zip(&self.mu).map(|(v, m)| v * m).sum())
    }

    /// `sum_x e^{u(x)} mu_x`.
    pub fn exp_energy(&self, u: &ScalarField) -> Result<f64> {
        self.check_field(u)?;
        Ok(u.values().iter().zip(&self.mu).map(|(v, m)| v.exp() * m).sum())
    }

    pub fn full_set(&self) -> VertexSet<'_> {
        VertexSet::from_mask(self, vec![true; self.len()])
    }

    pub fn empty_set(&self) -> VertexSet<'_> {
        VertexSet::from_mask(self, vec![false; self.len()])
    }

    pub fn set_from_indices(&self, members: impl IntoIterator<Item = usize>) -> Result<VertexSet<'_>> {
        let mut mask = vec![false; self.len()];
        for x in members {
            self.check_vertex(x)?;
            mask[x] = true;
        }
        Ok(VertexSet::from_mask(self, mask))
    }

    pub fn set_from_ids(&self, members: impl IntoIterator<Item = VertexId>) -> Result<VertexSet<'_>> {
        let indices = members.into_iter().map(|id| self.index_of(id)).collect::<Result<Vec<_>>>()?;
        self.set_from_indices(indices)
    }

    /// Vertices flagged as Dirichlet boundary in their metadata.
    pub fn boundary_flagged(&self) -> VertexSet<'_> {
        VertexSet::from_mask(self, self.meta.iter().map(|m| m.boundary).collect())
    }
}

pub(crate) fn laplacian_raw(g: &WeightedGraph, u: &[f64], x: usize) -> f64 {
    let ux = u[x];
    let s: f64 = g.adjacency[x].iter().map(|&(y, w)| w * (u[y] - ux)).sum();
    s / g.mu[x]
}
