use super::{Edge, VertexId, WeightedGraph};

/// A finite vertex subset `Omega` of a host graph, stored as a membership mask.
#[derive(Debug, Clone)]
pub struct VertexSet<'g> {
    host: &'g WeightedGraph,
    mask: Vec<bool>,
}

impl<'g> VertexSet<'g> {
    pub(crate) fn from_mask(host: &'g WeightedGraph, mask: Vec<bool>) -> Self {
        debug_assert_eq!(mask.len(), host.len());
        Self { host, mask }
    }

    pub fn host(&self) -> &'g WeightedGraph {
        self.host
    }

    pub fn contains(&self, x: usize) -> bool {
        self.mask.get(x).copied().unwrap_or(false)
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    /// Member indices in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter_map(|(x, &m)| m.then_some(x))
    }

    /// Member ids, sorted.
    pub fn ids(&self) -> Vec<VertexId> {
        let mut ids: Vec<_> = self.indices().map(|x| self.host.id(x)).collect();
        ids.sort_unstable();
        ids
    }

    pub fn complement(&self) -> VertexSet<'g> {
        Self::from_mask(self.host, self.mask.iter().map(|m| !m).collect())
    }

    pub fn is_subset_of(&self, other: &VertexSet<'_>) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    /// `mu(Omega)`.
    pub fn measure(&self) -> f64 {
        self.indices().map(|x| self.host.mu(x)).sum()
    }

    /// Edges with exactly one endpoint in the set, and their total weight.
    pub fn edge_boundary(&self) -> (Vec<Edge>, f64) {
        let edges: Vec<Edge> = self.host.edges().iter().filter(|e| self.mask[e.a] != self.mask[e.b]).copied().collect();
        let weight = edges.iter().map(|e| e.w).sum();
        (edges, weight)
    }

    /// `w(partial Omega)` without materialising the edge list.
    pub fn boundary_weight(&self) -> f64 {
        self.host.edges().iter().filter(|e| self.mask[e.a] != self.mask[e.b]).map(|e| e.w).sum()
    }
}

impl PartialEq for VertexSet<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.host, other.host) && self.mask == other.mask
    }
}

#[cfg(test)]
mod tests {
    use crate::lattice::LatticeWindow;

    #[test]
    fn lattice_boundaries_and_measures() {
        let win = LatticeWindow::new(3, true).unwrap();
        let g = win.graph();

        let single = g.set_from_indices([win.index_at(1, 1).unwrap()]).unwrap();
        let (edges, w) = single.edge_boundary();
        assert_eq!((edges.len(), w), (4, 4.0));

        let square: Vec<_> =
            [(0, 0), (0, 1), (1, 0), (1, 1)].iter().map(|&(i, j)| win.index_at(i, j).unwrap()).collect();
        let square = g.set_from_indices(square).unwrap();
        let (edges, w) = square.edge_boundary();
        assert_eq!((edges.len(), w), (8, 8.0));
        assert_eq!(square.measure(), 16.0);

        assert_eq!(win.interior().measure(), 36.0);
        assert_eq!(g.empty_set().measure(), 0.0);

        let (edges, w) = g.full_set().edge_boundary();
        assert!(edges.is_empty());
        assert_eq!(w, 0.0);
    }

    #[test]
    fn boundary_of_complement() {
        let win = LatticeWindow::new(4, true).unwrap();
        let g = win.graph();
        let s = g.set_from_indices([0, 3, 5, 6, 17, 20]).unwrap();
        let (a, wa) = s.edge_boundary();
        let (b, wb) = s.complement().edge_boundary();
        assert_eq!(a, b);
        assert_eq!(wa, wb);
    }
}
