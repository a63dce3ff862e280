//! Finite windows of the lattice Z^2 with `mu = 4`, `w = 1`.
//!
//! Layout: an `n x n` interior with coordinates `(i, j)`, `0 <= i, j < n`,
//! row-major ids `i * n + j`. With a ghost ring, the `4n` lattice neighbours
//! of the interior (coordinates `-1` or `n` in one component, corners
//! excluded) follow with ids `n^2, n^2 + 1, ...` in row-major order over the
//! `(n + 2) x (n + 2)` frame. Ghost vertices carry the boundary flag. Only
//! edges with at least one interior endpoint are stored, so every interior
//! vertex keeps its four lattice neighbours and ghosts only connect inward.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, VertexMeta, VertexSet, WeightedGraph};

/// Vertex measure of the standard lattice graph.
pub const LATTICE_MU: f64 = 4.0;
/// Edge weight of the standard lattice graph.
pub const LATTICE_W: f64 = 1.0;
/// Isoperimetric constant of Z^2 with the weights above (a known result,
/// taken as input; enumeration only ever certifies upper bounds).
pub const Z2_ISOPERIMETRIC_CONSTANT: f64 = 4.0;

#[derive(Debug, Clone)]
pub struct LatticeWindow {
    n: usize,
    ghost: bool,
    graph: WeightedGraph,
    by_coord: HashMap<(i64, i64), usize>,
}

impl LatticeWindow {
    pub fn new(n: usize, ghost: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("lattice window size must be at least 1"));
        }
        let ni = n as i64;
        let mut coords: Vec<((i64, i64), bool)> = Vec::new();
        for i in 0..ni {
            for j in 0..ni {
                coords.push(((i, j), false));
            }
        }
        if ghost {
            for i in -1..=ni {
                for j in -1..=ni {
                    let on_row = i == -1 || i == ni;
                    let on_col = j == -1 || j == ni;
                    if on_row != on_col {
                        coords.push(((i, j), true));
                    }
                }
            }
        }
        let by_coord: HashMap<(i64, i64), usize> = coords.iter().enumerate().map(|(id, &(c, _))| (c, id)).collect();

        let mut b = GraphBuilder::new();
        for (id, &((i, j), boundary)) in coords.iter().enumerate() {
            b.vertex_with_meta(id as i64, LATTICE_MU, VertexMeta { coord: Some([i, j]), boundary });
        }
        let inside = |i: i64, j: i64| (0..ni).contains(&i) && (0..ni).contains(&j);
        for (id, &((i, j), _)) in coords.iter().enumerate() {
            for (di, dj) in [(0, 1), (1, 0)] {
                let (p, q) = (i + di, j + dj);
                if !(inside(i, j) || inside(p, q)) {
                    continue;
                }
                if let Some(&other) = by_coord.get(&(p, q)) {
                    b.edge(id as i64, other as i64, LATTICE_W);
                }
            }
        }
        let graph = b.build()?;
        Ok(Self { n, ghost, graph, by_coord })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_ghost(&self) -> bool {
        self.ghost
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn into_graph(self) -> WeightedGraph {
        self.graph
    }

    /// Dense index of the vertex at lattice coordinate `(i, j)`, if present.
    pub fn index_at(&self, i: i64, j: i64) -> Option<usize> {
        self.by_coord.get(&(i, j)).copied()
    }

    pub fn coord(&self, x: usize) -> [i64; 2] {
        self.graph.meta(x).coord.expect("lattice vertices carry coordinates")
    }

    /// Geometric centre of the interior, `((n-1)/2, (n-1)/2)`.
    pub fn center(&self) -> [f64; 2] {
        let c = (self.n as f64 - 1.0) / 2.0;
        [c, c]
    }

    pub fn interior(&self) -> VertexSet<'_> {
        self.graph.boundary_flagged().complement()
    }
}
