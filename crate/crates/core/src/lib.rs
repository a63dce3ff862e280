//! The Liouville equation `Lap u + e^u = 0` on weighted graphs.
//!
//! - [`graph`]: weighted graphs, the Laplacian, vertex sets and fields.
//! - [`lattice`]: finite windows of Z^2 with an optional ghost ring.
//! - [`isoperimetry`]: brute-force upper bounds on the isoperimetric constant.
//! - [`level_sets`]: superlevel-set identities and the energy lower-bound
//!   chain audit.
//! - [`solver`]: Dirichlet problems and the damped Newton solver.
//! - [`harness`] and [`io`]: experiment plumbing and file formats.

pub mod error;
pub mod graph;
pub mod harness;
pub mod io;
pub mod isoperimetry;
pub mod lattice;
pub mod level_sets;
pub mod random;
pub mod solver;

pub use error::{Error, Result};
pub use graph::{Edge, GraphBuilder, ScalarField, VertexId, VertexMeta, VertexSet, WeightedGraph};
pub use isoperimetry::{brute_force_cis, IsoperimetricReport};
pub use lattice::LatticeWindow;
pub use level_sets::{chain_audit, ChainLedger};
pub use solver::{DirichletProblem, NewtonOptions, Nonlinearity, SolveReport};
