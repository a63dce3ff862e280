//! Random weighted graphs and fields for experiments and property checks.

use rand::Rng;

use crate::graph::{GraphBuilder, ScalarField, WeightedGraph};

/// Erdos-Renyi style graph on `n` vertices with uniform measures and weights.
pub fn random_graph<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    edge_probability: f64,
    mu_range: (f64, f64),
    w_range: (f64, f64),
) -> WeightedGraph {
    let mut b = GraphBuilder::new();
    for x in 0..n {
        b.vertex(x as i64, rng.random_range(mu_range.0..=mu_range.1));
    }
    for x in 0..n {
        for y in (x + 1)..n {
            if rng.random_bool(edge_probability) {
                b.edge(x as i64, y as i64, rng.random_range(w_range.0..=w_range.1));
            }
        }
    }
    b.build().expect("ranges are positive")
}

pub fn random_field<R: Rng + ?Sized>(rng: &mut R, g: &WeightedGraph, range: (f64, f64)) -> ScalarField {
    ScalarField::from_fn(g, |_| rng.random_range(range.0..=range.1))
}
