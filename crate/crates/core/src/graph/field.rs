use serde::{Deserialize, Serialize};

use super::WeightedGraph;
use crate::error::{Error, Result};

/// A finite real value on every vertex of a graph, indexed like the graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn from_values(host: &WeightedGraph, values: Vec<f64>) -> Result<Self> {
        if values.len() != host.len() {
            return Err(Error::domain(format!(
                "field has {} values but the graph has {} vertices",
                values.len(),
                host.len()
            )));
        }
        if let Some(x) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("field value at vertex {} is not finite ({})", host.id(x), values[x])));
        }
        Ok(Self { values })
    }

    pub fn constant(host: &WeightedGraph, c: f64) -> Self {
        assert!(c.is_finite());
        Self { values: vec![c; host.len()] }
    }

    /// Builds a field from a per-index closure. Panics on non-finite values.
    pub fn from_fn(host: &WeightedGraph, f: impl FnMut(usize) -> f64) -> Self {
        let values: Vec<f64> = (0..host.len()).map(f).collect();
        assert!(values.iter().all(|v| v.is_finite()), "non-finite field value");
        Self { values }
    }

    /// Unchecked constructor for solver iterates that may have left the finite range.
    pub(crate) fn raw(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, x: usize) -> f64 {
        self.values[x]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
