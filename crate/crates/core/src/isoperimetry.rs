//! Upper bounds on the 2-dimensional isoperimetric constant
//! `C_IS = inf (w(dOmega))^2 / mu(Omega)` by subset enumeration.
//!
//! Enumeration over a finite admissible window only ever yields an upper
//! bound on the infimum over an infinite host: `exhaustive` refers to the
//! window, never to the host graph. Cut edges leaving the admissible set
//! (into the rest of the host, e.g. a ghost ring) count towards `w(dOmega)`.

use std::cmp::Ordering;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{VertexId, VertexSet, WeightedGraph};
use crate::lattice::LatticeWindow;

pub const DEFAULT_LIMIT: usize = 24;
/// Subsets are indexed by `u64` masks.
const MAX_ENUMERABLE: usize = 63;
/// Number of disjoint mask ranges handed to workers.
const CHUNKS: u64 = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetricReport {
    pub c_is_upper: f64,
    pub witness: Vec<VertexId>,
    pub enumerated_count: u64,
    pub exhaustive: bool,
}

/// `(w(dOmega))^2 / mu(Omega)` for a nonempty set.
pub fn iso_ratio(s: &VertexSet<'_>) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::domain("isoperimetric ratio of the empty set"));
    }
    let w = s.boundary_weight();
    Ok(w * w / s.measure())
}

/// Admissible vertices re-indexed `0..n` in increasing id order, with each
/// neighbour either a local index or `None` (outside the window).
struct Window {
    ids: Vec<VertexId>,
    mu: Vec<f64>,
    neighbors: Vec<Vec<(Option<usize>, f64)>>,
}

impl Window {
    fn new(g: &WeightedGraph, admissible: &VertexSet<'_>) -> Self {
        let mut members: Vec<usize> = admissible.indices().collect();
        members.sort_by_key(|&x| g.id(x));
        let mut local = vec![None; g.len()];
        for (k, &x) in members.iter().enumerate() {
            local[x] = Some(k);
        }
        let neighbors = members.iter().map(|&x| g.neighbors(x).iter().map(|&(y, w)| (local[y], w)).collect()).collect();
        Self {
            ids: members.iter().map(|&x| g.id(x)).collect(),
            mu: members.iter().map(|&x| g.mu(x)).collect(),
            neighbors,
        }
    }

    fn ratio(&self, mask: u64) -> f64 {
        let mut measure = 0.0;
        let mut cut = 0.0;
        let mut bits = mask;
        while bits != 0 {
            let k = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            measure += self.mu[k];
            for &(nb, w) in &self.neighbors[k] {
                let inside = nb.is_some_and(|j| mask >> j & 1 == 1);
                if !inside {
                    cut += w;
                }
            }
        }
        cut * cut / measure
    }

    fn witness(&self, mask: u64) -> Vec<VertexId> {
        (0..self.ids.len()).filter(|&k| mask >> k & 1 == 1).map(|k| self.ids[k]).collect()
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    ratio: f64,
    witness: Vec<VertexId>,
}

impl Candidate {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.ratio.total_cmp(&other.ratio).then_with(|| self.witness.cmp(&other.witness))
    }

    fn min(a: Option<Self>, b: Option<Self>) -> Option<Self> {
        match (a, b) {
            (Some(a), Some(b)) => Some(if b.cmp_key(&a) == Ordering::Less { b } else { a }),
            (a, b) => a.or(b),
        }
    }
}

fn scan_range(window: &Window, masks: Range<u64>) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    for mask in masks {
        let ratio = window.ratio(mask);
        let keep = match &best {
            None => true,
            Some(b) => match ratio.total_cmp(&b.ratio) {
                Ordering::Less => true,
                Ordering::Equal => window.witness(mask) < b.witness,
                Ordering::Greater => false,
            },
        };
        if keep {
            best = Some(Candidate { ratio, witness: window.witness(mask) });
        }
    }
    best
}

/// Scans every nonempty subset of `admissible` and returns the smallest
/// ratio with the lexicographically smallest witness among ties.
pub fn brute_force_cis(g: &WeightedGraph, admissible: &VertexSet<'_>, limit: usize) -> Result<IsoperimetricReport> {
    if !std::ptr::eq(admissible.host(), g) {
        return Err(Error::domain("admissible set belongs to a different graph"));
    }
    let n = admissible.len();
    if n > limit || n > MAX_ENUMERABLE {
        return Err(Error::SizeLimit { size: n, limit: limit.min(MAX_ENUMERABLE) });
    }
    if n == 0 {
        return Err(Error::domain("admissible set is empty"));
    }
    let window = Window::new(g, admissible);
    let total = (1u64 << n) - 1;
    let chunk = total.div_ceil(CHUNKS).max(1);
    let best = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let start = 1 + c * chunk;
            let end = (start + chunk).min(total + 1);
            scan_range(&window, start..end)
        })
        .reduce(|| None, Candidate::min)
        .expect("at least one subset");

    Ok(IsoperimetricReport { c_is_upper: best.ratio, witness: best.witness, enumerated_count: total, exhaustive: true })
}

/// Ratios of the `k x k` squares for `k = 1..=k_max`, which are `4` exactly.
/// Squares with `k <= 4` are also built as lattice windows and measured.
pub fn square_family_scan(k_max: usize) -> Result<Vec<(usize, f64)>> {
    if k_max == 0 {
        return Err(Error::domain("k_max must be at least 1"));
    }
    (1..=k_max)
        .map(|k| {
            let side = k as f64;
            let closed = (4.0 * side).powi(2) / (4.0 * side * side);
            if k <= 4 {
                let win = LatticeWindow::new(k, true)?;
                let measured = iso_ratio(&win.interior())?;
                if measured != closed {
                    return Err(Error::domain(format!(
                        "{k}x{k} square measured ratio {measured} differs from {closed}"
                    )));
                }
            }
            Ok((k, closed))
        })
        .collect()
}
