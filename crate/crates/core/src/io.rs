//! File formats.
//!
//! Graph JSON, one entry per line:
//!
//! ```text
//! {"vertices":[
//! {"id":0,"mu":4.0,"i":0,"j":0},
//! {"id":1,"mu":4.0,"i":-1,"j":0,"boundary":true}
//! ],"edges":[
//! {"a":0,"b":1,"w":1.0}
//! ]}
//! ```
//!
//! `i`, `j` (lattice coordinates) and `boundary` (Dirichlet flag) are
//! optional. Solution CSV is `vertex_id,i,j,u` with empty coordinate cells
//! off-lattice; boundary CSV is `vertex_id,u`.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::value::MapAccessDeserializer;
use serde::de::{self, DeserializeSeed, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphBuilder, ScalarField, VertexId, VertexMeta, WeightedGraph};

/// Shortest decimal that round-trips to the same `f64`. Very large and very
/// small magnitudes switch to exponent notation.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x != 0.0 && x.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVertex {
    id: VertexId,
    mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    i: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    j: Option<i64>,
    #[serde(default, skip_serializing_if = "is_false")]
    boundary: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    a: VertexId,
    b: VertexId,
    w: f64,
}

// Each entry is validated before its closing brace is consumed, so
// serde_json reports the line of the offending entry itself.

trait EntryCheck {
    type Entry: for<'de> Deserialize<'de>;
    fn check(&mut self, e: &Self::Entry) -> std::result::Result<(), String>;
}

struct EntrySeed<'a, C>(&'a mut C);

impl<'de, C: EntryCheck> DeserializeSeed<'de> for EntrySeed<'_, C> {
    type Value = C::Entry;
    fn deserialize<D: Deserializer<'de>>(self, d: D) -> std::result::Result<C::Entry, D::Error> {
        d.deserialize_map(self)
    }
}

impl<'de, C: EntryCheck> Visitor<'de> for EntrySeed<'_, C> {
    type Value = C::Entry;
    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an object")
    }
    fn visit_map<A: MapAccess<'de>>(self, map: A) -> std::result::Result<C::Entry, A::Error> {
        let e = C::Entry::deserialize(MapAccessDeserializer::new(map))?;
        self.0.check(&e).map_err(de::Error::custom)?;
        Ok(e)
    }
}

struct ListSeed<C>(C);

impl<'de, C: EntryCheck> DeserializeSeed<'de> for ListSeed<C> {
    type Value = (Vec<C::Entry>, C);
    fn deserialize<D: Deserializer<'de>>(self, d: D) -> std::result::Result<Self::Value, D::Error> {
        d.deserialize_seq(self)
    }
}

impl<'de, C: EntryCheck> Visitor<'de> for ListSeed<C> {
    type Value = (Vec<C::Entry>, C);
    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a list")
    }
    fn visit_seq<A: SeqAccess<'de>>(mut self, mut seq: A) -> std::result::Result<Self::Value, A::Error> {
        let mut out = Vec::new();
        while let Some(e) = seq.next_element_seed(EntrySeed(&mut self.0))? {
            out.push(e);
        }
        Ok((out, self.0))
    }
}

#[derive(Default)]
struct VertexCheck {
    seen: HashSet<VertexId>,
}

impl EntryCheck for VertexCheck {
    type Entry = RawVertex;
    fn check(&mut self, v: &RawVertex) -> std::result::Result<(), String> {
        if !(v.mu.is_finite() && v.mu > 0.0) {
            return Err(format!("vertex {}: mu = {} must be positive", v.id, v.mu));
        }
        if v.i.is_some() != v.j.is_some() {
            return Err(format!("vertex {}: give both lattice coordinates i and j or neither", v.id));
        }
        if !self.seen.insert(v.id) {
            return Err(format!("duplicate vertex id {}", v.id));
        }
        Ok(())
    }
}

/// Endpoint existence is only checked here when the vertex list came
/// first in the document; otherwise the graph builder catches it.
struct EdgeCheck<'a> {
    known: Option<&'a HashSet<VertexId>>,
    seen: HashSet<(VertexId, VertexId)>,
}

impl EntryCheck for EdgeCheck<'_> {
    type Entry = RawEdge;
    fn check(&mut self, e: &RawEdge) -> std::result::Result<(), String> {
        if e.a == e.b {
            return Err(format!("self-loop at vertex {}", e.a));
        }
        if !(e.w.is_finite() && e.w > 0.0) {
            return Err(format!("edge {{{},{}}}: w = {} must be positive", e.a, e.b, e.w));
        }
        if let Some(known) = self.known {
            if let Some(v) = [e.a, e.b].into_iter().find(|v| !known.contains(v)) {
                return Err(format!("edge {{{},{}}} references unknown vertex {v}", e.a, e.b));
            }
        }
        if !self.seen.insert((e.a.min(e.b), e.a.max(e.b))) {
            return Err(format!("duplicate edge {{{},{}}}", e.a, e.b));
        }
        Ok(())
    }
}

struct RawGraph {
    vertices: Vec<RawVertex>,
    edges: Vec<RawEdge>,
}

impl<'de> Deserialize<'de> for RawGraph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RawGraph;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object with \"vertices\" and \"edges\"")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<RawGraph, A::Error> {
                let mut vertices: Option<Vec<RawVertex>> = None;
                let mut known: Option<HashSet<VertexId>> = None;
                let mut edges = None;
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "vertices" if vertices.is_none() => {
                            let (list, check) = map.next_value_seed(ListSeed(VertexCheck::default()))?;
                            known = Some(check.seen);
                            vertices = Some(list);
                        }
                        "edges" if edges.is_none() => {
                            let check = EdgeCheck { known: known.as_ref(), seen: HashSet::new() };
                            edges = Some(map.next_value_seed(ListSeed(check))?.0);
                        }
                        "vertices" | "edges" => return Err(de::Error::duplicate_field("vertices/edges")),
                        other => return Err(de::Error::unknown_field(other, &["vertices", "edges"])),
                    }
                }
                Ok(RawGraph {
                    vertices: vertices.ok_or_else(|| de::Error::missing_field("vertices"))?,
                    edges: edges.ok_or_else(|| de::Error::missing_field("edges"))?,
                })
            }
        }
        d.deserialize_map(V)
    }
}

/// Parses graph JSON. Malformed entries are reported with their line.
pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    let raw: RawGraph = serde_json::from_str(text).map_err(|e| Error::Format(format!("graph JSON: {e}")))?;
    let mut b = GraphBuilder::new();
    for v in &raw.vertices {
        let coord = v.i.zip(v.j).map(|(i, j)| [i, j]);
        b.vertex_with_meta(v.id, v.mu, VertexMeta { coord, boundary: v.boundary });
    }
    for e in &raw.edges {
        b.edge(e.a, e.b, e.w);
    }
    b.build().map_err(|e| match e {
        Error::InvalidGraph(msg) => Error::Format(format!("graph JSON: {msg}")),
        other => other,
    })
}

pub fn read_graph(path: &Path) -> Result<WeightedGraph> {
    parse_graph(&read_to_string(path)?).map_err(|e| with_path(e, path))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    }
}

pub fn graph_to_json(g: &WeightedGraph) -> String {
    let mut out = String::from("{\"vertices\":[\n");
    for x in 0..g.len() {
        let meta = g.meta(x);
        let v = RawVertex {
            id: g.id(x),
            mu: g.mu(x),
            i: meta.coord.map(|c| c[0]),
            j: meta.coord.map(|c| c[1]),
            boundary: meta.boundary,
        };
        out.push_str(&serde_json::to_string(&v).expect("plain struct serializes"));
        out.push_str(if x + 1 < g.len() { ",\n" } else { "\n" });
    }
    out.push_str("],\"edges\":[\n");
    let edges = g.edges();
    for (k, e) in edges.iter().enumerate() {
        let raw = RawEdge { a: g.id(e.a), b: g.id(e.b), w: e.w };
        out.push_str(&serde_json::to_string(&raw).expect("plain struct serializes"));
        out.push_str(if k + 1 < edges.len() { ",\n" } else { "\n" });
    }
    out.push_str("]}\n");
    out
}

pub fn write_graph(path: &Path, g: &WeightedGraph) -> Result<()> {
    write_string(path, &graph_to_json(g))
}

pub const SOLUTION_HEADER: [&str; 4] = ["vertex_id", "i", "j", "u"];

/// Solution CSV in vertex order.
pub fn solution_to_csv(g: &WeightedGraph, u: &ScalarField) -> String {
    let mut out = SOLUTION_HEADER.join(",");
    out.push('\n');
    for x in 0..g.len() {
        let (i, j) = match g.meta(x).coord {
            Some([i, j]) => (i.to_string(), j.to_string()),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!("{},{i},{j},{}\n", g.id(x), fmt_f64(u.get(x))));
    }
    out
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes())
}

fn check_header(rdr: &mut csv::Reader<&[u8]>, expected: &[&str], what: &str) -> Result<()> {
    let header = rdr.headers().map_err(|e| Error::Format(format!("{what}: {e}")))?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Format(format!(
            "{what}: line 1: expected header `{}`, found `{}`",
            expected.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn parse_cell<T: std::str::FromStr>(rec: &csv::StringRecord, col: usize, what: &str) -> Result<T> {
    let cell = rec.get(col).unwrap_or("");
    cell.parse().map_err(|_| Error::Format(format!("{what}: line {}: cannot parse `{cell}`", line_of(rec))))
}

fn parse_id_values(text: &str, header: &[&str], value_col: usize, what: &str) -> Result<Vec<(VertexId, f64, u64)>> {
    let mut rdr = csv_reader(text);
    check_header(&mut rdr, header, what)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Format(format!("{what}: {e}")))?;
        let id: VertexId = parse_cell(&rec, 0, what)?;
        let v: f64 = parse_cell(&rec, value_col, what)?;
        if !v.is_finite() {
            return Err(Error::Format(format!("{what}: line {}: value for vertex {id} is not finite", line_of(&rec))));
        }
        out.push((id, v, line_of(&rec)));
    }
    Ok(out)
}

/// Reads a solution CSV against `g`; every vertex must appear exactly once.
pub fn parse_solution(text: &str, g: &WeightedGraph) -> Result<ScalarField> {
    const WHAT: &str = "solution CSV";
    let mut values = vec![None; g.len()];
    for (id, v, line) in parse_id_values(text, &SOLUTION_HEADER, 3, WHAT)? {
        let x = g.index_of(id).map_err(|_| Error::Format(format!("{WHAT}: line {line}: unknown vertex {id}")))?;
        if values[x].replace(v).is_some() {
            return Err(Error::Format(format!("{WHAT}: line {line}: vertex {id} listed twice")));
        }
    }
    if let Some(x) = values.iter().position(Option::is_none) {
        return Err(Error::Format(format!("{WHAT}: no value for vertex {}", g.id(x))));
    }
    ScalarField::from_values(g, values.into_iter().flatten().collect())
}

pub fn read_solution(path: &Path, g: &WeightedGraph) -> Result<ScalarField> {
    parse_solution(&read_to_string(path)?, g).map_err(|e| with_path(e, path))
}

pub const BOUNDARY_HEADER: [&str; 2] = ["vertex_id", "u"];

/// Boundary values as `(vertex_id, u)` pairs, in file order.
pub fn parse_boundary(text: &str) -> Result<Vec<(VertexId, f64)>> {
    const WHAT: &str = "boundary CSV";
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (id, v, line) in parse_id_values(text, &BOUNDARY_HEADER, 1, WHAT)? {
        if !seen.insert(id) {
            return Err(Error::Format(format!("{WHAT}: line {line}: vertex {id} listed twice")));
        }
        out.push((id, v));
    }
    Ok(out)
}

pub fn read_boundary(path: &Path) -> Result<Vec<(VertexId, f64)>> {
    parse_boundary(&read_to_string(path)?).map_err(|e| with_path(e, path))
}
