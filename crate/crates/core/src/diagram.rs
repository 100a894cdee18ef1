//! Parameterized ZX-diagrams as open multigraphs of spiders.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{PhaseExpr, SymbolId, SymbolKind};

pub type VertexId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpiderKind {
    Z,
    X,
    BoundaryIn,
    BoundaryOut,
}

impl SpiderKind {
    pub fn is_boundary(self) -> bool {
        matches!(self, SpiderKind::BoundaryIn | SpiderKind::BoundaryOut)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeType {
    Plain,
    Hadamard,
}

impl EdgeType {
    pub fn toggled(self) -> Self {
        match self {
            EdgeType::Plain => EdgeType::Hadamard,
            EdgeType::Hadamard => EdgeType::Plain,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spider {
    pub kind: SpiderKind,
    pub phase: PhaseExpr,
}

/// Number of parallel edges of each type between an (ordered) vertex pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgeMult {
    pub plain: usize,
    pub hadamard: usize,
}

impl EdgeMult {
    pub fn total(&self) -> usize {
        self.plain + self.hadamard
    }

    fn get_mut(&mut self, t: EdgeType) -> &mut usize {
        match t {
            EdgeType::Plain => &mut self.plain,
            EdgeType::Hadamard => &mut self.hadamard,
        }
    }

    pub fn get(&self, t: EdgeType) -> usize {
        match t {
            EdgeType::Plain => self.plain,
            EdgeType::Hadamard => self.hadamard,
        }
    }
}

fn key(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// A ZX-diagram: spiders joined by plain or Hadamard edges, with ordered
/// input and output boundaries. Parallel edges and self-loops are allowed
/// while rewriting; the graph-like normal form has neither.
#[derive(Clone, Debug, Default)]
pub struct ZxDiagram {
    spiders: BTreeMap<VertexId, Spider>,
    edges: BTreeMap<(VertexId, VertexId), EdgeMult>,
    adj: BTreeMap<VertexId, BTreeSet<VertexId>>,
    inputs: Vec<VertexId>,
    outputs: Vec<VertexId>,
    next_id: VertexId,
}

impl PartialEq for ZxDiagram {
    fn eq(&self, other: &Self) -> bool {
        self.spiders == other.spiders
            && self.edges == other.edges
            && self.inputs == other.inputs
            && self.outputs == other.outputs
    }
}

impl ZxDiagram {
    pub fn new() -> Self {
        Self::default()
    }

    /// `n` parallel wires, each a single phase-free Z-spider between its
    /// input and output.
    pub fn identity(n: usize) -> Self {
        let mut d = ZxDiagram::new();
        for _ in 0..n {
            let i = d.add_input();
            let z = d.add_spider(SpiderKind::Z, PhaseExpr::zero());
            let o = d.add_output();
            d.add_edge(i, z, EdgeType::Plain);
            d.add_edge(z, o, EdgeType::Plain);
        }
        d
    }

    pub fn add_spider(&mut self, kind: SpiderKind, phase: PhaseExpr) -> VertexId {
        let id = self.next_id;
        self.next_id += 1;
        self.spiders.insert(id, Spider { kind, phase });
        self.adj.insert(id, BTreeSet::new());
        id
    }

    pub fn add_input(&mut self) -> VertexId {
        let v = self.add_spider(SpiderKind::BoundaryIn, PhaseExpr::zero());
        self.inputs.push(v);
        v
    }

    pub fn add_output(&mut self) -> VertexId {
        let v = self.add_spider(SpiderKind::BoundaryOut, PhaseExpr::zero());
        self.outputs.push(v);
        v
    }

    /// Removes a spider and its incident edges. Boundary spiders are also
    /// dropped from the boundary lists.
    pub fn remove_spider(&mut self, v: VertexId) {
        let nbrs: Vec<VertexId> = self.adj.get(&v).into_iter().flatten().copied().collect();
        for w in nbrs {
            self.edges.remove(&key(v, w));
            if let Some(set) = self.adj.get_mut(&w) {
                set.remove(&v);
            }
        }
        self.edges.remove(&(v, v));
        self.adj.remove(&v);
        self.spiders.remove(&v);
        self.inputs.retain(|&b| b != v);
        self.outputs.retain(|&b| b != v);
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId, t: EdgeType) {
        debug_assert!(self.spiders.contains_key(&u) && self.spiders.contains_key(&v));
        *self.edges.entry(key(u, v)).or_default().get_mut(t) += 1;
        if u != v {
            self.adj.get_mut(&u).expect("vertex").insert(v);
            self.adj.get_mut(&v).expect("vertex").insert(u);
        }
    }

    /// Removes one edge of type `t` between `u` and `v`; false if none exists.
    pub fn remove_edge(&mut self, u: VertexId, v: VertexId, t: EdgeType) -> bool {
        let k = key(u, v);
        let Some(m) = self.edges.get_mut(&k) else {
            return false;
        };
        let slot = m.get_mut(t);
        if *slot == 0 {
            return false;
        }
        *slot -= 1;
        if m.total() == 0 {
            self.edges.remove(&k);
            if u != v {
                self.adj.get_mut(&u).expect("vertex").remove(&v);
                self.adj.get_mut(&v).expect("vertex").remove(&u);
            }
        }
        true
    }

    /// Removes every edge between `u` and `v`.
    pub fn remove_edges_between(&mut self, u: VertexId, v: VertexId) -> EdgeMult {
        let m = self.edges.remove(&key(u, v)).unwrap_or_default();
        if u != v {
            if let Some(s) = self.adj.get_mut(&u) {
                s.remove(&v);
            }
            if let Some(s) = self.adj.get_mut(&v) {
                s.remove(&u);
            }
        }
        m
    }

    /// Adds a Hadamard edge if absent, removes it if present. Intended for
    /// simple graph-like diagrams.
    pub fn toggle_hadamard(&mut self, u: VertexId, v: VertexId) {
        if !self.remove_edge(u, v, EdgeType::Hadamard) {
            self.add_edge(u, v, EdgeType::Hadamard);
        }
    }

    pub fn edge_mult(&self, u: VertexId, v: VertexId) -> EdgeMult {
        self.edges.get(&key(u, v)).copied().unwrap_or_default()
    }

    /// The type of the single edge between `u` and `v`, if exactly one exists.
    pub fn edge_type(&self, u: VertexId, v: VertexId) -> Option<EdgeType> {
        let m = self.edge_mult(u, v);
        match (m.plain, m.hadamard) {
            (1, 0) => Some(EdgeType::Plain),
            (0, 1) => Some(EdgeType::Hadamard),
            _ => None,
        }
    }

    pub fn connected(&self, u: VertexId, v: VertexId) -> bool {
        self.adj.get(&u).is_some_and(|s| s.contains(&v))
    }

    /// Distinct neighbours, excluding `v` itself.
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.get(&v).into_iter().flatten().copied()
    }

    pub fn neighbor_set(&self, v: VertexId) -> BTreeSet<VertexId> {
        self.adj.get(&v).cloned().unwrap_or_default()
    }

    /// Number of edge ends at `v`; a self-loop contributes two.
    pub fn degree(&self, v: VertexId) -> usize {
        let mut d: usize = self.neighbors(v).map(|w| self.edge_mult(v, w).total()).sum();
        d += 2 * self.edge_mult(v, v).total();
        d
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.spiders.contains_key(&v)
    }

    pub fn spider(&self, v: VertexId) -> &Spider {
        &self.spiders[&v]
    }

    pub fn kind(&self, v: VertexId) -> SpiderKind {
        self.spiders[&v].kind
    }

    pub fn set_kind(&mut self, v: VertexId, kind: SpiderKind) {
        self.spiders.get_mut(&v).expect("vertex").kind = kind;
    }

    pub fn phase(&self, v: VertexId) -> &PhaseExpr {
        &self.spiders[&v].phase
    }

    pub fn set_phase(&mut self, v: VertexId, phase: PhaseExpr) {
        self.spiders.get_mut(&v).expect("vertex").phase = phase;
    }

    pub fn add_to_phase(&mut self, v: VertexId, phase: PhaseExpr) {
        self.spiders.get_mut(&v).expect("vertex").phase += phase;
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.kind(v).is_boundary()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.spiders.keys().copied()
    }

    pub fn spiders(&self) -> impl Iterator<Item = (VertexId, &Spider)> + '_ {
        self.spiders.iter().map(|(v, s)| (*v, s))
    }

    /// Non-boundary spiders.
    pub fn interior(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.spiders.iter().filter(|(_, s)| !s.kind.is_boundary()).map(|(v, _)| *v)
    }

    /// Every edge, parallel edges listed once each, as `(u, v, type)` with `u <= v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, EdgeType)> + '_ {
        self.edges.iter().flat_map(|(&(u, v), m)| {
            std::iter::repeat_n((u, v, EdgeType::Plain), m.plain)
                .chain(std::iter::repeat_n((u, v, EdgeType::Hadamard), m.hadamard))
        })
    }

    /// Distinct adjacent vertex pairs with their multiplicities.
    pub fn edge_pairs(&self) -> impl Iterator<Item = ((VertexId, VertexId), EdgeMult)> + '_ {
        self.edges.iter().map(|(k, m)| (*k, *m))
    }

    pub fn num_spiders(&self) -> usize {
        self.spiders.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.values().map(EdgeMult::total).sum()
    }

    pub fn inputs(&self) -> &[VertexId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[VertexId] {
        &self.outputs
    }

    /// Number of input wires; equals the output count for every diagram the
    /// generators and mutations produce.
    pub fn qubit_count(&self) -> usize {
        self.inputs.len()
    }

    /// All symbols occurring in spider phases.
    pub fn symbols(&self) -> BTreeSet<SymbolId> {
        self.spiders.values().flat_map(|s| s.phase.symbols()).collect()
    }

    /// The next unused symbol index of `kind`.
    pub fn fresh_symbol(&self, kind: SymbolKind) -> SymbolId {
        let index = self
            .symbols()
            .into_iter()
            .filter(|s| s.kind == kind)
            .map(|s| s.index + 1)
            .max()
            .unwrap_or(0);
        SymbolId { kind, index }
    }

    /// Checks the structural invariants: boundary lists reference boundary
    /// spiders exactly once, and boundaries carry no phase and have degree one.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (list, kind) in [(&self.inputs, SpiderKind::BoundaryIn), (&self.outputs, SpiderKind::BoundaryOut)] {
            for &b in list.iter() {
                let s = self
                    .spiders
                    .get(&b)
                    .ok_or_else(|| Error::Malformed(format!("boundary {b} does not exist")))?;
                if s.kind != kind {
                    return Err(Error::Malformed(format!("boundary {b} has kind {:?}", s.kind)));
                }
                if !seen.insert(b) {
                    return Err(Error::Malformed(format!("boundary {b} listed twice")));
                }
            }
        }
        for (&v, s) in &self.spiders {
            if s.kind.is_boundary() {
                if !seen.contains(&v) {
                    return Err(Error::Malformed(format!("boundary {v} is in neither list")));
                }
                if !s.phase.is_zero() {
                    return Err(Error::Malformed(format!("boundary {v} has a phase")));
                }
                if self.degree(v) != 1 {
                    return Err(Error::Malformed(format!(
                        "boundary {v} has degree {}",
                        self.degree(v)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Checks the graph-like normal form: only Z-spiders, Hadamard edges
    /// between spiders, no parallel edges or self-loops, and each boundary
    /// attached by a plain wire to a Z-spider carrying no other boundary.
    pub fn graph_like_violation(&self) -> Option<String> {
        for (&v, s) in &self.spiders {
            if s.kind == SpiderKind::X {
                return Some(format!("spider {v} is an X-spider"));
            }
        }
        for (&(u, v), m) in &self.edges {
            if u == v {
                return Some(format!("self-loop at {u}"));
            }
            if m.total() > 1 {
                return Some(format!("parallel edges between {u} and {v}"));
            }
            let (bu, bv) = (self.is_boundary(u), self.is_boundary(v));
            match (bu, bv) {
                (true, true) => return Some(format!("boundaries {u} and {v} joined directly")),
                (false, false) if m.plain > 0 => {
                    return Some(format!("plain edge between spiders {u} and {v}"))
                }
                (true, false) | (false, true) if m.hadamard > 0 => {
                    return Some(format!("Hadamard boundary wire {u}-{v}"))
                }
                _ => {}
            }
        }
        for v in self.interior() {
            let boundaries = self.neighbors(v).filter(|&w| self.is_boundary(w)).count();
            if boundaries > 1 {
                return Some(format!("spider {v} touches {boundaries} boundaries"));
            }
        }
        None
    }

    pub fn is_graph_like(&self) -> bool {
        self.graph_like_violation().is_none()
    }

    /// The spider a boundary wire attaches to.
    pub fn boundary_neighbor(&self, b: VertexId) -> Option<VertexId> {
        self.neighbors(b).next()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&DiagramRepr::from(self)).expect("diagram serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let repr: DiagramRepr =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        ZxDiagram::try_from(repr)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagramStats {
    pub qubits: usize,
    pub vertices: usize,
    pub connectivity: f64,
}

/// Qubit count, non-boundary spider count and the fraction of possible
/// spider-spider adjacencies that are present.
pub fn diagram_stats(d: &ZxDiagram) -> DiagramStats {
    let vertices = d.interior().count();
    let links = d
        .edge_pairs()
        .filter(|&((u, v), _)| u != v && !d.is_boundary(u) && !d.is_boundary(v))
        .count();
    let connectivity = if vertices < 2 {
        0.0
    } else {
        links as f64 / (vertices * (vertices - 1) / 2) as f64
    };
    DiagramStats { qubits: d.qubit_count(), vertices, connectivity }
}

#[derive(Serialize, Deserialize)]
pub struct SpiderRepr {
    pub id: VertexId,
    pub kind: SpiderKind,
    pub phase: PhaseExpr,
}

#[derive(Serialize, Deserialize)]
pub struct EdgeRepr {
    pub u: VertexId,
    pub v: VertexId,
    #[serde(rename = "type")]
    pub etype: EdgeType,
}

/// Wire format of a diagram.
#[derive(Serialize, Deserialize)]
pub struct DiagramRepr {
    pub inputs: Vec<VertexId>,
    pub outputs: Vec<VertexId>,
    pub spiders: Vec<SpiderRepr>,
    pub edges: Vec<EdgeRepr>,
}

impl From<&ZxDiagram> for DiagramRepr {
    fn from(d: &ZxDiagram) -> Self {
        DiagramRepr {
            inputs: d.inputs.clone(),
            outputs: d.outputs.clone(),
            spiders: d
                .spiders
                .iter()
                .map(|(&id, s)| SpiderRepr { id, kind: s.kind, phase: s.phase.clone() })
                .collect(),
            edges: d.edges().map(|(u, v, etype)| EdgeRepr { u, v, etype }).collect(),
        }
    }
}

impl TryFrom<DiagramRepr> for ZxDiagram {
    type Error = Error;

    fn try_from(repr: DiagramRepr) -> Result<Self> {
        let mut d = ZxDiagram::new();
        for s in repr.spiders {
            if d.spiders.insert(s.id, Spider { kind: s.kind, phase: s.phase }).is_some() {
                return Err(Error::Malformed(format!("duplicate spider id {}", s.id)));
            }
            d.adj.insert(s.id, BTreeSet::new());
            d.next_id = d.next_id.max(s.id + 1);
        }
        for e in repr.edges {
            if !d.contains(e.u) || !d.contains(e.v) {
                return Err(Error::Malformed(format!("edge {}-{} has a missing endpoint", e.u, e.v)));
            }
            d.add_edge(e.u, e.v, e.etype);
        }
        d.inputs = repr.inputs;
        d.outputs = repr.outputs;
        d.validate()?;
        Ok(d)
    }
}

impl Serialize for ZxDiagram {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DiagramRepr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ZxDiagram {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = DiagramRepr::deserialize(d)?;
        ZxDiagram::try_from(repr).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spiders_with_edges(n: usize, edges: &[(usize, usize)]) -> ZxDiagram {
        let mut d = ZxDiagram::new();
        let vs: Vec<_> = (0..n).map(|_| d.add_spider(SpiderKind::Z, PhaseExpr::zero())).collect();
        for &(a, b) in edges {
            d.add_edge(vs[a], vs[b], EdgeType::Hadamard);
        }
        d
    }

    #[test]
    fn connectivity_of_small_graphs() {
        assert_eq!(diagram_stats(&spiders_with_edges(1, &[])).connectivity, 0.0);
        let tri = spiders_with_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(diagram_stats(&tri).connectivity, 1.0);
        let four = spiders_with_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let stats = diagram_stats(&four);
        assert_eq!(stats.vertices, 4);
        assert!((stats.connectivity - 0.5).abs() < 1e-15);
    }

    #[test]
    fn boundary_spiders_are_not_vertices() {
        let d = ZxDiagram::identity(2);
        let s = diagram_stats(&d);
        assert_eq!((s.qubits, s.vertices), (2, 2));
        assert_eq!(s.connectivity, 0.0);
        // One spider per wire touching both ends breaks the normal form.
        assert!(!d.is_graph_like());
    }

    #[test]
    fn parallel_edges_and_loops_are_counted() {
        let mut d = spiders_with_edges(2, &[(0, 1), (0, 1)]);
        d.add_edge(0, 0, EdgeType::Plain);
        assert_eq!(d.edge_mult(0, 1).hadamard, 2);
        assert_eq!(d.degree(0), 4);
        assert!(!d.is_graph_like());
        assert!(d.remove_edge(0, 1, EdgeType::Hadamard));
        assert!(d.connected(0, 1));
        assert!(d.remove_edge(0, 1, EdgeType::Hadamard));
        assert!(!d.connected(0, 1));
        assert!(!d.remove_edge(0, 1, EdgeType::Plain));
    }

    #[test]
    fn json_round_trip_is_stable() {
        let mut d = ZxDiagram::identity(2);
        let z = d.interior().next().unwrap();
        d.set_phase(z, PhaseExpr::pi_frac(1, 4) + PhaseExpr::symbol(SymbolId::input(0)));
        let text = d.to_json();
        let back = ZxDiagram::from_json(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn corrupted_json_is_rejected() {
        let d = ZxDiagram::identity(1);
        let text = d.to_json().replace("\"BoundaryOut\"", "\"Z\"");
        assert!(ZxDiagram::from_json(&text).is_err());
        assert!(ZxDiagram::from_json("{\"inputs\": [").is_err());
    }

    #[test]
    fn fresh_symbols_skip_used_indices() {
        let mut d = ZxDiagram::identity(1);
        let z = d.interior().next().unwrap();
        d.set_phase(z, PhaseExpr::symbol(SymbolId::trainable(4)));
        assert_eq!(d.fresh_symbol(SymbolKind::Trainable), SymbolId::trainable(5));
        assert_eq!(d.fresh_symbol(SymbolKind::Input), SymbolId::input(0));
    }
}
