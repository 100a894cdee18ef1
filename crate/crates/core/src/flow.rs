//! Open graphs and generalized flow.

use std::collections::{BTreeMap, BTreeSet};

use crate::diagram::{VertexId, ZxDiagram};
use crate::error::{Error, Result};
use crate::gf2::Gf2Matrix;

/// A simple graph with designated input and output vertex sets.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct OpenGraph {
    adj: BTreeMap<VertexId, BTreeSet<VertexId>>,
    pub inputs: BTreeSet<VertexId>,
    pub outputs: BTreeSet<VertexId>,
}

impl OpenGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, v: VertexId) {
        self.adj.entry(v).or_default();
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) {
        assert_ne!(u, v, "open graphs have no self-loops");
        self.adj.entry(u).or_default().insert(v);
        self.adj.entry(v).or_default().insert(u);
    }

    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) {
        if let Some(s) = self.adj.get_mut(&u) {
            s.remove(&v);
        }
        if let Some(s) = self.adj.get_mut(&v) {
            s.remove(&u);
        }
    }

    pub fn toggle_edge(&mut self, u: VertexId, v: VertexId) {
        if self.connected(u, v) {
            self.remove_edge(u, v);
        } else {
            self.add_edge(u, v);
        }
    }

    pub fn remove_vertex(&mut self, v: VertexId) {
        if let Some(nbrs) = self.adj.remove(&v) {
            for w in nbrs {
                if let Some(s) = self.adj.get_mut(&w) {
                    s.remove(&v);
                }
            }
        }
        self.inputs.remove(&v);
        self.outputs.remove(&v);
    }

    pub fn connected(&self, u: VertexId, v: VertexId) -> bool {
        self.adj.get(&u).is_some_and(|s| s.contains(&v))
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.keys().copied()
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: VertexId) -> &BTreeSet<VertexId> {
        &self.adj[&v]
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adj
            .iter()
            .flat_map(|(&u, s)| s.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn num_edges(&self) -> usize {
        self.edges().count()
    }

    /// Complements the subgraph induced by the neighbourhood of `u`.
    pub fn local_complement(&mut self, u: VertexId) {
        let nbrs: Vec<VertexId> = self.adj[&u].iter().copied().collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                self.toggle_edge(a, b);
            }
        }
    }

    /// `((G * u) * v) * u` for adjacent `u`, `v`.
    pub fn pivot(&mut self, u: VertexId, v: VertexId) {
        self.local_complement(u);
        self.local_complement(v);
        self.local_complement(u);
    }

    pub fn is_inner(&self, v: VertexId) -> bool {
        !self.inputs.contains(&v) && !self.outputs.contains(&v)
    }
}

/// The open graph of a graph-like diagram: interior spiders, Hadamard edges
/// between them, and the spiders wired to inputs and outputs.
pub fn underlying_open_graph(diagram: &ZxDiagram) -> Result<OpenGraph> {
    if let Some(why) = diagram.graph_like_violation() {
        return Err(Error::NotGraphLike(why));
    }
    let mut g = OpenGraph::new();
    for v in diagram.interior() {
        g.add_vertex(v);
    }
    for (u, v, _) in diagram.edges() {
        if !diagram.is_boundary(u) && !diagram.is_boundary(v) {
            g.add_edge(u, v);
        }
    }
    for &b in diagram.inputs() {
        if let Some(v) = diagram.boundary_neighbor(b) {
            g.inputs.insert(v);
        }
    }
    for &b in diagram.outputs() {
        if let Some(v) = diagram.boundary_neighbor(b) {
            g.outputs.insert(v);
        }
    }
    Ok(g)
}

/// Decides whether `g` has a generalized flow (all non-outputs measured in
/// the XY plane) by building the maximally delayed layering from the outputs
/// backwards. A vertex `u` joins the next layer when some set `K` of
/// already-layered non-input vertices has odd neighbourhood meeting the
/// unlayered vertices exactly in `{u}`.
pub fn gflow_exists(g: &OpenGraph) -> bool {
    let mut processed: BTreeSet<VertexId> = g.outputs.clone();
    let mut correctors: Vec<VertexId> =
        g.outputs.iter().copied().filter(|v| !g.inputs.contains(v)).collect();
    loop {
        let unprocessed: Vec<VertexId> = g.vertices().filter(|v| !processed.contains(v)).collect();
        if unprocessed.is_empty() {
            return true;
        }
        let a = Gf2Matrix::from_fn(unprocessed.len(), correctors.len(), |r, c| {
            g.connected(unprocessed[r], correctors[c])
        });
        let layer: Vec<VertexId> = unprocessed
            .iter()
            .enumerate()
            .filter(|&(i, _)| {
                let target: Vec<bool> = (0..unprocessed.len()).map(|r| r == i).collect();
                a.solve(&target).is_some()
            })
            .map(|(_, &v)| v)
            .collect();
        if layer.is_empty() {
            return false;
        }
        for v in layer {
            processed.insert(v);
            if !g.inputs.contains(&v) {
                correctors.push(v);
            }
        }
    }
}
