//! The nine graph-theoretic mutations and the retry harness.
//!
//! Each mutation takes a graph-like diagram and applies one random
//! transformation that in general changes the linear map. The harness
//! re-normalizes the result and keeps it only if a circuit can still be
//! extracted.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diagram::{diagram_stats, EdgeType, SpiderKind, VertexId, ZxDiagram};
use crate::error::{Error, Result};
use crate::extract::extract_circuit;
use crate::phase::{PhaseExpr, SymbolId, SymbolKind};
use crate::rewrite::{remove_identities_where, to_graph_like};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MutationKind {
    #[serde(rename = "M1")]
    LocalComplementation,
    #[serde(rename = "M2")]
    InverseLocalComplementation,
    #[serde(rename = "M3")]
    Pivot,
    #[serde(rename = "M4")]
    PhaseGadgetAddition,
    #[serde(rename = "M5")]
    EdgeFlip,
    #[serde(rename = "M6")]
    EdgeAdd,
    #[serde(rename = "M7")]
    EdgeRemove,
    #[serde(rename = "M8")]
    EdgeSwap,
    #[serde(rename = "M9")]
    EdgeSplit,
}

impl MutationKind {
    pub const ALL: [MutationKind; 9] = [
        MutationKind::LocalComplementation,
        MutationKind::InverseLocalComplementation,
        MutationKind::Pivot,
        MutationKind::PhaseGadgetAddition,
        MutationKind::EdgeFlip,
        MutationKind::EdgeAdd,
        MutationKind::EdgeRemove,
        MutationKind::EdgeSwap,
        MutationKind::EdgeSplit,
    ];

    /// 1-based label number, `M1` to `M9`.
    pub fn number(self) -> usize {
        MutationKind::ALL.iter().position(|&k| k == self).unwrap() + 1
    }

    pub fn label(self) -> String {
        format!("M{}", self.number())
    }

    pub fn apply<R: Rng + ?Sized>(self, d: &ZxDiagram, rng: &mut R) -> Result<ZxDiagram> {
        match self {
            MutationKind::LocalComplementation => m1_local_complementation(d, rng),
            MutationKind::InverseLocalComplementation => m2_inverse_local_complementation(d, rng),
            MutationKind::Pivot => m3_pivot(d, rng),
            MutationKind::PhaseGadgetAddition => m4_phase_gadget_addition(d, rng),
            MutationKind::EdgeFlip => m5_edge_flip(d, rng),
            MutationKind::EdgeAdd => m6_edge_add(d, rng),
            MutationKind::EdgeRemove => m7_edge_remove(d, rng),
            MutationKind::EdgeSwap => m8_edge_swap(d, rng),
            MutationKind::EdgeSplit => m9_edge_split(d, rng),
        }
    }
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.number())
    }
}

impl FromStr for MutationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n: usize = s
            .strip_prefix(['m', 'M'])
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| Error::Parse(format!("unknown mutation `{s}`")))?;
        MutationKind::ALL
            .get(n.wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown mutation `{s}`")))
    }
}

pub type KindProbabilities = BTreeMap<MutationKind, f64>;

/// The same probability for every kind.
pub fn uniform_probabilities(p: f64) -> KindProbabilities {
    MutationKind::ALL.into_iter().map(|k| (k, p)).collect()
}

pub const DEFAULT_MAX_TRIALS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub enum MutationResult {
    Success(ZxDiagram),
    Failure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MutationOutcome {
    pub kind: MutationKind,
    pub attempts: usize,
    pub result: MutationResult,
}

impl MutationOutcome {
    pub fn success(&self) -> bool {
        matches!(self.result, MutationResult::Success(_))
    }

    /// `seed,kind,attempts,success,qubits,vertices,connectivity` for the
    /// diagram the mutation was applied to.
    pub fn log_line(&self, seed: u64, parent: &ZxDiagram) -> String {
        let s = diagram_stats(parent);
        format!(
            "{seed},{},{},{},{},{},{}",
            self.kind,
            self.attempts,
            self.success(),
            s.qubits,
            s.vertices,
            s.connectivity
        )
    }
}

pub const LOG_HEADER: &str = "seed,kind,attempts,success,qubits,vertices,connectivity";

/// All mutations applied in one call of [`mutate`], in order.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeOutcome {
    pub steps: Vec<MutationOutcome>,
    /// The final diagram if at least one step succeeded.
    pub result: MutationResult,
}

impl CompositeOutcome {
    pub fn attempts(&self) -> usize {
        self.steps.iter().map(|s| s.attempts).sum()
    }

    pub fn applied(&self) -> Vec<MutationKind> {
        self.steps.iter().filter(|s| s.success()).map(|s| s.kind).collect()
    }
}

/// Spiders not wired to any boundary.
pub fn inner_spiders(d: &ZxDiagram) -> Vec<VertexId> {
    d.interior().filter(|&v| !touches_boundary(d, v)).collect()
}

fn touches_boundary(d: &ZxDiagram, v: VertexId) -> bool {
    d.neighbors(v).any(|w| d.is_boundary(w))
}

/// Edges between two non-boundary spiders.
fn spider_edges(d: &ZxDiagram) -> Vec<(VertexId, VertexId, EdgeType)> {
    d.edges().filter(|&(u, v, _)| u != v && !d.is_boundary(u) && !d.is_boundary(v)).collect()
}

fn non_adjacent_pairs(d: &ZxDiagram) -> Vec<(VertexId, VertexId)> {
    let spiders: Vec<VertexId> = d.interior().collect();
    let mut out = Vec::new();
    for (i, &u) in spiders.iter().enumerate() {
        for &v in &spiders[i + 1..] {
            if !d.connected(u, v) {
                out.push((u, v));
            }
        }
    }
    out
}

/// Neighbourhood size: geometric with mean 2 truncated to `[1, max]`.
pub fn sample_neighbourhood_size<R: Rng + ?Sized>(max: usize, rng: &mut R) -> usize {
    assert!(max >= 1);
    loop {
        let mut k = 1;
        while rng.gen_bool(0.5) {
            k += 1;
        }
        if k <= max {
            return k;
        }
    }
}

fn fresh_phase<R: Rng + ?Sized>(d: &ZxDiagram, rng: &mut R) -> PhaseExpr {
    let kind = if rng.gen_bool(0.5) { SymbolKind::Trainable } else { SymbolKind::Input };
    PhaseExpr::symbol(d.fresh_symbol(kind))
}

fn random_edge_type<R: Rng + ?Sized>(rng: &mut R) -> EdgeType {
    if rng.gen_bool(0.5) {
        EdgeType::Hadamard
    } else {
        EdgeType::Plain
    }
}

/// Toggles the Hadamard edges among the given spiders pairwise.
pub fn complement_among(d: &mut ZxDiagram, vs: &[VertexId]) {
    for (i, &a) in vs.iter().enumerate() {
        for &b in &vs[i + 1..] {
            d.toggle_hadamard(a, b);
        }
    }
}

/// Local complementation at `u` followed by deleting `u`.
pub fn local_complement_and_remove(d: &mut ZxDiagram, u: VertexId) {
    let nbrs: Vec<VertexId> = d.neighbor_set(u).into_iter().filter(|&w| w != u).collect();
    complement_among(d, &nbrs);
    d.remove_spider(u);
}

/// Adds a spider with `phase`, Hadamard-connected to `targets`, after
/// complementing the edges among them.
pub fn insert_complemented(d: &mut ZxDiagram, targets: &[VertexId], phase: PhaseExpr) -> VertexId {
    complement_among(d, targets);
    let u = d.add_spider(SpiderKind::Z, phase);
    for &t in targets {
        d.add_edge(u, t, EdgeType::Hadamard);
    }
    u
}

/// Pivot along the edge `uv` followed by deleting `u` and `v`.
pub fn pivot_and_remove(d: &mut ZxDiagram, u: VertexId, v: VertexId) {
    let nu: BTreeSet<VertexId> = d.neighbor_set(u).into_iter().filter(|&w| w != u && w != v).collect();
    let nv: BTreeSet<VertexId> = d.neighbor_set(v).into_iter().filter(|&w| w != u && w != v).collect();
    let only_u: Vec<VertexId> = nu.difference(&nv).copied().collect();
    let only_v: Vec<VertexId> = nv.difference(&nu).copied().collect();
    let both: Vec<VertexId> = nu.intersection(&nv).copied().collect();
    for (xs, ys) in [(&only_u, &only_v), (&only_u, &both), (&only_v, &both)] {
        for &a in xs {
            for &b in ys {
                d.toggle_hadamard(a, b);
            }
        }
    }
    d.remove_spider(u);
    d.remove_spider(v);
}

/// Attaches a phase gadget: a phase-free hub joined to `targets` and to a
/// leaf carrying `phase`. Returns `(hub, leaf)`.
pub fn add_phase_gadget(d: &mut ZxDiagram, targets: &[VertexId], phase: PhaseExpr) -> (VertexId, VertexId) {
    let hub = d.add_spider(SpiderKind::Z, PhaseExpr::zero());
    let leaf = d.add_spider(SpiderKind::Z, phase);
    d.add_edge(hub, leaf, EdgeType::Hadamard);
    for &t in targets {
        d.add_edge(hub, t, EdgeType::Hadamard);
    }
    (hub, leaf)
}

/// Replaces one edge `u - v` of type `t` by `u - w - v`. The half at a
/// boundary keeps type `t` and the other half is a Hadamard edge; between
/// spiders the half at `v` keeps `t`.
pub fn split_edge(d: &mut ZxDiagram, u: VertexId, v: VertexId, t: EdgeType, phase: PhaseExpr) -> VertexId {
    assert!(d.remove_edge(u, v, t), "edge to split must exist");
    let (u, v) = if d.is_boundary(u) { (v, u) } else { (u, v) };
    let w = d.add_spider(SpiderKind::Z, phase);
    d.add_edge(u, w, EdgeType::Hadamard);
    d.add_edge(w, v, t);
    w
}

fn no_candidate<T>(kind: MutationKind) -> Result<T> {
    Err(Error::NoCandidate(kind))
}

pub fn m1_local_complementation<R: Rng + ?Sized>(d: &ZxDiagram, rng: &mut R) -> Result<ZxDiagram> {
    let Some(&u) = inner_spiders(d).choose(rng) else {
        return no_candidate(MutationKind::LocalComplementation);
    };
    let mut g = d.clone();
    local_complement_and_remove(&mut g, u);
    Ok(g)
}

pub fn m2_inverse_local_complementation<R: Rng + ?Sized>(d: &ZxDiagram, rng: &mut R) -> Result<ZxDiagram> {
    let spiders: Vec<VertexId> = d.interior().collect();
    if spiders.is_empty() {
        return no_candidate(MutationKind::InverseLocalComplementation);
    }
    let k = sample_neighbourhood_size(spiders.len(), rng);
    let targets: Vec<VertexId> = spiders.choose_multiple(rng, k).copied().collect();
    let mut g = d.clone();
    let phase = fresh_phase(&g, rng);
    insert_complemented(&mut g, &targets, phase);
    Ok(g)
}

pub fn m3_pivot<R: Rng + ?Sized>(d: &ZxDiagram, rng: &mut R) -> Result<ZxDiagram> {
    let inner: BTreeSet<VertexId> = inner_spiders(d).into_iter().collect();
    let Some((u, v, _)) = spider_edges(d)
        .into_iter()
        .filter(|(u, v, _)| inner.contains(u) && inner.contains(v))
        .choose(rng)
    else {
        return no_candidate(MutationKind::Pivot);
    };
    let mut g = d.clone();
    pivot_and_remove(&mut g, u, v);
    Ok(g)
}

pub fn m4_phase_gadget_addition<R: Rng + ?Sized>(d: &ZxDiagram, rng: &mut R) -> Result<ZxDiagram> {
    let spiders: Vec<VertexId> = d.interior().collect();
    if spiders.is_empty() {
        return no_candidate(MutationKind::PhaseGadgetAddition);
    }
    let k = sample_neighbourhood_size(spiders.len(), rng);
    let targets: Vec<VertexId> = spiders.choose_multiple(rng, k).copied().collect();
    let mut g = d.clone();
    let phase = fresh_phase(&g, rng);
    add_phase_gadget(&mut g, &targets, phase);
    Ok(g)
}

pub fn m5_edge_flip<R: Rng + ?Sized>(d: &ZxDiagram, rng: &mut R) -> Result<ZxDiagram> {
    let Some((u, v, t)) = d.edges().choose(rng) else {
        return no_candidate(MutationKind::EdgeFlip);
    };
    let mut g = d.clone();
    g.remove_edge(u, v, t);
    g.add_edge(u, v, t.toggled());
    Ok(g)
}

pub fn m6_edge_add<R: Rng + ?Sized>(d: &ZxDiagram, rng: &mut R) -> Result<ZxDiagram> {
    let Some(&(u, v)) = non_adjacent_pairs(d).choose(rng) else {
        return no_candidate(MutationKind::EdgeAdd);
    };
    let mut g = d.clone();
    g.add_edge(u, v, random_edge_type(rng));
    Ok(g)
}

pub fn m7_edge_remove<R: Rng + ?Sized>(d: &ZxDiagram, rng: &mut R) -> Result<ZxDiagram> {
    let Some(&(u, v, t)) = spider_edges(d).choose(rng) else {
        return no_candidate(MutationKind::EdgeRemove);
    };
    let mut g = d.clone();
    g.remove_edge(u, v, t);
    Ok(g)
}

pub fn m8_edge_swap<R: Rng + ?Sized>(d: &ZxDiagram, rng: &mut R) -> Result<ZxDiagram> {
    let edges = spider_edges(d);
    let pairs = non_adjacent_pairs(d);
    let (Some(&(u, v, t)), Some(&(a, b))) = (edges.choose(rng), pairs.choose(rng)) else {
        return no_candidate(MutationKind::EdgeSwap);
    };
    let mut g = d.clone();
    g.remove_edge(u, v, t);
    g.add_edge(a, b, random_edge_type(rng));
    Ok(g)
}

pub fn m9_edge_split<R: Rng + ?Sized>(d: &ZxDiagram, rng: &mut R) -> Result<ZxDiagram> {
    let Some((u, v, t)) = d.edges().filter(|&(u, v, _)| u != v).choose(rng) else {
        return no_candidate(MutationKind::EdgeSplit);
    };
    let mut g = d.clone();
    let phase = fresh_phase(&g, rng);
    split_edge(&mut g, u, v, t, phase);
    Ok(g)
}

/// Graph-like form of a mutant. Besides [`to_graph_like`], phase-free
/// pass-through spiders are removed, so that a one-legged phase gadget
/// becomes the phase shift it denotes. Spiders between two boundary
/// spiders are kept: the normal form puts them there.
pub fn normalize(d: &ZxDiagram) -> ZxDiagram {
    let mut g = to_graph_like(d);
    let removable = |g: &ZxDiagram, v: VertexId| !g.neighbors(v).all(|w| touches_boundary(g, w));
    if remove_identities_where(&mut g, removable) {
        g = to_graph_like(&g);
    }
    g
}

/// Applies `kind` up to `max_trials` times until the normalized mutant is
/// extractable. Stops early when the diagram offers no candidate.
pub fn attempt_mutation<R: Rng + ?Sized>(
    d: &ZxDiagram,
    kind: MutationKind,
    max_trials: usize,
    rng: &mut R,
) -> MutationOutcome {
    let mut attempts = 0;
    while attempts < max_trials {
        attempts += 1;
        let Ok(mutant) = kind.apply(d, rng) else { break };
        let g = normalize(&mutant);
        if g.inputs() == d.inputs() && g.outputs() == d.outputs() && extract_circuit(&g).is_ok() {
            return MutationOutcome { kind, attempts, result: MutationResult::Success(g) };
        }
    }
    MutationOutcome { kind, attempts, result: MutationResult::Failure }
}

/// Applies each kind with its probability, in label order, each on the
/// result of the previous successful one.
pub fn mutate<R: Rng + ?Sized>(
    d: &ZxDiagram,
    kind_probabilities: &KindProbabilities,
    max_trials: usize,
    rng: &mut R,
) -> CompositeOutcome {
    let mut current: Option<ZxDiagram> = None;
    let mut steps = Vec::new();
    for kind in MutationKind::ALL {
        let p = kind_probabilities.get(&kind).copied().unwrap_or(0.0).clamp(0.0, 1.0);
        if p == 0.0 || !rng.gen_bool(p) {
            continue;
        }
        let outcome = attempt_mutation(current.as_ref().unwrap_or(d), kind, max_trials, rng);
        if let MutationResult::Success(g) = &outcome.result {
            current = Some(g.clone());
        }
        steps.push(outcome);
    }
    let result = current.map_or(MutationResult::Failure, MutationResult::Success);
    CompositeOutcome { steps, result }
}

/// Symbols of `d` that do not occur in `parent`.
pub fn new_symbols(parent: &ZxDiagram, d: &ZxDiagram) -> Vec<SymbolId> {
    let old = parent.symbols();
    d.symbols().into_iter().filter(|s| !old.contains(s)).collect()
}
