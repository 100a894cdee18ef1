//! Rewrite rules and conversion to graph-like form.
//!
//! Only the rules needed for the normal form are implemented: colour change,
//! spider fusion, self-loop removal, Hadamard-pair (Hopf) cancellation and
//! identity removal. Scalars are dropped.

use crate::diagram::{EdgeType, SpiderKind, VertexId, ZxDiagram};
use crate::phase::PhaseExpr;

/// Turns an X-spider into a Z-spider by toggling every incident edge.
/// Self-loops are toggled at both ends and so keep their type.
pub fn color_change(g: &mut ZxDiagram, v: VertexId) {
    if g.kind(v) != SpiderKind::X {
        return;
    }
    g.set_kind(v, SpiderKind::Z);
    let nbrs: Vec<VertexId> = g.neighbors(v).collect();
    for w in nbrs {
        let m = g.remove_edges_between(v, w);
        for _ in 0..m.plain {
            g.add_edge(v, w, EdgeType::Hadamard);
        }
        for _ in 0..m.hadamard {
            g.add_edge(v, w, EdgeType::Plain);
        }
    }
}

/// Fuses `v` into `u`; they must be Z-spiders joined by at least one plain edge.
pub fn fuse(g: &mut ZxDiagram, u: VertexId, v: VertexId) {
    debug_assert!(g.kind(u) == SpiderKind::Z && g.kind(v) == SpiderKind::Z);
    let between = g.remove_edges_between(u, v);
    debug_assert!(between.plain >= 1);
    for _ in 1..between.plain {
        g.add_edge(u, u, EdgeType::Plain);
    }
    for _ in 0..between.hadamard {
        g.add_edge(u, u, EdgeType::Hadamard);
    }
    let loops = g.edge_mult(v, v);
    for _ in 0..loops.plain {
        g.add_edge(u, u, EdgeType::Plain);
    }
    for _ in 0..loops.hadamard {
        g.add_edge(u, u, EdgeType::Hadamard);
    }
    let nbrs: Vec<VertexId> = g.neighbors(v).collect();
    for w in nbrs {
        let m = g.edge_mult(v, w);
        for _ in 0..m.plain {
            g.add_edge(u, w, EdgeType::Plain);
        }
        for _ in 0..m.hadamard {
            g.add_edge(u, w, EdgeType::Hadamard);
        }
    }
    let phase = g.phase(v).clone();
    g.add_to_phase(u, phase);
    g.remove_spider(v);
}

/// Deletes self-loops on Z-spiders; each Hadamard loop adds pi to the phase.
pub fn remove_self_loops(g: &mut ZxDiagram, v: VertexId) -> bool {
    let m = g.edge_mult(v, v);
    if m.total() == 0 {
        return false;
    }
    g.remove_edges_between(v, v);
    if m.hadamard % 2 == 1 {
        g.add_to_phase(v, PhaseExpr::pi_frac(1, 1));
    }
    true
}

/// Removes Hadamard edges in pairs between two Z-spiders.
pub fn cancel_hadamard_pairs(g: &mut ZxDiagram, u: VertexId, v: VertexId) -> bool {
    let m = g.edge_mult(u, v);
    if m.hadamard < 2 {
        return false;
    }
    let pairs = m.hadamard / 2;
    for _ in 0..2 * pairs {
        g.remove_edge(u, v, EdgeType::Hadamard);
    }
    true
}

/// True for a phase-free Z-spider with exactly two Hadamard edges to
/// distinct Z-spiders.
pub fn is_identity_spider(g: &ZxDiagram, v: VertexId) -> bool {
    if g.kind(v) != SpiderKind::Z || !g.phase(v).is_zero() || g.degree(v) != 2 {
        return false;
    }
    let nbrs: Vec<VertexId> = g.neighbors(v).collect();
    let [a, b] = nbrs[..] else { return false };
    let ok = |w| g.kind(w) == SpiderKind::Z && g.edge_type(v, w) == Some(EdgeType::Hadamard);
    ok(a) && ok(b)
}

/// Removes an identity spider (see [`is_identity_spider`]), joining its
/// neighbours with a plain wire and fusing them.
pub fn remove_identity(g: &mut ZxDiagram, v: VertexId) -> bool {
    if !is_identity_spider(g, v) {
        return false;
    }
    let nbrs: Vec<VertexId> = g.neighbors(v).collect();
    g.remove_spider(v);
    g.add_edge(nbrs[0], nbrs[1], EdgeType::Plain);
    fuse(g, nbrs[0], nbrs[1]);
    true
}

/// Applies [`remove_identity`] wherever `allowed` holds until no such
/// spider is left.
pub fn remove_identities_where(g: &mut ZxDiagram, allowed: impl Fn(&ZxDiagram, VertexId) -> bool) -> bool {
    let mut any = false;
    loop {
        let found = g.interior().find(|&v| is_identity_spider(g, v) && allowed(g, v));
        let Some(v) = found else { break };
        remove_identity(g, v);
        any = true;
    }
    any
}

/// Removes every identity spider.
pub fn remove_identities(g: &mut ZxDiagram) -> bool {
    remove_identities_where(g, |_, _| true)
}

fn is_interior_z(g: &ZxDiagram, v: VertexId) -> bool {
    g.kind(v) == SpiderKind::Z
}

fn find_plain_fusion(g: &ZxDiagram) -> Option<(VertexId, VertexId)> {
    g.edge_pairs()
        .find(|&((u, v), m)| u != v && m.plain > 0 && is_interior_z(g, u) && is_interior_z(g, v))
        .map(|(k, _)| k)
}

/// Converts any well-formed diagram to graph-like form with the same linear
/// map up to a scalar. Graph-like input is returned unchanged.
pub fn to_graph_like(diagram: &ZxDiagram) -> ZxDiagram {
    let mut g = diagram.clone();
    let xs: Vec<VertexId> = g.interior().filter(|&v| g.kind(v) == SpiderKind::X).collect();
    for v in xs {
        color_change(&mut g, v);
    }
    loop {
        let mut changed = false;
        while let Some((u, v)) = find_plain_fusion(&g) {
            fuse(&mut g, u, v);
            changed = true;
        }
        let interior: Vec<VertexId> = g.interior().collect();
        for &v in &interior {
            changed |= remove_self_loops(&mut g, v);
        }
        let pairs: Vec<(VertexId, VertexId)> = g
            .edge_pairs()
            .filter(|&((u, v), m)| u != v && m.hadamard >= 2 && is_interior_z(&g, u) && is_interior_z(&g, v))
            .map(|(k, _)| k)
            .collect();
        for (u, v) in pairs {
            changed |= cancel_hadamard_pairs(&mut g, u, v);
        }
        if !changed {
            break;
        }
    }
    fix_boundaries(&mut g);
    g
}

/// Inserts phase-free Z-spiders so every boundary meets its own Z-spider via
/// a plain wire.
fn fix_boundaries(g: &mut ZxDiagram) {
    let boundaries: Vec<VertexId> = g.inputs().iter().chain(g.outputs()).copied().collect();
    for b in boundaries {
        let Some(v) = g.boundary_neighbor(b) else { continue };
        let Some(t) = g.edge_type(b, v) else { continue };
        let z = |g: &mut ZxDiagram| g.add_spider(SpiderKind::Z, PhaseExpr::zero());
        if g.is_boundary(v) {
            // Bare wire between two boundaries.
            g.remove_edge(b, v, t);
            let z1 = z(g);
            g.add_edge(b, z1, EdgeType::Plain);
            let mut last = z1;
            // z1 -H- ... -H- z_end, with one more Hadamard for a plain wire.
            let hops = if t == EdgeType::Plain { 2 } else { 1 };
            for _ in 0..hops {
                let next = z(g);
                g.add_edge(last, next, EdgeType::Hadamard);
                last = next;
            }
            g.add_edge(last, v, EdgeType::Plain);
            continue;
        }
        let other_boundaries = g.neighbors(v).filter(|&w| w != b && g.is_boundary(w)).count();
        match t {
            EdgeType::Hadamard => {
                g.remove_edge(b, v, t);
                let z1 = z(g);
                g.add_edge(b, z1, EdgeType::Plain);
                g.add_edge(z1, v, EdgeType::Hadamard);
            }
            EdgeType::Plain if other_boundaries > 0 => {
                g.remove_edge(b, v, t);
                let z1 = z(g);
                let z2 = z(g);
                g.add_edge(b, z1, EdgeType::Plain);
                g.add_edge(z1, z2, EdgeType::Hadamard);
                g.add_edge(z2, v, EdgeType::Hadamard);
            }
            EdgeType::Plain => {}
        }
    }
}
