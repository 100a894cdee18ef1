//! Circuit extraction from graph-like diagrams.
//!
//! Works backwards from the outputs. The frontier is the set of spiders
//! wired to outputs; each round pulls frontier phases out as `Rz`,
//! frontier-frontier edges as `CZ`, then row-reduces the frontier's
//! biadjacency to its neighbours over GF(2), emitting one CNOT per row
//! addition. Any frontier spider left with a single neighbour is replaced by
//! that neighbour behind an `H`. When every frontier spider touches only its
//! input, the remaining wiring is a permutation with optional Hadamards.

use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateCircuit};
use crate::diagram::{EdgeType, SpiderKind, VertexId, ZxDiagram};
use crate::error::{Error, Result};
use crate::gf2::Gf2Matrix;
use crate::phase::PhaseExpr;
use crate::rewrite::to_graph_like;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionStats {
    pub cnot_count: usize,
    pub cz_count: usize,
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionResult {
    pub circuit: GateCircuit,
    pub stats: ExtractionStats,
}

/// Extracts an equivalent gate circuit from a graph-like diagram with equal
/// input and output counts.
pub fn extract_circuit(diagram: &ZxDiagram) -> Result<ExtractionResult> {
    if let Some(why) = diagram.graph_like_violation() {
        return Err(Error::NotGraphLike(why));
    }
    let n = diagram.outputs().len();
    if diagram.inputs().len() != n {
        return Err(Error::ArityMismatch(format!(
            "{} inputs, {} outputs",
            diagram.inputs().len(),
            n
        )));
    }
    let mut g = diagram.clone();
    let outputs = g.outputs().to_vec();
    let inputs = g.inputs().to_vec();
    let mut frontier: Vec<VertexId> = outputs
        .iter()
        .map(|&o| g.boundary_neighbor(o).expect("graph-like outputs are wired"))
        .collect();
    let mut done = vec![false; n];
    // Gates in reverse order: the first entry acts last.
    let mut rev: Vec<Gate> = Vec::new();

    let nv = g.num_spiders();
    let max_rounds = nv * (nv + 2) + 1;
    let mut rounds = 0;
    loop {
        rounds += 1;
        if rounds > max_rounds {
            return Err(Error::NoGflow("extraction did not terminate".into()));
        }
        for q in 0..n {
            let v = frontier[q];
            if !g.phase(v).is_zero() {
                rev.push(Gate::Rz(q, g.phase(v).clone()));
                g.set_phase(v, PhaseExpr::zero());
            }
        }
        for q1 in 0..n {
            for q2 in q1 + 1..n {
                let (a, b) = (frontier[q1], frontier[q2]);
                if g.connected(a, b) {
                    debug_assert_eq!(g.edge_type(a, b), Some(EdgeType::Hadamard));
                    g.remove_edges_between(a, b);
                    rev.push(Gate::Cz(q1, q2));
                }
            }
        }
        // Frontier spiders touching an input are either finished, or get a
        // fresh spider between them and the input so the input behaves like
        // any other neighbour.
        for q in 0..n {
            if done[q] {
                continue;
            }
            let v = frontier[q];
            let Some(b) = g.neighbors(v).find(|&w| g.kind(w) == SpiderKind::BoundaryIn) else {
                continue;
            };
            let others = g.neighbors(v).filter(|&w| w != b && w != outputs[q]).count();
            if others == 0 {
                done[q] = true;
                continue;
            }
            let t = g.edge_type(v, b).expect("single input wire");
            g.remove_edge(v, b, t);
            let w = g.add_spider(SpiderKind::Z, PhaseExpr::zero());
            g.add_edge(b, w, t.toggled());
            g.add_edge(w, v, EdgeType::Hadamard);
        }
        let active: Vec<usize> = (0..n).filter(|&q| !done[q]).collect();
        if active.is_empty() {
            break;
        }
        let mut nbrs: Vec<VertexId> = active
            .iter()
            .flat_map(|&q| g.neighbors(frontier[q]).collect::<Vec<_>>())
            .filter(|&w| !g.is_boundary(w))
            .collect();
        nbrs.sort_unstable();
        nbrs.dedup();
        if nbrs.is_empty() {
            return Err(Error::NoGflow("frontier spider with no way back to an input".into()));
        }
        let mut m = Gf2Matrix::from_fn(active.len(), nbrs.len(), |r, c| {
            g.connected(frontier[active[r]], nbrs[c])
        });
        let mut ops = Vec::new();
        m.gauss_reduce(|src, dst| ops.push((src, dst)));
        for &(src, dst) in &ops {
            // Adding row `src` into row `dst` is a CNOT controlled by `dst`.
            rev.push(Gate::Cnot { control: active[dst], target: active[src] });
        }
        if !ops.is_empty() {
            for (r, &q) in active.iter().enumerate() {
                let v = frontier[q];
                for (c, &w) in nbrs.iter().enumerate() {
                    if m.get(r, c) != g.connected(v, w) {
                        g.toggle_hadamard(v, w);
                    }
                }
            }
        }
        let mut progressed = false;
        for (r, &q) in active.iter().enumerate() {
            if m.row_weight(r) != 1 {
                continue;
            }
            let w = nbrs[m.row_ones(r)[0]];
            let v = frontier[q];
            rev.push(Gate::H(q));
            g.remove_spider(v);
            g.add_edge(outputs[q], w, EdgeType::Plain);
            frontier[q] = w;
            progressed = true;
        }
        if !progressed {
            return Err(Error::NoGflow("no frontier spider can be extracted".into()));
        }
    }

    if g.interior().count() != n {
        return Err(Error::NoGflow("diagram has parts not connected to the outputs".into()));
    }
    // perm[p] = output qubit fed by input p.
    let mut perm = vec![usize::MAX; n];
    let mut prefix = Vec::new();
    for q in 0..n {
        let v = frontier[q];
        let b = g
            .neighbors(v)
            .find(|&w| g.kind(w) == SpiderKind::BoundaryIn)
            .expect("finished frontier touches an input");
        let p = inputs.iter().position(|&i| i == b).expect("known input");
        perm[p] = q;
        if g.edge_type(v, b) == Some(EdgeType::Hadamard) {
            prefix.push(Gate::H(p));
        }
    }
    // Content of wire p must end on wire perm[p].
    let mut holds: Vec<usize> = (0..n).collect();
    let mut inverse = vec![0; n];
    for (p, &q) in perm.iter().enumerate() {
        inverse[q] = p;
    }
    for q in 0..n {
        let want = inverse[q];
        let w = holds.iter().position(|&c| c == want).expect("present");
        if w != q {
            holds.swap(w, q);
            prefix.push(Gate::Swap(w, q));
        }
    }

    let mut circuit = GateCircuit::new(n);
    circuit.gates = prefix;
    circuit.gates.extend(rev.into_iter().rev());
    circuit.cancel_adjacent();
    let stats = ExtractionStats {
        cnot_count: circuit.gates.iter().filter(|g| matches!(g, Gate::Cnot { .. })).count(),
        cz_count: circuit.gates.iter().filter(|g| matches!(g, Gate::Cz(..))).count(),
        depth: circuit.depth(),
    };
    Ok(ExtractionResult { circuit, stats })
}

/// Normalizes and extracts `diagram`; the result of a successful mutation.
pub fn extract_any(diagram: &ZxDiagram) -> Result<ExtractionResult> {
    extract_circuit(&to_graph_like(diagram))
}

/// True iff the graph-like form of `diagram` can be extracted to a circuit.
pub fn check_valid(diagram: &ZxDiagram) -> bool {
    diagram.validate().is_ok() && extract_any(diagram).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateCircuit;
    use crate::contract::contract;
    use crate::phase::Binding;
    use crate::sim::circuit_matrix;

    fn assert_extracts_to_same_map(d: &ZxDiagram) -> GateCircuit {
        let g = to_graph_like(d);
        let r = extract_circuit(&g).unwrap();
        let b = Binding::new();
        let want = contract(d, &b).unwrap();
        let got = circuit_matrix(&r.circuit, &b).unwrap();
        assert!(want.equal_up_to_scalar(&got, 1e-9), "{:?}", r.circuit);
        r.circuit
    }

    #[test]
    fn identity_extracts_to_nothing() {
        let r = extract_circuit(&to_graph_like(&ZxDiagram::identity(3))).unwrap();
        assert!(r.circuit.gates.is_empty());
    }

    #[test]
    fn single_gates_round_trip() {
        let gates = [
            Gate::Cnot { control: 0, target: 1 },
            Gate::Cnot { control: 1, target: 0 },
            Gate::Cz(0, 1),
            Gate::H(1),
            Gate::Swap(0, 1),
            Gate::Rz(0, PhaseExpr::pi_frac(1, 4)),
            Gate::Rx(1, PhaseExpr::pi_frac(3, 4)),
        ];
        for gate in gates {
            let mut c = GateCircuit::new(2);
            c.push(gate);
            assert_extracts_to_same_map(&c.to_diagram());
        }
    }

    #[test]
    fn non_graph_like_and_mismatched_inputs_are_rejected() {
        let mut c = GateCircuit::new(2);
        c.push(Gate::Cnot { control: 0, target: 1 });
        assert!(matches!(extract_circuit(&c.to_diagram()), Err(Error::NotGraphLike(_))));

        let mut d = to_graph_like(&ZxDiagram::identity(2));
        let extra = d.add_input();
        let z = d.add_spider(SpiderKind::Z, PhaseExpr::zero());
        d.add_edge(extra, z, EdgeType::Plain);
        assert!(d.is_graph_like());
        assert!(matches!(extract_circuit(&d), Err(Error::ArityMismatch(_))));
    }

    #[test]
    fn floating_spider_fails() {
        let mut d = to_graph_like(&ZxDiagram::identity(1));
        d.add_spider(SpiderKind::Z, PhaseExpr::pi_frac(1, 3));
        assert!(matches!(extract_circuit(&d), Err(Error::NoGflow(_))));
        assert!(!check_valid(&d));
    }
}
