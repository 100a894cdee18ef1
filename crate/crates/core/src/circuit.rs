//! Gate-level circuits over `{H, Rz, Rx, CNOT, CZ, SWAP}` with symbolic angles.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::diagram::{EdgeType, SpiderKind, VertexId, ZxDiagram};
use crate::error::{Error, Result};
use crate::phase::{PhaseExpr, SymbolId, SymbolKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    Rz(usize, PhaseExpr),
    Rx(usize, PhaseExpr),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
    Swap(usize, usize),
}

impl Gate {
    pub fn wires(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::Rz(q, _) | Gate::Rx(q, _) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Cz(a, b) | Gate::Swap(a, b) => vec![a, b],
        }
    }

    pub fn angle(&self) -> Option<&PhaseExpr> {
        match self {
            Gate::Rz(_, a) | Gate::Rx(_, a) => Some(a),
            _ => None,
        }
    }

    pub fn angle_mut(&mut self) -> Option<&mut PhaseExpr> {
        match self {
            Gate::Rz(_, a) | Gate::Rx(_, a) => Some(a),
            _ => None,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot { .. } | Gate::Cz(..) | Gate::Swap(..))
    }

    /// Rotation whose angle depends on a data-input symbol.
    pub fn is_input_encoding(&self) -> bool {
        self.angle().is_some_and(PhaseExpr::has_input)
    }

    fn to_qasm(&self) -> String {
        match self {
            Gate::H(q) => format!("h q[{q}];"),
            Gate::Rz(q, a) => format!("rz({}) q[{q}];", a.to_qasm()),
            Gate::Rx(q, a) => format!("rx({}) q[{q}];", a.to_qasm()),
            Gate::Cnot { control, target } => format!("cx q[{control}],q[{target}];"),
            Gate::Cz(a, b) => format!("cz q[{a}],q[{b}];"),
            Gate::Swap(a, b) => format!("swap q[{a}],q[{b}];"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitMetrics {
    pub depth: usize,
    pub two_qubit_count: usize,
    pub input_encoding_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCircuit {
    pub qubits: usize,
    pub gates: Vec<Gate>,
}

impl GateCircuit {
    pub fn new(qubits: usize) -> Self {
        GateCircuit { qubits, gates: Vec::new() }
    }

    pub fn push(&mut self, gate: Gate) {
        debug_assert!(self.gate_is_valid(&gate), "bad gate {gate:?}");
        self.gates.push(gate);
    }

    pub fn gate_is_valid(&self, gate: &Gate) -> bool {
        let w = gate.wires();
        w.iter().all(|&q| q < self.qubits) && (w.len() < 2 || w[0] != w[1])
    }

    pub fn validate(&self) -> Result<()> {
        match self.gates.iter().find(|g| !self.gate_is_valid(g)) {
            Some(g) => Err(Error::Malformed(format!("gate {g:?} invalid on {} qubits", self.qubits))),
            None => Ok(()),
        }
    }

    /// Longest path through the gate dependency DAG, one unit per gate.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.qubits];
        for g in &self.gates {
            let wires = g.wires();
            let l = wires.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for q in wires {
                level[q] = l;
            }
        }
        level.into_iter().max().unwrap_or(0)
    }

    /// Cancels adjacent self-inverse pairs and merges adjacent rotations
    /// about the same axis, dropping those that add up to zero.
    pub fn cancel_adjacent(&mut self) {
        let mut out: Vec<Option<Gate>> = Vec::new();
        let mut last: Vec<Vec<usize>> = vec![Vec::new(); self.qubits];
        for gate in std::mem::take(&mut self.gates) {
            let mut wires = gate.wires();
            wires.sort_unstable();
            let prev = last[wires[0]].last().copied().filter(|&i| {
                let mut pw = out[i].as_ref().expect("live gate").wires();
                pw.sort_unstable();
                pw == wires && wires.iter().all(|&w| last[w].last() == Some(&i))
            });
            if let Some(i) = prev {
                let p = out[i].take().expect("live gate");
                let merged = match (p, &gate) {
                    (Gate::H(_), Gate::H(_)) | (Gate::Cz(..), Gate::Cz(..)) | (Gate::Swap(..), Gate::Swap(..)) => None,
                    (Gate::Cnot { control: a, .. }, Gate::Cnot { control: b, .. }) if a == *b => None,
                    (Gate::Rz(q, a), Gate::Rz(_, b)) => Some(Gate::Rz(q, a + b.clone())),
                    (Gate::Rx(q, a), Gate::Rx(_, b)) => Some(Gate::Rx(q, a + b.clone())),
                    (p, _) => {
                        out[i] = Some(p);
                        for &w in &wires {
                            last[w].push(out.len());
                        }
                        out.push(Some(gate));
                        continue;
                    }
                };
                match merged {
                    Some(g) if !g.angle().is_some_and(|a| a.is_zero()) => out[i] = Some(g),
                    _ => {
                        for &w in &wires {
                            last[w].pop();
                        }
                    }
                }
                continue;
            }
            for &w in &wires {
                last[w].push(out.len());
            }
            out.push(Some(gate));
        }
        self.gates = out.into_iter().flatten().collect();
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn input_encoding_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_input_encoding()).count()
    }

    pub fn metrics(&self) -> CircuitMetrics {
        CircuitMetrics {
            depth: self.depth(),
            two_qubit_count: self.two_qubit_count(),
            input_encoding_count: self.input_encoding_count(),
        }
    }

    pub fn symbols(&self) -> BTreeSet<SymbolId> {
        self.gates.iter().filter_map(Gate::angle).flat_map(|a| a.symbols()).collect()
    }

    pub fn trainable_symbols(&self) -> Vec<SymbolId> {
        self.symbols().into_iter().filter(|s| s.kind == SymbolKind::Trainable).collect()
    }

    /// The circuit-like diagram of this circuit: Rz/Rx become Z/X spiders,
    /// CNOT a Z-X pair, CZ a Hadamard-joined Z pair, H toggles the type of the
    /// next wire segment, SWAP exchanges wire ends.
    pub fn to_diagram(&self) -> ZxDiagram {
        let mut d = ZxDiagram::new();
        let mut last: Vec<(VertexId, EdgeType)> =
            (0..self.qubits).map(|_| (d.add_input(), EdgeType::Plain)).collect();
        let place = |d: &mut ZxDiagram, last: &mut Vec<(VertexId, EdgeType)>, q: usize, kind, phase| {
            let v = d.add_spider(kind, phase);
            let (prev, t) = last[q];
            d.add_edge(prev, v, t);
            last[q] = (v, EdgeType::Plain);
            v
        };
        for g in &self.gates {
            match g {
                Gate::H(q) => last[*q].1 = last[*q].1.toggled(),
                Gate::Rz(q, a) => {
                    place(&mut d, &mut last, *q, SpiderKind::Z, a.clone());
                }
                Gate::Rx(q, a) => {
                    place(&mut d, &mut last, *q, SpiderKind::X, a.clone());
                }
                Gate::Cnot { control, target } => {
                    let c = place(&mut d, &mut last, *control, SpiderKind::Z, PhaseExpr::zero());
                    let t = place(&mut d, &mut last, *target, SpiderKind::X, PhaseExpr::zero());
                    d.add_edge(c, t, EdgeType::Plain);
                }
                Gate::Cz(a, b) => {
                    let u = place(&mut d, &mut last, *a, SpiderKind::Z, PhaseExpr::zero());
                    let v = place(&mut d, &mut last, *b, SpiderKind::Z, PhaseExpr::zero());
                    d.add_edge(u, v, EdgeType::Hadamard);
                }
                Gate::Swap(a, b) => last.swap(*a, *b),
            }
        }
        for (v, t) in last {
            let o = d.add_output();
            d.add_edge(v, o, t);
        }
        d
    }

    pub fn to_qasm(&self) -> String {
        let mut out = String::new();
        out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
        let _ = writeln!(out, "qreg q[{}];", self.qubits);
        for g in &self.gates {
            out.push_str(&g.to_qasm());
            out.push('\n');
        }
        out
    }

    /// Parses the subset of OpenQASM 2.0 written by [`GateCircuit::to_qasm`].
    pub fn from_qasm(text: &str) -> Result<Self> {
        let mut qubits: Option<usize> = None;
        let mut gates = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split("//").next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with("OPENQASM") || line.starts_with("include") {
                continue;
            }
            let err = |msg: &str| Error::Parse(format!("line {}: {msg}: `{line}`", lineno + 1));
            let stmt = line.strip_suffix(';').ok_or_else(|| err("missing `;`"))?.trim();
            if let Some(rest) = stmt.strip_prefix("qreg") {
                let n = parse_qubit_ref(rest.trim()).ok_or_else(|| err("bad qreg"))?;
                qubits = Some(n);
                continue;
            }
            let (head, args) = if stmt.contains('(') {
                let close = stmt.rfind(')').ok_or_else(|| err("unbalanced parenthesis"))?;
                (&stmt[..=close], stmt[close + 1..].trim())
            } else {
                stmt.split_once(char::is_whitespace).ok_or_else(|| err("missing operands"))?
            };
            let operands: Vec<usize> = args
                .split(',')
                .map(|a| parse_qubit_ref(a.trim()))
                .collect::<Option<_>>()
                .ok_or_else(|| err("bad operand"))?;
            let (name, angle) = match head.split_once('(') {
                Some((name, rest)) => {
                    let inner = rest.strip_suffix(')').ok_or_else(|| err("unbalanced parenthesis"))?;
                    (name.trim(), Some(PhaseExpr::parse_qasm(inner)?))
                }
                None => (head.trim(), None),
            };
            let gate = match (name, angle, operands.as_slice()) {
                ("h", None, &[q]) => Gate::H(q),
                ("rz", Some(a), &[q]) => Gate::Rz(q, a),
                ("rx", Some(a), &[q]) => Gate::Rx(q, a),
                ("cx", None, &[c, t]) => Gate::Cnot { control: c, target: t },
                ("cz", None, &[a, b]) => Gate::Cz(a, b),
                ("swap", None, &[a, b]) => Gate::Swap(a, b),
                _ => return Err(err("unsupported statement")),
            };
            gates.push(gate);
        }
        let qubits = qubits.ok_or_else(|| Error::Parse("missing qreg declaration".into()))?;
        let c = GateCircuit { qubits, gates };
        c.validate()?;
        Ok(c)
    }
}

fn parse_qubit_ref(s: &str) -> Option<usize> {
    let inner = s.strip_prefix("q[")?.strip_suffix(']')?;
    inner.trim().parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::SymbolId;

    fn sample() -> GateCircuit {
        let mut c = GateCircuit::new(3);
        c.push(Gate::H(0));
        c.push(Gate::Rz(1, PhaseExpr::symbol(SymbolId::input(0))));
        c.push(Gate::Cnot { control: 0, target: 1 });
        c.push(Gate::Rx(2, PhaseExpr::symbol(SymbolId::trainable(0)) + PhaseExpr::pi_frac(1, 4)));
        c.push(Gate::Cz(1, 2));
        c.push(Gate::Swap(0, 2));
        c
    }

    #[test]
    fn metrics_follow_dependency_depth() {
        let c = sample();
        // Layers: {H0, Rz1, Rx2}, {CX01}, {CZ12}, {SWAP02}.
        assert_eq!(c.depth(), 4);
        assert_eq!(c.two_qubit_count(), 3);
        assert_eq!(c.input_encoding_count(), 1);
        assert_eq!(GateCircuit::new(2).metrics(), CircuitMetrics::default());
    }

    #[test]
    fn depth_ignores_commuting_reorders() {
        let c = sample();
        let mut reordered = c.clone();
        reordered.gates.swap(0, 1);
        reordered.gates.swap(1, 3);
        assert_eq!(reordered.metrics(), c.metrics());
    }

    #[test]
    fn qasm_round_trip() {
        let c = sample();
        let text = c.to_qasm();
        assert!(text.contains("rx(pi*1/4 + (1/1)*t0) q[2];"));
        assert_eq!(GateCircuit::from_qasm(&text).unwrap(), c);
    }

    #[test]
    fn qasm_errors() {
        assert!(GateCircuit::from_qasm("h q[0];").is_err());
        assert!(GateCircuit::from_qasm("qreg q[1];\ncx q[0],q[0];").is_err());
        assert!(GateCircuit::from_qasm("qreg q[2];\nfoo q[0];").is_err());
        assert!(GateCircuit::from_qasm("qreg q[2];\nh q[0]").is_err());
    }

    #[test]
    fn diagram_of_circuit_has_matching_boundaries() {
        let d = sample().to_diagram();
        assert_eq!(d.inputs().len(), 3);
        assert_eq!(d.outputs().len(), 3);
        d.validate().unwrap();
    }

    #[test]
    fn adjacent_inverses_cancel() {
        let mut c = GateCircuit::new(2);
        for g in [
            Gate::H(0),
            Gate::Rz(1, PhaseExpr::pi_frac(1, 4)),
            Gate::Cnot { control: 0, target: 1 },
            Gate::Cnot { control: 0, target: 1 },
            Gate::Rz(1, PhaseExpr::pi_frac(7, 4)),
            Gate::H(0),
            Gate::Cz(0, 1),
            Gate::Cnot { control: 1, target: 0 },
        ] {
            c.push(g);
        }
        c.cancel_adjacent();
        assert_eq!(c.gates, vec![Gate::Cz(0, 1), Gate::Cnot { control: 1, target: 0 }]);
    }

    #[test]
    fn cancellation_respects_blocking_gates() {
        let mut c = GateCircuit::new(2);
        for g in [Gate::H(0), Gate::Cnot { control: 0, target: 1 }, Gate::H(0), Gate::Cnot { control: 1, target: 0 }] {
            c.push(g);
        }
        let before = c.clone();
        c.cancel_adjacent();
        assert_eq!(c, before);
    }
}
