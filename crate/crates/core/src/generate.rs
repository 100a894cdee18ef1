//! Random circuit-like diagrams with parameterized phases.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateCircuit};
use crate::diagram::ZxDiagram;
use crate::phase::{PhaseExpr, SymbolId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    /// CNOT, Hadamard and `k pi / 4` phase gates.
    CnotHadPhase,
    /// Clifford gates: H, `k pi / 2` phases, CNOT and CZ.
    Cliffords,
    CnotOnly,
}

impl Generator {
    pub const ALL: [Generator; 3] = [Generator::CnotHadPhase, Generator::Cliffords, Generator::CnotOnly];
}

/// Probabilities with which each constant phase is replaced by a fresh
/// trainable symbol or a fresh input symbol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbConfig {
    pub trainable: f64,
    pub input: f64,
}

impl ProbConfig {
    pub const NONE: ProbConfig = ProbConfig { trainable: 0.0, input: 0.0 };
    pub const ALWAYS_TRAINABLE: ProbConfig = ProbConfig { trainable: 1.0, input: 0.0 };

    /// Parameterize with probability `p`, split evenly between the kinds.
    pub fn uniform(p: f64) -> Self {
        ProbConfig { trainable: p / 2.0, input: p / 2.0 }
    }
}

const P_HAD: f64 = 0.2;
const P_PHASE: f64 = 0.3;

/// A random gate list of `depth` gates. The phases of rotation gates are
/// constant multiples of pi at this stage.
pub fn random_circuit<R: Rng + ?Sized>(
    generator: Generator,
    qubits: usize,
    depth: usize,
    rng: &mut R,
) -> GateCircuit {
    assert!(qubits >= 1 && depth >= 1, "qubits and depth must be positive");
    let mut c = GateCircuit::new(qubits);
    let pair = |rng: &mut R| {
        let mut qs: Vec<usize> = (0..qubits).collect();
        qs.partial_shuffle(rng, 2);
        (qs[0], qs[1])
    };
    for _ in 0..depth {
        let q = rng.gen_range(0..qubits);
        let gate = match generator {
            Generator::CnotOnly => {
                if qubits < 2 {
                    continue;
                }
                let (control, target) = pair(rng);
                Gate::Cnot { control, target }
            }
            // A single wire has no CNOT to draw, and a lone Hadamard there
            // would leave no spider to parameterize, so only phases are drawn.
            Generator::CnotHadPhase if qubits == 1 => Gate::Rz(q, PhaseExpr::pi_frac(rng.gen_range(1..8), 4)),
            Generator::CnotHadPhase => {
                let r: f64 = rng.gen();
                if r < P_HAD {
                    Gate::H(q)
                } else if r < P_HAD + P_PHASE {
                    Gate::Rz(q, PhaseExpr::pi_frac(rng.gen_range(1..8), 4))
                } else {
                    let (control, target) = pair(rng);
                    Gate::Cnot { control, target }
                }
            }
            Generator::Cliffords => {
                let choices = if qubits >= 2 { 4 } else { 2 };
                match rng.gen_range(0..choices) {
                    0 => Gate::H(q),
                    1 => Gate::Rz(q, PhaseExpr::pi_frac(rng.gen_range(1..4), 2)),
                    2 => {
                        let (control, target) = pair(rng);
                        Gate::Cnot { control, target }
                    }
                    _ => {
                        let (a, b) = pair(rng);
                        Gate::Cz(a, b)
                    }
                }
            }
        };
        c.push(gate);
    }
    c
}

/// Replaces each constant rotation phase of `circuit` by a fresh symbol
/// according to `probs`. Symbol indices count up from zero per kind.
pub fn parameterize<R: Rng + ?Sized>(circuit: &mut GateCircuit, probs: ProbConfig, rng: &mut R) {
    let (mut next_t, mut next_x) = (0u32, 0u32);
    for g in &mut circuit.gates {
        let Some(angle) = g.angle_mut() else { continue };
        let r: f64 = rng.gen();
        if r < probs.trainable {
            *angle = PhaseExpr::symbol(SymbolId::trainable(next_t));
            next_t += 1;
        } else if r < probs.trainable + probs.input {
            *angle = PhaseExpr::symbol(SymbolId::input(next_x));
            next_x += 1;
        }
    }
}

/// A random circuit-like diagram from `generator`, with phases parameterized
/// according to `probs`.
pub fn random_diagram<R: Rng + ?Sized>(
    generator: Generator,
    qubits: usize,
    depth: usize,
    probs: ProbConfig,
    rng: &mut R,
) -> ZxDiagram {
    let mut c = random_circuit(generator, qubits, depth, rng);
    parameterize(&mut c, probs, rng);
    c.to_diagram()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::SpiderKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cnot_only_has_only_cnots() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = random_circuit(Generator::CnotOnly, 2, 4, &mut rng);
        assert_eq!(c.gates.len(), 4);
        assert!(c.gates.iter().all(|g| matches!(g, Gate::Cnot { .. })));
    }

    #[test]
    fn smallest_instance_is_one_trainable_spider() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = random_diagram(Generator::CnotHadPhase, 1, 1, ProbConfig::ALWAYS_TRAINABLE, &mut rng);
        let spiders: Vec<_> = d.interior().collect();
        assert_eq!(spiders.len(), 1);
        assert_eq!(d.kind(spiders[0]), SpiderKind::Z);
        assert_eq!(d.phase(spiders[0]), &PhaseExpr::symbol(SymbolId::trainable(0)));
    }

    #[test]
    fn parameterization_uses_fresh_symbols() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut c = random_circuit(Generator::Cliffords, 3, 40, &mut rng);
        let rotations = c.gates.iter().filter(|g| g.angle().is_some()).count();
        parameterize(&mut c, ProbConfig::uniform(1.0), &mut rng);
        assert_eq!(c.symbols().len(), rotations);
    }
}
