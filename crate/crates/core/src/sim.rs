//! Dense statevector simulation of gate circuits.
//!
//! Predictions are `<Z>` on qubit 0 after running the circuit on `|0...0>`,
//! with every input symbol bound to the data point `x`. Gradients with
//! respect to trainable symbols use the adjoint method: one forward pass,
//! then a backward sweep that un-applies gates to both the state and the
//! co-state.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateCircuit};
use crate::contract::SemanticMatrix;
use crate::error::{Error, Result};
use crate::phase::{rational_to_f64, Binding, PhaseExpr, SymbolId, SymbolKind};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Op {
    H,
    Rz,
    Rx,
    Cnot,
    Cz,
    Swap,
}

/// Rotation angle as `constant + sum params[i] * k + x * input_coeff`, in radians.
#[derive(Clone, Debug, Default)]
struct Angle {
    constant: f64,
    params: Vec<(usize, f64)>,
    input_coeff: f64,
}

impl Angle {
    fn value(&self, params: &[f64], x: f64) -> f64 {
        self.constant
            + self.params.iter().map(|&(i, k)| params[i] * k).sum::<f64>()
            + self.input_coeff * x
    }
}

#[derive(Clone, Debug)]
struct CompiledGate {
    op: Op,
    a: usize,
    b: usize,
    angle: Angle,
}

/// A circuit lowered to numeric form with trainable symbols indexed densely.
#[derive(Clone, Debug)]
pub struct CompiledCircuit {
    qubits: usize,
    gates: Vec<CompiledGate>,
    params: Vec<SymbolId>,
}

impl CompiledCircuit {
    pub fn new(circuit: &GateCircuit) -> Self {
        let params = circuit.trainable_symbols();
        let index: BTreeMap<SymbolId, usize> =
            params.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let lower = |phase: &PhaseExpr| {
            let mut angle = Angle {
                constant: std::f64::consts::PI * rational_to_f64(phase.constant()),
                ..Angle::default()
            };
            for (id, k) in phase.terms() {
                let k = rational_to_f64(*k) * id.angle_scale();
                match id.kind {
                    SymbolKind::Trainable => angle.params.push((index[id], k)),
                    SymbolKind::Input => angle.input_coeff += k,
                }
            }
            angle
        };
        let gates = circuit
            .gates
            .iter()
            .map(|g| match g {
                Gate::H(q) => CompiledGate { op: Op::H, a: *q, b: 0, angle: Angle::default() },
                Gate::Rz(q, p) => CompiledGate { op: Op::Rz, a: *q, b: 0, angle: lower(p) },
                Gate::Rx(q, p) => CompiledGate { op: Op::Rx, a: *q, b: 0, angle: lower(p) },
                Gate::Cnot { control, target } => {
                    CompiledGate { op: Op::Cnot, a: *control, b: *target, angle: Angle::default() }
                }
                Gate::Cz(a, b) => CompiledGate { op: Op::Cz, a: *a, b: *b, angle: Angle::default() },
                Gate::Swap(a, b) => {
                    CompiledGate { op: Op::Swap, a: *a, b: *b, angle: Angle::default() }
                }
            })
            .collect();
        CompiledCircuit { qubits: circuit.qubits, gates, params }
    }

    pub fn params(&self) -> &[SymbolId] {
        &self.params
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    /// Parameter vector from a binding, in `params()` order.
    pub fn param_vector(&self, binding: &Binding) -> Result<Vec<f64>> {
        self.params
            .iter()
            .map(|s| binding.get(s).copied().ok_or(Error::UnboundSymbol(*s)))
            .collect()
    }

    pub fn binding_of(&self, params: &[f64]) -> Binding {
        self.params.iter().copied().zip(params.iter().copied()).collect()
    }

    fn zero_state(&self) -> Vec<Complex64> {
        let mut psi = vec![ZERO; 1 << self.qubits];
        psi[0] = Complex64::new(1.0, 0.0);
        psi
    }

    fn run(&self, psi: &mut [Complex64], params: &[f64], x: f64) {
        for g in &self.gates {
            apply(psi, g, g.angle.value(params, x), false);
        }
    }

    /// `<Z_0>` for the given parameters and data point.
    pub fn expectation(&self, params: &[f64], x: f64) -> f64 {
        let mut psi = self.zero_state();
        self.run(&mut psi, params, x);
        z0_expectation(&psi)
    }

    /// `<Z_0>`, with its gradient with respect to every parameter written to `grad`.
    fn expectation_with_grad(&self, params: &[f64], x: f64, grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut psi = self.zero_state();
        let angles: Vec<f64> = self.gates.iter().map(|g| g.angle.value(params, x)).collect();
        for (g, &theta) in self.gates.iter().zip(&angles) {
            apply(&mut psi, g, theta, false);
        }
        let value = z0_expectation(&psi);
        let mut lambda: Vec<Complex64> = psi
            .iter()
            .enumerate()
            .map(|(i, &a)| if i & 1 == 0 { a } else { -a })
            .collect();
        let mut scratch = vec![ZERO; psi.len()];
        for (g, &theta) in self.gates.iter().zip(&angles).rev() {
            if !g.angle.params.is_empty() {
                // d/dtheta of exp(-i theta P / 2) is (-i/2) P U, so the
                // derivative of <Z> is Im <lambda| P psi>.
                scratch.copy_from_slice(&psi);
                apply_pauli(&mut scratch, g.op, g.a);
                let overlap: Complex64 =
                    lambda.iter().zip(&scratch).map(|(l, s)| l.conj() * s).sum();
                let d = overlap.im;
                for &(i, k) in &g.angle.params {
                    grad[i] += d * k;
                }
            }
            apply(&mut psi, g, theta, true);
            apply(&mut lambda, g, theta, true);
        }
        value
    }

    /// Mean squared error over `data`.
    pub fn loss(&self, params: &[f64], data: &Dataset) -> f64 {
        let n = data.points.len() as f64;
        data.points
            .iter()
            .map(|&(x, y)| {
                let r = self.expectation(params, x) - y;
                r * r
            })
            .sum::<f64>()
            / n
    }

    /// Mean squared error and its gradient.
    pub fn loss_and_grad(&self, params: &[f64], data: &Dataset) -> (f64, Vec<f64>) {
        let n = data.points.len() as f64;
        let mut grad = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        let mut g = vec![0.0; self.params.len()];
        for &(x, y) in &data.points {
            if self.params.is_empty() {
                let r = self.expectation(params, x) - y;
                loss += r * r;
                continue;
            }
            let f = self.expectation_with_grad(params, x, &mut g);
            let r = f - y;
            loss += r * r;
            for (acc, gi) in grad.iter_mut().zip(&g) {
                *acc += 2.0 * r * gi / n;
            }
        }
        (loss / n, grad)
    }

    /// Dense unitary with input symbols bound to `x`.
    pub fn unitary(&self, params: &[f64], x: f64) -> DMatrix<Complex64> {
        let dim = 1usize << self.qubits;
        let mut u = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut psi = vec![ZERO; dim];
            psi[col] = Complex64::new(1.0, 0.0);
            self.run(&mut psi, params, x);
            for (row, a) in psi.into_iter().enumerate() {
                u[(row, col)] = a;
            }
        }
        u
    }
}

fn z0_expectation(psi: &[Complex64]) -> f64 {
    psi.iter()
        .enumerate()
        .map(|(i, a)| if i & 1 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum()
}

fn apply_pauli(psi: &mut [Complex64], op: Op, q: usize) {
    let bit = 1usize << q;
    match op {
        Op::Rz => {
            for (i, a) in psi.iter_mut().enumerate() {
                if i & bit != 0 {
                    *a = -*a;
                }
            }
        }
        Op::Rx => {
            for i in 0..psi.len() {
                if i & bit == 0 {
                    psi.swap(i, i | bit);
                }
            }
        }
        _ => unreachable!("only rotations carry parameters"),
    }
}

/// Applies a gate (or its inverse) in place. Qubit `q` is bit `q` of the index.
fn apply(psi: &mut [Complex64], g: &CompiledGate, theta: f64, inverse: bool) {
    let n = psi.len();
    match g.op {
        Op::H => {
            let bit = 1usize << g.a;
            let h = FRAC_1_SQRT_2;
            for i in 0..n {
                if i & bit == 0 {
                    let (a0, a1) = (psi[i], psi[i | bit]);
                    psi[i] = (a0 + a1) * h;
                    psi[i | bit] = (a0 - a1) * h;
                }
            }
        }
        Op::Rz => {
            let bit = 1usize << g.a;
            let t = if inverse { -theta } else { theta };
            let p0 = Complex64::from_polar(1.0, -t / 2.0);
            let p1 = Complex64::from_polar(1.0, t / 2.0);
            for (i, a) in psi.iter_mut().enumerate() {
                *a *= if i & bit == 0 { p0 } else { p1 };
            }
        }
        Op::Rx => {
            let bit = 1usize << g.a;
            let t = if inverse { -theta } else { theta };
            let c = Complex64::new((t / 2.0).cos(), 0.0);
            let s = Complex64::new(0.0, -(t / 2.0).sin());
            for i in 0..n {
                if i & bit == 0 {
                    let (a0, a1) = (psi[i], psi[i | bit]);
                    psi[i] = c * a0 + s * a1;
                    psi[i | bit] = s * a0 + c * a1;
                }
            }
        }
        Op::Cnot => {
            let (cb, tb) = (1usize << g.a, 1usize << g.b);
            for i in 0..n {
                if i & cb != 0 && i & tb == 0 {
                    psi.swap(i, i | tb);
                }
            }
        }
        Op::Cz => {
            let mask = (1usize << g.a) | (1usize << g.b);
            for (i, a) in psi.iter_mut().enumerate() {
                if i & mask == mask {
                    *a = -*a;
                }
            }
        }
        Op::Swap => {
            let (ab, bb) = (1usize << g.a, 1usize << g.b);
            for i in 0..n {
                if i & ab != 0 && i & bb == 0 {
                    psi.swap(i, (i & !ab) | bb);
                }
            }
        }
    }
}

/// Regression data: strictly increasing `x` in `[0, 1]`, `y` in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub points: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    x: f64,
    y: f64,
}

impl Dataset {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::ConfigInvalid("dataset is empty".into()));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::ConfigInvalid("dataset x values must increase".into()));
            }
        }
        for &(x, y) in &points {
            if !(0.0..=1.0).contains(&x) || !(-1.0..=1.0).contains(&y) {
                return Err(Error::ConfigInvalid(format!("point ({x}, {y}) out of range")));
            }
        }
        Ok(Dataset { points })
    }

    /// `n` equidistant samples of `f` on `[0, 1]`, endpoints included.
    pub fn sample(f: impl Fn(f64) -> f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::ConfigInvalid("need at least two sample points".into()));
        }
        let points = (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                (x, f(x))
            })
            .collect();
        Dataset::new(points)
    }

    /// Variance of `y`: the loss of the best constant predictor.
    pub fn variance(&self) -> f64 {
        let n = self.points.len() as f64;
        let mean = self.points.iter().map(|p| p.1).sum::<f64>() / n;
        self.points.iter().map(|p| (p.1 - mean).powi(2)).sum::<f64>() / n
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
        let mut points = Vec::new();
        for row in reader.deserialize::<CsvRow>() {
            let row = row.map_err(|e| Error::Parse(e.to_string()))?;
            points.push((row.x, row.y));
        }
        Dataset::new(points)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for &(x, y) in &self.points {
            w.serialize(CsvRow { x, y }).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
    }
}

/// `<Z_0>` of `circuit` on `|0...0>` with inputs bound to `x`.
pub fn simulate(circuit: &GateCircuit, binding: &Binding, x: f64) -> Result<f64> {
    let c = CompiledCircuit::new(circuit);
    let params = c.param_vector(binding)?;
    Ok(c.expectation(&params, x))
}

/// Exact gradient of the mean squared error over `data` with respect to
/// every trainable symbol.
pub fn gradient(
    circuit: &GateCircuit,
    binding: &Binding,
    data: &Dataset,
) -> Result<BTreeMap<SymbolId, f64>> {
    let c = CompiledCircuit::new(circuit);
    let params = c.param_vector(binding)?;
    let (_, grad) = c.loss_and_grad(&params, data);
    Ok(c.params.iter().copied().zip(grad).collect())
}

/// Mean squared error over `data`.
pub fn mse(circuit: &GateCircuit, binding: &Binding, data: &Dataset) -> Result<f64> {
    let c = CompiledCircuit::new(circuit);
    let params = c.param_vector(binding)?;
    Ok(c.loss(&params, data))
}

/// The circuit unitary as a semantic matrix, for comparison with diagrams.
/// Every symbol, inputs included, takes its value from `binding`.
pub fn circuit_matrix(circuit: &GateCircuit, binding: &Binding) -> Result<SemanticMatrix> {
    let mut lowered = CompiledCircuit::new(&GateCircuit { qubits: circuit.qubits, gates: vec![] });
    for g in &circuit.gates {
        let theta = match g.angle() {
            Some(a) => a.eval(binding)?,
            None => 0.0,
        };
        let stripped = match g {
            Gate::Rz(q, _) => Gate::Rz(*q, PhaseExpr::zero()),
            Gate::Rx(q, _) => Gate::Rx(*q, PhaseExpr::zero()),
            other => other.clone(),
        };
        let single = GateCircuit { qubits: circuit.qubits, gates: vec![stripped] };
        let mut cg = CompiledCircuit::new(&single).gates.remove(0);
        cg.angle.constant = theta;
        lowered.gates.push(cg);
    }
    Ok(SemanticMatrix(lowered.unitary(&[], 0.0)))
}
