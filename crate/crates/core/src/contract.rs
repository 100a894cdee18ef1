//! Brute-force tensor contraction of small diagrams.
//!
//! Every spider becomes a dense tensor and every edge a two-leg identity or
//! Hadamard tensor. Tensors are merged greedily, always picking the smallest
//! tensor that still has a neighbour. Scalars are not tracked exactly, so
//! results are only meaningful up to a nonzero factor.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::diagram::{EdgeType, SpiderKind, VertexId, ZxDiagram};
use crate::error::{Error, Result};
use crate::phase::Binding;

/// Most open wires `contract` accepts.
pub const MAX_OPEN_WIRES: usize = 16;
/// Largest intermediate tensor rank before giving up.
const MAX_RANK: usize = 22;

/// The linear map of a diagram, `2^outputs x 2^inputs`. Qubit `q` is bit `q`
/// of the row (output) and column (input) index.
#[derive(Clone, Debug, PartialEq)]
pub struct SemanticMatrix(pub DMatrix<Complex64>);

impl SemanticMatrix {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    /// True if both maps agree up to a nonzero scalar. Each matrix is divided
    /// by its own entry at the position of `self`'s largest-magnitude entry,
    /// then entries are compared.
    pub fn equal_up_to_scalar(&self, other: &SemanticMatrix, tol: f64) -> bool {
        let (a, b) = (&self.0, &other.0);
        if a.shape() != b.shape() {
            return false;
        }
        let (k, amax) = a
            .iter()
            .enumerate()
            .map(|(i, z)| (i, z.norm()))
            .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        let bmax = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if amax == 0.0 || bmax == 0.0 {
            return amax == 0.0 && bmax == 0.0;
        }
        let (ak, bk) = (a[k], b[k]);
        if bk.norm() <= 1e-12 * bmax {
            return false;
        }
        a.iter().zip(b.iter()).all(|(x, y)| (x / ak - y / bk).norm() <= tol)
    }

    /// `M^dagger M` is proportional to the identity within `tol`, after
    /// rescaling so the diagonal averages to one.
    pub fn is_unitary_up_to_scalar(&self, tol: f64) -> bool {
        let m = &self.0;
        if m.nrows() != m.ncols() {
            return false;
        }
        let g = m.adjoint() * m;
        let n = g.nrows();
        let scale = (0..n).map(|i| g[(i, i)].re).sum::<f64>() / n as f64;
        if scale <= 0.0 {
            return false;
        }
        (0..n).all(|i| {
            (0..n).all(|j| {
                let want = if i == j { 1.0 } else { 0.0 };
                (g[(i, j)] / scale - want).norm() <= tol
            })
        })
    }
}

#[derive(Clone, Debug)]
struct Tensor {
    /// Leg labels, most significant bit first.
    legs: Vec<usize>,
    data: Vec<Complex64>,
}

impl Tensor {
    fn rank(&self) -> usize {
        self.legs.len()
    }

    /// Reorders legs to `order` (a permutation of `self.legs`).
    fn permuted(&self, order: &[usize]) -> Tensor {
        let r = self.rank();
        if order == self.legs.as_slice() {
            return self.clone();
        }
        // Bit position (from the least significant end) of each new leg in the old layout.
        let src_bit: Vec<usize> = order
            .iter()
            .map(|l| {
                let j = self.legs.iter().position(|x| x == l).expect("leg present");
                r - 1 - j
            })
            .collect();
        let mut data = vec![Complex64::new(0.0, 0.0); self.data.len()];
        for (new_idx, slot) in data.iter_mut().enumerate() {
            let mut old_idx = 0usize;
            for (j, &sb) in src_bit.iter().enumerate() {
                let bit = (new_idx >> (r - 1 - j)) & 1;
                old_idx |= bit << sb;
            }
            *slot = self.data[old_idx];
        }
        Tensor { legs: order.to_vec(), data }
    }

    /// Contracts all shared legs of `a` and `b`.
    fn contract(a: &Tensor, b: &Tensor) -> Tensor {
        let shared: Vec<usize> = a.legs.iter().copied().filter(|l| b.legs.contains(l)).collect();
        let free_a: Vec<usize> = a.legs.iter().copied().filter(|l| !shared.contains(l)).collect();
        let free_b: Vec<usize> = b.legs.iter().copied().filter(|l| !shared.contains(l)).collect();
        let a_order: Vec<usize> = free_a.iter().chain(shared.iter()).copied().collect();
        let b_order: Vec<usize> = shared.iter().chain(free_b.iter()).copied().collect();
        let ap = a.permuted(&a_order);
        let bp = b.permuted(&b_order);
        let (m, s, n) = (1usize << free_a.len(), 1usize << shared.len(), 1usize << free_b.len());
        let mut data = vec![Complex64::new(0.0, 0.0); m * n];
        for i in 0..m {
            let arow = &ap.data[i * s..(i + 1) * s];
            let out = &mut data[i * n..(i + 1) * n];
            for (k, &av) in arow.iter().enumerate() {
                if av == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let brow = &bp.data[k * n..(k + 1) * n];
                for (o, &bv) in out.iter_mut().zip(brow) {
                    *o += av * bv;
                }
            }
        }
        let legs = free_a.into_iter().chain(free_b).collect();
        Tensor { legs, data }
    }
}

fn spider_tensor(kind: SpiderKind, angle: f64, legs: Vec<usize>) -> Tensor {
    let d = legs.len();
    let phase = Complex64::from_polar(1.0, angle);
    let size = 1usize << d;
    let data = match kind {
        SpiderKind::Z => {
            let mut data = vec![Complex64::new(0.0, 0.0); size];
            data[0] += Complex64::new(1.0, 0.0);
            data[size - 1] += phase;
            data
        }
        SpiderKind::X => {
            let norm = FRAC_1_SQRT_2.powi(d as i32);
            (0..size)
                .map(|bits| {
                    let sign = if (bits as u64).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    (Complex64::new(1.0, 0.0) + phase * sign) * norm
                })
                .collect()
        }
        SpiderKind::BoundaryIn | SpiderKind::BoundaryOut => unreachable!("boundaries are open legs"),
    };
    Tensor { legs, data }
}

fn edge_tensor(t: EdgeType, a: usize, b: usize) -> Tensor {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let data = match t {
        EdgeType::Plain => vec![one, zero, zero, one],
        EdgeType::Hadamard => {
            let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
            vec![h, h, h, -h]
        }
    };
    Tensor { legs: vec![a, b], data }
}

/// Computes the linear map of `diagram` with every symbol taken from `binding`.
pub fn contract(diagram: &ZxDiagram, binding: &Binding) -> Result<SemanticMatrix> {
    let open = diagram.inputs().len() + diagram.outputs().len();
    if open > MAX_OPEN_WIRES {
        return Err(Error::DiagramTooLarge { wires: open, limit: MAX_OPEN_WIRES });
    }

    let mut next_label = 0usize;
    let mut fresh = || {
        next_label += 1;
        next_label - 1
    };
    // Label of the open leg at each boundary spider.
    let mut open_leg: BTreeMap<VertexId, usize> = BTreeMap::new();
    for b in diagram.inputs().iter().chain(diagram.outputs()) {
        open_leg.insert(*b, fresh());
    }
    let mut spider_legs: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
    let mut tensors = Vec::new();
    for (u, v, t) in diagram.edges() {
        let mut end = |w: VertexId| {
            if let Some(&l) = open_leg.get(&w) {
                l
            } else {
                let l = fresh();
                spider_legs.entry(w).or_default().push(l);
                l
            }
        };
        let a = end(u);
        let b = end(v);
        tensors.push(edge_tensor(t, a, b));
    }
    for (v, s) in diagram.spiders() {
        if s.kind.is_boundary() {
            continue;
        }
        let angle = s.phase.eval(binding)?;
        let legs = spider_legs.remove(&v).unwrap_or_default();
        tensors.push(spider_tensor(s.kind, angle, legs));
    }

    let result = contract_network(tensors)?;

    let order: Vec<usize> = diagram
        .outputs()
        .iter()
        .rev()
        .chain(diagram.inputs().iter().rev())
        .map(|b| open_leg[b])
        .collect();
    let result = result.permuted(&order);
    let rows = 1usize << diagram.outputs().len();
    let cols = 1usize << diagram.inputs().len();
    Ok(SemanticMatrix(DMatrix::from_row_slice(rows, cols, &result.data)))
}

fn contract_network(mut tensors: Vec<Tensor>) -> Result<Tensor> {
    if tensors.is_empty() {
        return Ok(Tensor { legs: vec![], data: vec![Complex64::new(1.0, 0.0)] });
    }
    loop {
        if tensors.len() == 1 {
            return Ok(tensors.pop().expect("one tensor"));
        }
        // Smallest tensor that shares a leg with another; ties go to the lowest index.
        let mut best: Option<(usize, usize, usize)> = None;
        let mut order: Vec<usize> = (0..tensors.len()).collect();
        order.sort_by_key(|&i| tensors[i].rank());
        for &i in &order {
            for (j, other) in tensors.iter().enumerate() {
                if i == j || !tensors[i].legs.iter().any(|l| other.legs.contains(l)) {
                    continue;
                }
                let shared = tensors[i].legs.iter().filter(|l| other.legs.contains(l)).count();
                let out_rank = tensors[i].rank() + other.rank() - 2 * shared;
                if best.is_none_or(|(_, _, r)| out_rank < r) {
                    best = Some((i, j, out_rank));
                }
            }
            if best.is_some() {
                break;
            }
        }
        let (i, j) = match best {
            Some((i, j, _)) => (i, j),
            None => {
                // Disconnected pieces: take outer products, smallest first.
                (order[0], order[1])
            }
        };
        let merged_rank = {
            let (a, b) = (&tensors[i], &tensors[j]);
            let shared = a.legs.iter().filter(|l| b.legs.contains(l)).count();
            a.rank() + b.rank() - 2 * shared
        };
        if merged_rank > MAX_RANK {
            return Err(Error::DiagramTooLarge { wires: merged_rank, limit: MAX_RANK });
        }
        let merged = Tensor::contract(&tensors[i], &tensors[j]);
        let (hi, lo) = if i > j { (i, j) } else { (j, i) };
        tensors.swap_remove(hi);
        tensors.swap_remove(lo);
        tensors.push(merged);
    }
}

/// Contracts both diagrams under `binding` and compares them up to a scalar.
pub fn diagrams_equal(a: &ZxDiagram, b: &ZxDiagram, binding: &Binding, tol: f64) -> Result<bool> {
    if a.inputs().len() != b.inputs().len() || a.outputs().len() != b.outputs().len() {
        return Err(Error::ArityMismatch(format!(
            "{}->{} vs {}->{}",
            a.inputs().len(),
            a.outputs().len(),
            b.inputs().len(),
            b.outputs().len()
        )));
    }
    let ma = contract(a, binding)?;
    let mb = contract(b, binding)?;
    Ok(ma.equal_up_to_scalar(&mb, tol))
}
