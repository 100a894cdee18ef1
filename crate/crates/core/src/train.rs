//! Gradient-based fitting of circuit parameters.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bench::TargetFunction;
use crate::circuit::GateCircuit;
use crate::error::Result;
use crate::phase::Binding;
use crate::sim::{CompiledCircuit, Dataset};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Optimizer {
    Adam,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub lr: f64,
    pub epochs: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { optimizer: Optimizer::Adam, lr: 0.05, epochs: 300, restarts: 3, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainResult {
    pub binding: Binding,
    pub mse: f64,
    pub epochs_run: usize,
}

struct Adam {
    lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(lr: f64, n: usize) -> Self {
        Adam { lr, m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * grad[i];
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * grad[i] * grad[i];
            let mhat = self.m[i] / c1;
            let vhat = self.v[i] / c2;
            params[i] -= self.lr * mhat / (vhat.sqrt() + Self::EPS);
        }
    }
}

/// Fits the trainable symbols of `circuit` to `data` and returns the best
/// binding seen across all restarts. Each restart starts from a uniform
/// draw in `[0, 2pi)` and keeps its best iterate, so a restart never ends
/// worse than where it began.
pub fn train(circuit: &GateCircuit, data: &Dataset, config: &TrainConfig) -> TrainResult {
    train_warm(circuit, data, config, &Binding::new())
}

/// As [`train`], but the first restart takes its starting values from
/// `warm` for every symbol bound there.
pub fn train_warm(circuit: &GateCircuit, data: &Dataset, config: &TrainConfig, warm: &Binding) -> TrainResult {
    let compiled = CompiledCircuit::new(circuit);
    let n = compiled.params().len();
    if n == 0 {
        return TrainResult { binding: Binding::new(), mse: compiled.loss(&[], data), epochs_run: 0 };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut epochs_run = 0;
    for restart in 0..config.restarts.max(1) {
        let mut params: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..TAU)).collect();
        if restart == 0 {
            for (p, s) in params.iter_mut().zip(compiled.params()) {
                if let Some(&w) = warm.get(s) {
                    *p = w;
                }
            }
        }
        let mut adam = Adam::new(config.lr, n);
        let mut restart_best: Option<(f64, Vec<f64>)> = None;
        for _ in 0..config.epochs {
            let (loss, grad) = compiled.loss_and_grad(&params, data);
            if restart_best.as_ref().is_none_or(|(b, _)| loss < *b) {
                restart_best = Some((loss, params.clone()));
            }
            adam.step(&mut params, &grad);
            epochs_run += 1;
        }
        let last = compiled.loss(&params, data);
        if restart_best.as_ref().is_none_or(|(b, _)| last < *b) {
            restart_best = Some((last, params));
        }
        let candidate = restart_best.expect("at least one evaluation");
        if best.as_ref().is_none_or(|(b, _)| candidate.0 < *b) {
            best = Some(candidate);
        }
    }
    let (_, params) = best.expect("at least one restart");
    let mse = compiled.loss(&params, data);
    TrainResult { binding: compiled.binding_of(&params), mse, epochs_run }
}

/// Mean squared error against the scaled target at `n_points` equidistant
/// points of `[0, 1]`, endpoints included.
pub fn mse_at_supports(
    circuit: &GateCircuit,
    binding: &Binding,
    target: &TargetFunction,
    n_points: usize,
) -> Result<f64> {
    let data = target.dataset(n_points)?;
    let compiled = CompiledCircuit::new(circuit);
    let params = compiled.param_vector(binding)?;
    Ok(compiled.loss(&params, &data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::phase::{PhaseExpr, SymbolId};

    #[test]
    fn constant_circuit_scores_its_own_loss() {
        let c = GateCircuit::new(1);
        let data = TargetFunction::Identity.dataset(11).unwrap();
        let r = train(&c, &data, &TrainConfig::default());
        assert_eq!(r.epochs_run, 0);
        // Prediction is always +1.
        let want = data.points.iter().map(|p| (1.0 - p.1).powi(2)).sum::<f64>() / 11.0;
        assert!((r.mse - want).abs() < 1e-12);
    }

    #[test]
    fn learns_a_reachable_function() {
        // <Z> = cos(t0 + pi x) after H Rz H; t0 = 0 gives cos(pi x).
        let mut c = GateCircuit::new(1);
        c.push(Gate::H(0));
        c.push(Gate::Rz(0, PhaseExpr::symbol(SymbolId::trainable(0)) + PhaseExpr::symbol(SymbolId::input(0))));
        c.push(Gate::H(0));
        let data = Dataset::sample(|x| (std::f64::consts::PI * x).cos(), 21).unwrap();
        let r = train(&c, &data, &TrainConfig::default());
        assert!(r.mse < 1e-6, "{}", r.mse);
        let again = train(&c, &data, &TrainConfig::default());
        assert_eq!(r, again);
    }

    #[test]
    fn warm_start_never_loses_to_its_start() {
        let mut c = GateCircuit::new(1);
        c.push(Gate::Rx(0, PhaseExpr::symbol(SymbolId::trainable(0))));
        let data = TargetFunction::Step.dataset(20).unwrap();
        let config = TrainConfig { epochs: 1, restarts: 1, ..TrainConfig::default() };
        let warm: Binding = [(SymbolId::trainable(0), 1.0)].into_iter().collect();
        let start = mse_at_supports(&c, &warm, &TargetFunction::Step, 20).unwrap();
        let r = train_warm(&c, &data, &config, &warm);
        assert!(r.mse <= start + 1e-15);
    }
}
