//! The mutation-impact study: random diagrams are trained on every study
//! target, each mutation kind is applied to each diagram several times, and
//! successful mutants are retrained. Linear models then relate success and
//! improvement to the diagram's size and connectivity.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::TargetFunction;
use crate::diagram::diagram_stats;
use crate::error::{Error, Result};
use crate::evolve::derive_seed;
use crate::extract::extract_circuit;
use crate::generate::{random_diagram, Generator, ProbConfig};
use crate::mutations::{attempt_mutation, MutationKind, MutationResult};
use crate::rewrite::to_graph_like;
use crate::train::{train, TrainConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    pub n_diagrams: usize,
    pub repeats: usize,
    pub generators: Vec<Generator>,
    pub qubits: (usize, usize),
    pub depth: (usize, usize),
    pub probs: ProbConfig,
    pub train: TrainConfig,
    pub train_points: usize,
    pub seed: u64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            n_diagrams: 50,
            repeats: 3,
            generators: Generator::ALL.to_vec(),
            qubits: (2, 5),
            depth: (5, 30),
            probs: ProbConfig { trainable: 0.5, input: 0.25 },
            train: TrainConfig { epochs: 60, restarts: 1, ..TrainConfig::default() },
            train_points: 20,
            seed: 0,
        }
    }
}

impl StudyConfig {
    pub const PAPER_DIAGRAMS: usize = 1362;
    pub const PAPER_REPEATS: usize = 10;

    pub fn paper_scale(self) -> Self {
        StudyConfig { n_diagrams: Self::PAPER_DIAGRAMS, repeats: Self::PAPER_REPEATS, ..self }
    }

    /// Number of mutation attempts the study makes.
    pub fn attempts(&self) -> usize {
        self.n_diagrams * MutationKind::ALL.len() * self.repeats
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::ConfigInvalid(m.to_string()));
        if self.n_diagrams == 0 || self.repeats == 0 {
            return bad("n_diagrams and repeats must be positive");
        }
        if self.generators.is_empty() {
            return bad("at least one generator is needed");
        }
        if self.qubits.0 == 0 || self.qubits.0 > self.qubits.1 || self.qubits.1 > crate::contract::MAX_OPEN_WIRES {
            return bad("qubit range must be non-empty, positive and at most 16");
        }
        if self.depth.0 == 0 || self.depth.0 > self.depth.1 {
            return bad("depth range must be non-empty and positive");
        }
        if self.train_points < 2 {
            return bad("need at least two training points");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub diagram_id: usize,
    pub qubits: usize,
    pub vertices: usize,
    pub connectivity: f64,
    pub kind: MutationKind,
    pub repeat: usize,
    pub success: bool,
    /// Training error per study target, in [`TargetFunction::STUDY`] order.
    pub mse_before: Vec<f64>,
    /// Present exactly when the mutation succeeded.
    pub mse_after: Option<Vec<f64>>,
}

impl StudyRecord {
    /// Mean over targets of `before - after`; `None` for failures.
    pub fn improvement(&self) -> Option<f64> {
        let after = self.mse_after.as_ref()?;
        let n = after.len() as f64;
        Some(self.mse_before.iter().zip(after).map(|(b, a)| b - a).sum::<f64>() / n)
    }
}

fn train_all(circuit: &crate::circuit::GateCircuit, config: &StudyConfig, seed: u64) -> Result<Vec<f64>> {
    TargetFunction::STUDY
        .iter()
        .enumerate()
        .map(|(t, target)| {
            let data = target.dataset(config.train_points)?;
            let tc = TrainConfig { seed: derive_seed(seed, &[t as u64]), ..config.train.clone() };
            Ok(train(circuit, &data, &tc).mse)
        })
        .collect()
}

fn study_diagram(config: &StudyConfig, id: usize) -> Result<Vec<StudyRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[id as u64]));
    let generator = config.generators[rng.gen_range(0..config.generators.len())];
    let q = rng.gen_range(config.qubits.0..=config.qubits.1);
    let depth = rng.gen_range(config.depth.0..=config.depth.1);
    let diagram = to_graph_like(&random_diagram(generator, q, depth, config.probs, &mut rng));
    let stats = diagram_stats(&diagram);
    let circuit = extract_circuit(&diagram)?.circuit;
    let mse_before = train_all(&circuit, config, rng.gen())?;
    let mut out = Vec::new();
    for (k, kind) in MutationKind::ALL.into_iter().enumerate() {
        for repeat in 0..config.repeats {
            let seed = derive_seed(config.seed, &[id as u64, k as u64, repeat as u64]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let outcome = attempt_mutation(&diagram, kind, 1, &mut rng);
            let mse_after = match &outcome.result {
                MutationResult::Success(m) => Some(train_all(&extract_circuit(m)?.circuit, config, rng.gen())?),
                MutationResult::Failure => None,
            };
            out.push(StudyRecord {
                diagram_id: id,
                qubits: stats.qubits,
                vertices: stats.vertices,
                connectivity: stats.connectivity,
                kind,
                repeat,
                success: mse_after.is_some(),
                mse_before: mse_before.clone(),
                mse_after,
            });
        }
    }
    Ok(out)
}

/// Records ordered by diagram, kind and repeat. Every task has its own
/// seed, so the result does not depend on scheduling.
pub fn run_mutation_study(config: &StudyConfig) -> Result<Vec<StudyRecord>> {
    config.validate()?;
    let per_diagram: Vec<Vec<StudyRecord>> =
        (0..config.n_diagrams).into_par_iter().map(|id| study_diagram(config, id)).collect::<Result<_>>()?;
    Ok(per_diagram.into_iter().flatten().collect())
}

pub fn study_csv_header() -> String {
    let mut cols: Vec<String> =
        ["diagram_id", "qubits", "vertices", "connectivity", "kind", "repeat", "success"].map(String::from).to_vec();
    for when in ["before", "after"] {
        for t in TargetFunction::STUDY {
            cols.push(format!("mse_{when}_{}", t.name()));
        }
    }
    cols.join(",")
}

pub fn study_csv(records: &[StudyRecord]) -> String {
    let mut out = study_csv_header();
    out.push('\n');
    for r in records {
        let mut cols = vec![
            r.diagram_id.to_string(),
            r.qubits.to_string(),
            r.vertices.to_string(),
            r.connectivity.to_string(),
            r.kind.to_string(),
            r.repeat.to_string(),
            r.success.to_string(),
        ];
        cols.extend(r.mse_before.iter().map(|v| format!("{v:.12e}")));
        match &r.mse_after {
            Some(after) => cols.extend(after.iter().map(|v| format!("{v:.12e}"))),
            None => cols.extend(std::iter::repeat_n(String::new(), TargetFunction::STUDY.len())),
        }
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TargetKind {
    Success,
    ImprovementWithFailures,
    ImprovementOnlySuccess,
}

impl TargetKind {
    pub const ALL: [TargetKind; 3] =
        [TargetKind::Success, TargetKind::ImprovementWithFailures, TargetKind::ImprovementOnlySuccess];
}

pub const FEATURES: [&str; 3] = ["qubits", "vertices", "connectivity"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OlsModel {
    pub kind: MutationKind,
    pub target_kind: TargetKind,
    pub rows: usize,
    pub intercept: f64,
    /// Coefficients of the standardized features.
    pub coefficients: BTreeMap<String, f64>,
}

/// Centres a column and scales it to unit sample standard deviation.
pub fn standardize(column: &[f64], name: &str) -> Result<Vec<f64>> {
    let n = column.len() as f64;
    let mean = column.iter().sum::<f64>() / n;
    let var = column.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    if !(sd > 1e-12 * mean.abs().max(1.0)) {
        return Err(Error::ZeroVariance(name.to_string()));
    }
    Ok(column.iter().map(|x| (x - mean) / sd).collect())
}

/// Least squares on standardized features. Returns the intercept, which is
/// the mean of `y`, and one coefficient per feature.
pub fn fit_standardized(features: &[[f64; 3]], y: &[f64]) -> Result<(f64, [f64; 3])> {
    assert_eq!(features.len(), y.len());
    let n = y.len();
    if n < 4 {
        return Err(Error::Underdetermined { rows: n, params: 4 });
    }
    let mut z = DMatrix::<f64>::zeros(n, 3);
    for (c, name) in FEATURES.iter().enumerate() {
        let col: Vec<f64> = features.iter().map(|f| f[c]).collect();
        for (r, v) in standardize(&col, name)?.into_iter().enumerate() {
            z[(r, c)] = v;
        }
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - mean));
    let ztz = z.transpose() * &z;
    let zty = z.transpose() * yc;
    let beta = match ztz.clone().cholesky() {
        Some(ch) => ch.solve(&zty),
        None => ztz.pseudo_inverse(1e-12).map_err(|e| Error::ConfigInvalid(e.to_string()))? * zty,
    };
    Ok((mean, [beta[0], beta[1], beta[2]]))
}

/// One of the three linear models for mutation `kind`.
pub fn fit_ols(records: &[StudyRecord], kind: MutationKind, target_kind: TargetKind) -> Result<OlsModel> {
    let rows: Vec<&StudyRecord> = records
        .iter()
        .filter(|r| r.kind == kind && (target_kind != TargetKind::ImprovementOnlySuccess || r.success))
        .collect();
    let features: Vec<[f64; 3]> = rows.iter().map(|r| [r.qubits as f64, r.vertices as f64, r.connectivity]).collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|r| match target_kind {
            TargetKind::Success => f64::from(u8::from(r.success)),
            _ => r.improvement().unwrap_or(0.0),
        })
        .collect();
    let (intercept, beta) = fit_standardized(&features, &y)?;
    let coefficients = FEATURES.iter().zip(beta).map(|(f, b)| (f.to_string(), b)).collect();
    Ok(OlsModel { kind, target_kind, rows: rows.len(), intercept, coefficients })
}

/// Every model, or why it could not be fitted.
pub fn fit_all(records: &[StudyRecord]) -> Vec<(MutationKind, TargetKind, Result<OlsModel>)> {
    let mut out = Vec::new();
    for kind in MutationKind::ALL {
        for tk in TargetKind::ALL {
            out.push((kind, tk, fit_ols(records, kind, tk)));
        }
    }
    out
}

pub fn ols_json(fits: &[(MutationKind, TargetKind, Result<OlsModel>)]) -> String {
    let entries: Vec<serde_json::Value> = fits
        .iter()
        .map(|(kind, tk, fit)| match fit {
            Ok(m) => serde_json::to_value(m).expect("serializable"),
            Err(e) => serde_json::json!({ "kind": kind, "target_kind": tk, "error": e.to_string() }),
        })
        .collect();
    serde_json::to_string_pretty(&entries).expect("serializable")
}

/// Mean change of the training error per mutation kind and target over
/// successful records; `None` where a kind never succeeded.
#[derive(Clone, Debug, PartialEq)]
pub struct ImprovementMatrix {
    /// Signed `before - after`.
    pub signed: Vec<Vec<Option<f64>>>,
    /// `|before - after|`.
    pub absolute: Vec<Vec<Option<f64>>>,
    pub counts: Vec<usize>,
}

pub fn improvement_by_function(records: &[StudyRecord]) -> ImprovementMatrix {
    let nt = TargetFunction::STUDY.len();
    let mut signed = Vec::new();
    let mut absolute = Vec::new();
    let mut counts = Vec::new();
    for kind in MutationKind::ALL {
        let ok: Vec<&StudyRecord> = records.iter().filter(|r| r.kind == kind && r.success).collect();
        counts.push(ok.len());
        let cell = |t: usize, f: fn(f64) -> f64| {
            (!ok.is_empty()).then(|| {
                ok.iter().map(|r| f(r.mse_before[t] - r.mse_after.as_ref().expect("success")[t])).sum::<f64>()
                    / ok.len() as f64
            })
        };
        signed.push((0..nt).map(|t| cell(t, |d| d)).collect());
        absolute.push((0..nt).map(|t| cell(t, f64::abs)).collect());
    }
    ImprovementMatrix { signed, absolute, counts }
}

pub fn improvement_csv(m: &ImprovementMatrix) -> String {
    let mut out = String::from("kind,successes");
    for prefix in ["signed", "absolute"] {
        for t in TargetFunction::STUDY {
            out.push_str(&format!(",{prefix}_{}", t.name()));
        }
    }
    out.push('\n');
    for (k, kind) in MutationKind::ALL.into_iter().enumerate() {
        out.push_str(&format!("{kind},{}", m.counts[k]));
        for row in [&m.signed[k], &m.absolute[k]] {
            for v in row {
                match v {
                    Some(v) => out.push_str(&format!(",{v:.12e}")),
                    None => out.push_str(",NaN"),
                }
            }
        }
        out.push('\n');
    }
    out
}
