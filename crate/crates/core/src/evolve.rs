//! Multi-objective genetic search over graph-like diagrams.
//!
//! A population of extractable diagrams is scored by training their
//! extracted circuits. Each generation some individuals are mutated, the
//! mutants are trained, and the non-dominated members of parents plus
//! mutants survive.

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::TargetFunction;
use crate::circuit::{Gate, GateCircuit};
use crate::diagram::ZxDiagram;
use crate::error::{Error, Result};
use crate::extract::extract_circuit;
use crate::generate::{random_diagram, Generator, ProbConfig};
use crate::mutations::{mutate, KindProbabilities, MutationKind, MutationResult, DEFAULT_MAX_TRIALS};
use crate::phase::{Binding, PhaseExpr, SymbolId, SymbolKind};
use crate::rewrite::to_graph_like;
use crate::sim::Dataset;
use crate::train::{mse_at_supports, train_warm, TrainConfig};

/// Lower is better in every component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessVector {
    pub mse: f64,
    pub depth: usize,
    pub two_qubit_count: usize,
    pub input_encoding_count: usize,
}

impl FitnessVector {
    pub const COMPONENTS: usize = 4;

    pub fn components(&self) -> [f64; 4] {
        [self.mse, self.depth as f64, self.two_qubit_count as f64, self.input_encoding_count as f64]
    }

    /// No worse anywhere and better somewhere.
    pub fn dominates(&self, other: &FitnessVector) -> bool {
        let (a, b) = (self.components(), other.components());
        a.iter().zip(&b).all(|(x, y)| x <= y) && a.iter().zip(&b).any(|(x, y)| x < y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub diagram: ZxDiagram,
    pub circuit: GateCircuit,
    pub binding: Binding,
    pub fitness: FitnessVector,
    pub lineage: Vec<MutationKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub population_size: usize,
    /// Individuals picked for mutation per generation.
    pub mutation_count: usize,
    pub kind_probabilities: KindProbabilities,
    pub max_trials: usize,
    pub generations: usize,
    /// Points at which the fitness error is measured.
    pub n_support_points: usize,
    /// Points used for training.
    pub train_points: usize,
    pub train: TrainConfig,
    /// Inclusive qubit range of random initial diagrams.
    pub qubits: (usize, usize),
    /// Inclusive gate-count range of random initial diagrams.
    pub depth: (usize, usize),
    pub generators: Vec<Generator>,
    pub probs: ProbConfig,
    /// Start every individual from this circuit instead of random ones.
    pub init_circuit: Option<GateCircuit>,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 20,
            mutation_count: 10,
            kind_probabilities: crate::mutations::uniform_probabilities(0.25),
            max_trials: DEFAULT_MAX_TRIALS,
            generations: 30,
            n_support_points: 400,
            train_points: 50,
            train: TrainConfig { epochs: 100, restarts: 2, ..TrainConfig::default() },
            qubits: (3, 4),
            depth: (5, 15),
            generators: vec![Generator::CnotHadPhase],
            probs: ProbConfig { trainable: 0.6, input: 0.3 },
            init_circuit: None,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::ConfigInvalid(m.to_string()));
        if self.population_size == 0 {
            return bad("population_size must be positive");
        }
        if self.mutation_count == 0 {
            return bad("mutation_count must be positive");
        }
        if self.generations == 0 {
            return bad("generations must be positive");
        }
        if self.max_trials == 0 {
            return bad("max_trials must be positive");
        }
        if self.n_support_points < 2 || self.train_points < 2 {
            return bad("need at least two support and training points");
        }
        if self.kind_probabilities.values().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("mutation probabilities must lie in [0, 1]");
        }
        if self.init_circuit.is_none() {
            let (q0, q1) = self.qubits;
            let (d0, d1) = self.depth;
            if q0 == 0 || q0 > q1 || q1 > crate::contract::MAX_OPEN_WIRES {
                return bad("qubit range must be non-empty, positive and at most 16");
            }
            if d0 == 0 || d0 > d1 {
                return bad("depth range must be non-empty and positive");
            }
            if self.generators.is_empty() {
                return bad("at least one generator is needed");
            }
        }
        let p = self.probs;
        if p.trainable < 0.0 || p.input < 0.0 || p.trainable + p.input > 1.0 {
            return bad("parameterization probabilities must be non-negative and sum to at most 1");
        }
        Ok(())
    }
}

/// Mixes `parts` into `base` so that every task gets its own stream.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    parts.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

/// Training data and fitness supports for one target.
pub struct Task {
    pub target: TargetFunction,
    pub data: Dataset,
    pub n_support_points: usize,
    pub train: TrainConfig,
}

impl Task {
    pub fn new(config: &GaConfig, target: TargetFunction) -> Result<Self> {
        Ok(Task {
            target,
            data: target.dataset(config.train_points)?,
            n_support_points: config.n_support_points,
            train: config.train.clone(),
        })
    }

    /// Extracts, trains and scores a graph-like diagram.
    pub fn evaluate(
        &self,
        diagram: ZxDiagram,
        lineage: Vec<MutationKind>,
        warm: &Binding,
        seed: u64,
    ) -> Result<Individual> {
        let circuit = extract_circuit(&diagram)?.circuit;
        self.evaluate_circuit(diagram, circuit, lineage, warm, seed)
    }

    pub fn evaluate_circuit(
        &self,
        diagram: ZxDiagram,
        circuit: GateCircuit,
        lineage: Vec<MutationKind>,
        warm: &Binding,
        seed: u64,
    ) -> Result<Individual> {
        let config = TrainConfig { seed, ..self.train.clone() };
        let trained = train_warm(&circuit, &self.data, &config, warm);
        let mse = mse_at_supports(&circuit, &trained.binding, &self.target, self.n_support_points)?;
        let m = circuit.metrics();
        let fitness = FitnessVector {
            mse,
            depth: m.depth,
            two_qubit_count: m.two_qubit_count,
            input_encoding_count: m.input_encoding_count,
        };
        Ok(Individual { diagram, circuit, binding: trained.binding, fitness, lineage })
    }
}

/// The starting population: random circuit-like diagrams brought to
/// graph-like form, or copies of a fixed circuit.
pub fn initialize(config: &GaConfig, target: TargetFunction) -> Result<Vec<Individual>> {
    config.validate()?;
    let task = Task::new(config, target)?;
    (0..config.population_size)
        .into_par_iter()
        .map(|i| {
            let seed = derive_seed(config.seed, &[0, i as u64]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let diagram = match &config.init_circuit {
                Some(c) => {
                    c.validate()?;
                    c.to_diagram()
                }
                None => {
                    let generator = *config.generators.choose(&mut rng).expect("validated");
                    let q = rng.gen_range(config.qubits.0..=config.qubits.1);
                    let depth = rng.gen_range(config.depth.0..=config.depth.1);
                    random_diagram(generator, q, depth, config.probs, &mut rng)
                }
            };
            task.evaluate(to_graph_like(&diagram), Vec::new(), &Binding::new(), rng.gen())
        })
        .collect()
}

/// Indices of the individuals to mutate: every per-component optimum
/// first, then uniform picks. Small populations are repeated to fill up.
pub fn select_for_mutation<R: Rng + ?Sized>(
    population: &[Individual],
    mutation_count: usize,
    rng: &mut R,
) -> Vec<usize> {
    assert!(!population.is_empty(), "population must not be empty");
    let n = population.len();
    if n <= mutation_count {
        let mut picked: Vec<usize> = (0..n).collect();
        while picked.len() < mutation_count {
            picked.push(rng.gen_range(0..n));
        }
        return picked;
    }
    let mut picked: Vec<usize> = Vec::new();
    for c in 0..FitnessVector::COMPONENTS {
        let best = (0..n)
            .min_by(|&a, &b| {
                let (x, y) = (population[a].fitness.components()[c], population[b].fitness.components()[c]);
                x.total_cmp(&y)
            })
            .expect("non-empty");
        if !picked.contains(&best) {
            picked.push(best);
        }
    }
    picked.truncate(mutation_count);
    let rest: Vec<usize> = (0..n).filter(|i| !picked.contains(i)).collect();
    let extra = rest.into_iter().choose_multiple(rng, mutation_count - picked.len());
    picked.extend(extra);
    picked
}

/// Indices of the non-dominated fitness vectors, in order of first
/// appearance. Of several identical vectors only the first is kept.
pub fn pareto_indices(fitness: &[FitnessVector]) -> Vec<usize> {
    (0..fitness.len())
        .filter(|&i| {
            let f = &fitness[i];
            !fitness.iter().any(|g| g.dominates(f)) && !fitness[..i].iter().any(|g| g.components() == f.components())
        })
        .collect()
}

pub fn pareto_filter(individuals: Vec<Individual>) -> Vec<Individual> {
    let fitness: Vec<FitnessVector> = individuals.iter().map(|i| i.fitness).collect();
    let keep = pareto_indices(&fitness);
    let mut keep = keep.into_iter().peekable();
    individuals
        .into_iter()
        .enumerate()
        .filter_map(|(i, ind)| if keep.next_if_eq(&i).is_some() { Some(ind) } else { None })
        .collect()
}

/// One line of the run history.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub front_size: usize,
    pub mutants: usize,
    pub best_mse: f64,
    pub best_depth: usize,
    pub best_two_qubit_count: usize,
    pub best_input_encoding_count: usize,
}

pub const HISTORY_HEADER: &str =
    "generation,front_size,mutants,best_mse,best_depth,best_two_qubit_count,best_input_encoding_count";

impl GenerationRecord {
    fn of(generation: usize, front: &[Individual], mutants: usize) -> Self {
        let min = |c: usize| front.iter().map(|i| i.fitness.components()[c]).fold(f64::INFINITY, f64::min);
        GenerationRecord {
            generation,
            front_size: front.len(),
            mutants,
            best_mse: min(0),
            best_depth: min(1) as usize,
            best_two_qubit_count: min(2) as usize,
            best_input_encoding_count: min(3) as usize,
        }
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{:.12e},{},{},{}",
            self.generation,
            self.front_size,
            self.mutants,
            self.best_mse,
            self.best_depth,
            self.best_two_qubit_count,
            self.best_input_encoding_count
        )
    }
}

#[derive(Clone, Debug)]
pub struct GaRun {
    pub front: Vec<Individual>,
    pub history: Vec<GenerationRecord>,
}

/// How a parent turns into a trained mutant, if it does.
type Mutator<'a> = dyn Fn(&Individual, &Task, u64) -> Option<Individual> + Sync + 'a;

fn zx_mutator(config: &GaConfig) -> impl Fn(&Individual, &Task, u64) -> Option<Individual> + Sync + '_ {
    move |parent, task, seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let outcome = mutate(&parent.diagram, &config.kind_probabilities, config.max_trials, &mut rng);
        let MutationResult::Success(diagram) = outcome.result.clone() else {
            return None;
        };
        let mut lineage = parent.lineage.clone();
        lineage.extend(outcome.applied());
        task.evaluate(diagram, lineage, &parent.binding, rng.gen()).ok()
    }
}

fn evolve_loop(
    config: &GaConfig,
    task: &Task,
    mut population: Vec<Individual>,
    mutator: &Mutator<'_>,
    mut on_generation: impl FnMut(usize, &[Individual]),
) -> GaRun {
    let mut history = vec![GenerationRecord::of(0, &pareto_filter(population.clone()), 0)];
    on_generation(0, &population);
    for gen in 1..=config.generations {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[1, gen as u64]));
        let picked = select_for_mutation(&population, config.mutation_count, &mut rng);
        let mutants: Vec<Individual> = picked
            .par_iter()
            .enumerate()
            .filter_map(|(j, &i)| {
                mutator(&population[i], task, derive_seed(config.seed, &[2, gen as u64, j as u64]))
            })
            .collect();
        let count = mutants.len();
        population.extend(mutants);
        population = pareto_filter(population);
        history.push(GenerationRecord::of(gen, &population, count));
        on_generation(gen, &population);
    }
    GaRun { front: population, history }
}

/// Runs the search and reports each generation's front to `on_generation`
/// (generation 0 is the initial population).
pub fn run_ga_with(
    config: &GaConfig,
    target: TargetFunction,
    on_generation: impl FnMut(usize, &[Individual]),
) -> Result<GaRun> {
    let population = initialize(config, target)?;
    let task = Task::new(config, target)?;
    let mutator = zx_mutator(config);
    Ok(evolve_loop(config, &task, population, &mutator, on_generation))
}

pub fn run_ga(config: &GaConfig, target: TargetFunction) -> Result<GaRun> {
    run_ga_with(config, target, |_, _| {})
}

/// Inserts `gate` before position `pos` (clamped to the end).
pub fn insert_gate(c: &mut GateCircuit, pos: usize, gate: Gate) {
    let pos = pos.min(c.gates.len());
    c.gates.insert(pos, gate);
}

/// Removes the gate at `pos`; out of range is a no-op.
pub fn delete_gate(c: &mut GateCircuit, pos: usize) -> Option<Gate> {
    (pos < c.gates.len()).then(|| c.gates.remove(pos))
}

fn fresh_symbol(c: &GateCircuit, kind: SymbolKind) -> SymbolId {
    let index = c.symbols().into_iter().filter(|s| s.kind == kind).map(|s| s.index + 1).max().unwrap_or(0);
    SymbolId { kind, index }
}

fn random_gate<R: Rng + ?Sized>(c: &GateCircuit, rng: &mut R) -> Gate {
    let n = c.qubits;
    let q = rng.gen_range(0..n);
    let choices = if n >= 2 { 5 } else { 3 };
    let phase = |rng: &mut R| {
        let kind = if rng.gen_bool(0.5) { SymbolKind::Trainable } else { SymbolKind::Input };
        PhaseExpr::symbol(fresh_symbol(c, kind))
    };
    match rng.gen_range(0..choices) {
        0 => Gate::H(q),
        1 => Gate::Rz(q, phase(rng)),
        2 => Gate::Rx(q, phase(rng)),
        k => {
            let other = (q + rng.gen_range(1..n)) % n;
            if k == 3 {
                Gate::Cnot { control: q, target: other }
            } else {
                Gate::Cz(q, other)
            }
        }
    }
}

/// One random edit of a gate list: insert, delete or rewire a gate, or
/// swap a rotation's symbol for a fresh one of the other kind.
pub fn circuit_baseline_mutate<R: Rng + ?Sized>(circuit: &GateCircuit, rng: &mut R) -> GateCircuit {
    let mut c = circuit.clone();
    let len = c.gates.len();
    match rng.gen_range(0..4) {
        0 => {
            let gate = random_gate(&c, rng);
            insert_gate(&mut c, rng.gen_range(0..=len), gate);
        }
        1 if len > 0 => {
            delete_gate(&mut c, rng.gen_range(0..len));
        }
        2 if len > 0 => {
            let n = c.qubits;
            let i = rng.gen_range(0..len);
            let q = rng.gen_range(0..n);
            let other = if n > 1 { (q + rng.gen_range(1..n)) % n } else { q };
            let g = &mut c.gates[i];
            *g = match g.clone() {
                Gate::H(_) => Gate::H(q),
                Gate::Rz(_, p) => Gate::Rz(q, p),
                Gate::Rx(_, p) => Gate::Rx(q, p),
                Gate::Cnot { .. } if n > 1 => Gate::Cnot { control: q, target: other },
                Gate::Cz(..) if n > 1 => Gate::Cz(q, other),
                Gate::Swap(..) if n > 1 => Gate::Swap(q, other),
                same => same,
            };
        }
        3 => {
            let rotations: Vec<usize> = (0..len).filter(|&i| c.gates[i].angle().is_some()).collect();
            if let Some(&i) = rotations.choose(rng) {
                let flipped = {
                    let angle = c.gates[i].angle().expect("rotation");
                    let kind = if angle.has_input() { SymbolKind::Trainable } else { SymbolKind::Input };
                    PhaseExpr::symbol(fresh_symbol(&c, kind))
                };
                *c.gates[i].angle_mut().expect("rotation") = flipped;
            }
        }
        _ => {}
    }
    c
}

/// The same search with [`circuit_baseline_mutate`] in place of diagram
/// mutations; each mutant gets between one and three edits.
pub fn run_baseline_ga(config: &GaConfig, target: TargetFunction) -> Result<GaRun> {
    run_baseline_ga_with(config, target, |_, _| {})
}

pub fn run_baseline_ga_with(
    config: &GaConfig,
    target: TargetFunction,
    on_generation: impl FnMut(usize, &[Individual]),
) -> Result<GaRun> {
    let population = initialize(config, target)?;
    let task = Task::new(config, target)?;
    let mutator = |parent: &Individual, task: &Task, seed: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = parent.circuit.clone();
        for _ in 0..rng.gen_range(1..=3) {
            c = circuit_baseline_mutate(&c, &mut rng);
        }
        let diagram = to_graph_like(&c.to_diagram());
        task.evaluate_circuit(diagram, c, Vec::new(), &parent.binding, rng.gen()).ok()
    };
    Ok(evolve_loop(config, &task, population, &mutator, on_generation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::check_valid;

    fn fv(mse: f64, d: usize, t: usize, e: usize) -> FitnessVector {
        FitnessVector { mse, depth: d, two_qubit_count: t, input_encoding_count: e }
    }

    fn small() -> GaConfig {
        GaConfig {
            population_size: 4,
            mutation_count: 3,
            generations: 2,
            train_points: 10,
            n_support_points: 20,
            train: TrainConfig { epochs: 10, restarts: 1, ..TrainConfig::default() },
            qubits: (2, 3),
            depth: (3, 8),
            kind_probabilities: crate::mutations::uniform_probabilities(0.5),
            ..GaConfig::default()
        }
    }

    #[test]
    fn pareto_examples() {
        assert_eq!(pareto_indices(&[fv(1.0, 1, 1, 1)]), vec![0]);
        assert_eq!(pareto_indices(&[fv(1.0, 1, 1, 1), fv(2.0, 2, 2, 2)]), vec![0]);
        assert_eq!(pareto_indices(&[fv(1.0, 2, 1, 1), fv(2.0, 1, 1, 1), fv(2.0, 2, 1, 1)]), vec![0, 1]);
        assert_eq!(pareto_indices(&[fv(1.0, 1, 1, 1), fv(1.0, 1, 1, 1)]), vec![0]);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, &[2, 3]), derive_seed(1, &[3, 2]));
        assert_ne!(derive_seed(1, &[0]), derive_seed(2, &[0]));
        assert_eq!(derive_seed(5, &[1, 2]), derive_seed(5, &[1, 2]));
    }

    #[test]
    fn identity_circuit_scores_the_constant_loss() {
        let config = GaConfig { population_size: 1, init_circuit: Some(GateCircuit::new(2)), ..small() };
        let pop = initialize(&config, TargetFunction::Identity).unwrap();
        assert_eq!(pop.len(), 1);
        let data = TargetFunction::Identity.dataset(config.n_support_points).unwrap();
        let constant = data.points.iter().map(|p| (1.0 - p.1).powi(2)).sum::<f64>() / data.points.len() as f64;
        assert!((pop[0].fitness.mse - constant).abs() < 1e-12);
    }

    #[test]
    fn initial_population_is_valid_and_seeded() {
        let config = GaConfig { population_size: 8, ..small() };
        let a = initialize(&config, TargetFunction::Relu).unwrap();
        assert_eq!(a.len(), 8);
        assert!(a.iter().all(|i| check_valid(&i.diagram)));
        let b = initialize(&config, TargetFunction::Relu).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn selection_covers_optima() {
        let config = GaConfig { population_size: 10, ..small() };
        let pop = initialize(&config, TargetFunction::Exp).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let picked = select_for_mutation(&pop, 5, &mut rng);
        assert_eq!(picked.len(), 5);
        for c in 0..4 {
            let best = pop.iter().map(|i| i.fitness.components()[c]).fold(f64::INFINITY, f64::min);
            assert!(picked.iter().any(|&i| pop[i].fitness.components()[c] == best));
        }
        let mut unique = picked.clone();
        unique.sort_unstable();
        unique.dedup();
        assert_eq!(unique.len(), 5);

        let one = &pop[..1];
        assert_eq!(select_for_mutation(one, 3, &mut rng), vec![0, 0, 0]);
    }

    #[test]
    fn no_mutation_keeps_the_initial_front() {
        let config = GaConfig {
            generations: 1,
            kind_probabilities: crate::mutations::uniform_probabilities(0.0),
            ..small()
        };
        let run = run_ga(&config, TargetFunction::Step).unwrap();
        let initial = initialize(&config, TargetFunction::Step).unwrap();
        assert_eq!(run.front, pareto_filter(initial));
        assert_eq!(run.history.len(), 2);
    }

    #[test]
    fn runs_are_reproducible_and_fronts_valid() {
        let config = small();
        let a = run_ga(&config, TargetFunction::CallOption).unwrap();
        let b = run_ga(&config, TargetFunction::CallOption).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.front, b.front);
        for ind in &a.front {
            assert!(check_valid(&ind.diagram));
            let mse = mse_at_supports(&ind.circuit, &ind.binding, &TargetFunction::CallOption, 20).unwrap();
            assert_eq!(mse, ind.fitness.mse);
        }
        for w in a.history.windows(2) {
            assert!(w[1].best_mse <= w[0].best_mse);
            assert!(w[1].best_depth <= w[0].best_depth);
        }
    }

    #[test]
    fn baseline_edits_stay_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut c = GateCircuit::new(3);
        for _ in 0..1000 {
            c = circuit_baseline_mutate(&c, &mut rng);
            assert!(c.validate().is_ok());
        }
        let mut empty = GateCircuit::new(2);
        assert_eq!(delete_gate(&mut empty, 0), None);
        let before = c.clone();
        insert_gate(&mut c, 4, Gate::H(1));
        delete_gate(&mut c, 4);
        assert_eq!(c, before);
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        assert!(GaConfig { mutation_count: 0, ..GaConfig::default() }.validate().is_err());
        assert!(GaConfig { generations: 0, ..GaConfig::default() }.validate().is_err());
        assert!(GaConfig { qubits: (3, 2), ..GaConfig::default() }.validate().is_err());
    }
}
