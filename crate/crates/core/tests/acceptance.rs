//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for
//! each and exits nonzero if any failed.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zxqas::evolve::{pareto_indices, run_ga, FitnessVector, GaConfig, HISTORY_HEADER};
use zxqas::generate::{random_circuit, random_diagram, Generator, ProbConfig};
use zxqas::mutations::{attempt_mutation, MutationKind};
use zxqas::study::{
    fit_all, fit_ols, fit_standardized, ols_json, run_mutation_study, study_csv, StudyConfig, StudyRecord,
    TargetKind,
};
use zxqas::train::TrainConfig;
use zxqas::{
    check_valid, circuit_matrix, contract, diagrams_equal, extract_circuit, gflow_exists, gradient, mse, simulate,
    to_graph_like, underlying_open_graph, Binding, Dataset, GateCircuit, TargetFunction, ZxDiagram,
};

type Outcome = Result<String, String>;

fn random_binding(symbols: impl IntoIterator<Item = zxqas::SymbolId>, rng: &mut ChaCha8Rng) -> Binding {
    symbols.into_iter().map(|s| (s, rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))).collect()
}

/// 200 circuit-like diagrams on at most 4 qubits with at most 20 gates.
fn corpus() -> Vec<ZxDiagram> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..200)
        .map(|i| {
            let q = rng.gen_range(1..=4);
            let gates = rng.gen_range(1..=20);
            random_diagram(Generator::ALL[i % 3], q, gates, ProbConfig::uniform(0.6), &mut rng)
        })
        .collect()
}

fn ac1_oracle_soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (i, d) in corpus().iter().enumerate() {
        let b = random_binding(d.symbols(), &mut rng);
        let g = to_graph_like(d);
        if !g.is_graph_like() {
            return Err(format!("diagram {i}: normal form is not graph-like"));
        }
        if !diagrams_equal(d, &g, &b, 1e-9).map_err(|e| e.to_string())? {
            return Err(format!("diagram {i}: normal form changes the linear map"));
        }
    }
    let t = start.elapsed();
    if t > Duration::from_secs(60) {
        return Err(format!("took {t:.1?}"));
    }
    Ok(format!("200 diagrams, tol 1e-9, {t:.2?}"))
}

fn ac2_extraction_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (i, d) in corpus().iter().enumerate() {
        let r = extract_circuit(&to_graph_like(d)).map_err(|e| format!("diagram {i}: {e}"))?;
        let b = random_binding(d.symbols(), &mut rng);
        let want = contract(d, &b).map_err(|e| e.to_string())?;
        let got = circuit_matrix(&r.circuit, &b).map_err(|e| e.to_string())?;
        if !got.is_unitary_up_to_scalar(1e-8) {
            return Err(format!("diagram {i}: extracted map is not unitary"));
        }
        if !want.equal_up_to_scalar(&got, 1e-8) {
            return Err(format!("diagram {i}: extracted circuit differs"));
        }
    }
    Ok("200 diagrams, entrywise tol 1e-8 up to global scalar".into())
}

/// Graph-like diagrams that extract, drawn until `n` are found.
fn valid_diagrams(n: usize, seed: u64) -> Vec<ZxDiagram> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut i = 0;
    while out.len() < n {
        let q = rng.gen_range(2..=5);
        let gates = rng.gen_range(5..=30);
        let d = to_graph_like(&random_diagram(Generator::ALL[i % 3], q, gates, ProbConfig::uniform(0.5), &mut rng));
        if check_valid(&d) {
            out.push(d);
        }
        i += 1;
    }
    out
}

fn gflow_agrees(g: &ZxDiagram) -> std::result::Result<bool, String> {
    let og = underlying_open_graph(g).map_err(|e| e.to_string())?;
    Ok(gflow_exists(&og) == extract_circuit(g).is_ok())
}

fn ac3_preservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let diagrams = valid_diagrams(100, 30);
    let (mut applied, mut agreements, mut without_flow) = ([0usize; 2], 0usize, 0usize);
    for (i, d) in diagrams.iter().enumerate() {
        if !gflow_agrees(d)? {
            return Err(format!("diagram {i}: gflow and extraction disagree"));
        }
        agreements += 1;
        for (slot, kind) in [MutationKind::LocalComplementation, MutationKind::Pivot].into_iter().enumerate() {
            let Ok(m) = kind.apply(d, &mut rng) else { continue };
            applied[slot] += 1;
            if !check_valid(&m) {
                return Err(format!("diagram {i}: {kind} output is not valid"));
            }
        }
        // Raw outputs of the other mutations supply instances without gflow.
        for kind in MutationKind::ALL {
            let Ok(m) = kind.apply(d, &mut rng) else { continue };
            let g = to_graph_like(&m);
            if g.inputs() != d.inputs() || g.outputs() != d.outputs() {
                continue;
            }
            if !gflow_agrees(&g)? {
                return Err(format!("diagram {i}: gflow and extraction disagree after {kind}"));
            }
            agreements += 1;
            without_flow += usize::from(extract_circuit(&g).is_err());
        }
    }
    if applied[0] < 50 || applied[1] < 50 {
        return Err(format!("too few applications: M1 {}, M3 {}", applied[0], applied[1]));
    }
    if without_flow == 0 {
        return Err("agreement never exercised on a diagram without gflow".into());
    }
    Ok(format!(
        "M1 {}/{} valid, M3 {}/{} valid, gflow agreed on {agreements} diagrams ({without_flow} without gflow)",
        applied[0], applied[0], applied[1], applied[1]
    ))
}

fn ac4_mutation_viability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut counts = [0usize; 9];
    let n = 1000;
    for i in 0..n {
        let q = rng.gen_range(2..=5);
        let gates = rng.gen_range(5..=30);
        let d = to_graph_like(&random_diagram(Generator::ALL[i % 3], q, gates, ProbConfig::uniform(0.5), &mut rng));
        for (k, kind) in MutationKind::ALL.into_iter().enumerate() {
            counts[k] += usize::from(attempt_mutation(&d, kind, 1, &mut rng).success());
        }
    }
    let rates: Vec<String> =
        MutationKind::ALL.iter().zip(counts).map(|(k, c)| format!("{k} {:.3}", c as f64 / n as f64)).collect();
    if let Some(k) = counts.iter().position(|&c| c == 0) {
        return Err(format!("{} never succeeded; {}", MutationKind::ALL[k], rates.join(" ")));
    }

    let config = StudyConfig {
        n_diagrams: 30,
        repeats: 1,
        train: TrainConfig { epochs: 20, restarts: 1, ..TrainConfig::default() },
        train_points: 10,
        seed: 4,
        ..StudyConfig::default()
    };
    let records = run_mutation_study(&config).map_err(|e| e.to_string())?;
    let fits = fit_all(&records);
    let json: serde_json::Value = serde_json::from_str(&ols_json(&fits)).map_err(|e| e.to_string())?;
    let entries = json.as_array().ok_or("ols output is not a list")?;
    if entries.len() != 27 {
        return Err(format!("{} models instead of 27", entries.len()));
    }
    for e in entries {
        if e.get("error").is_some() {
            continue;
        }
        let coefs = e["coefficients"].as_object().ok_or("missing coefficients")?;
        let names: Vec<&str> = coefs.keys().map(String::as_str).collect();
        if !e["intercept"].is_f64() || names != ["connectivity", "qubits", "vertices"] {
            return Err(format!("malformed model {e}"));
        }
    }
    let fitted = entries.iter().filter(|e| e.get("error").is_none()).count();
    if fitted == 0 {
        return Err("no model could be fitted".into());
    }
    Ok(format!("success rates over {n}: {}; {fitted}/27 models fitted", rates.join(" ")))
}

fn ac5_gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for i in 0..50 {
        let q = rng.gen_range(1..=4);
        let gates = rng.gen_range(1..=30);
        let mut c: GateCircuit = random_circuit(Generator::ALL[i % 3], q, gates, &mut rng);
        zxqas::generate::parameterize(&mut c, ProbConfig { trainable: 0.6, input: 0.3 }, &mut rng);
        let data = Dataset::sample(|x| (3.0 * x).sin(), 7).map_err(|e| e.to_string())?;
        let b = random_binding(c.symbols().into_iter().filter(|s| !s.is_input()), &mut rng);
        let grad = gradient(&c, &b, &data).map_err(|e| e.to_string())?;
        for (s, g) in &grad {
            let mut plus = b.clone();
            let mut minus = b.clone();
            *plus.get_mut(s).unwrap() += h;
            *minus.get_mut(s).unwrap() -= h;
            let fd = (mse(&c, &plus, &data).unwrap() - mse(&c, &minus, &data).unwrap()) / (2.0 * h);
            // Floor the scale so exactly-zero gradients compare absolutely.
            let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(1e-6);
            worst = worst.max(rel);
            if rel > 1e-4 {
                return Err(format!("circuit {i}, {s}: analytic {g:e}, finite difference {fd:e}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} parameters over 50 circuits, worst relative error {worst:.2e}"))
}

fn brute_force_front(f: &[FitnessVector]) -> Vec<usize> {
    let le = |a: &FitnessVector, b: &FitnessVector| {
        a.mse <= b.mse
            && a.depth <= b.depth
            && a.two_qubit_count <= b.two_qubit_count
            && a.input_encoding_count <= b.input_encoding_count
    };
    let mut keep = Vec::new();
    for i in 0..f.len() {
        let dominated = (0..f.len()).any(|j| le(&f[j], &f[i]) && !le(&f[i], &f[j]));
        let duplicate = (0..i).any(|j| le(&f[j], &f[i]) && le(&f[i], &f[j]));
        if !dominated && !duplicate {
            keep.push(i);
        }
    }
    keep
}

fn ac6_pareto() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut kept = 0;
    for set in 0..1000 {
        let n = rng.gen_range(0..=100);
        let spread = rng.gen_range(2..=12);
        let f: Vec<FitnessVector> = (0..n)
            .map(|_| FitnessVector {
                mse: rng.gen_range(0..spread) as f64 * 0.125,
                depth: rng.gen_range(0..spread),
                two_qubit_count: rng.gen_range(0..spread),
                input_encoding_count: rng.gen_range(0..spread),
            })
            .collect();
        let got = pareto_indices(&f);
        if got != brute_force_front(&f) {
            return Err(format!("set {set} (size {n}) differs from the brute-force front"));
        }
        kept += got.len();
    }
    Ok(format!("1000 sets, {kept} front members in total"))
}

fn zscore(col: &[f64]) -> Vec<f64> {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let sd = (col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    col.iter().map(|x| (x - mean) / sd).collect()
}

fn ac7_ols() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 300;
    let features: Vec<[f64; 3]> = (0..n)
        .map(|_| [rng.gen_range(2..=5) as f64, rng.gen_range(6..=60) as f64, rng.gen_range(0.05..0.9)])
        .collect();
    let cols: Vec<Vec<f64>> = (0..3).map(|c| zscore(&features.iter().map(|f| f[c]).collect::<Vec<_>>())).collect();
    let planted = [0.5, -1.5, 2.0];
    let y: Vec<f64> = (0..n).map(|r| 1.0 + (0..3).map(|c| planted[c] * cols[c][r]).sum::<f64>()).collect();
    let (intercept, beta) = fit_standardized(&features, &y).map_err(|e| e.to_string())?;
    let coef_err = beta.iter().zip(planted).map(|(b, p)| (b - p).abs()).fold(0.0, f64::max);
    if coef_err > 1e-6 || (intercept - 1.0).abs() > 1e-6 {
        return Err(format!("planted coefficients off by {coef_err:e}, intercept {intercept}"));
    }

    // A noisy target through the record-level entry point.
    let records: Vec<StudyRecord> = features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let y = 2.0 * cols[2][i] + 1.0 + rng.gen_range(-0.3..0.3);
            StudyRecord {
                diagram_id: i,
                qubits: f[0] as usize,
                vertices: f[1] as usize,
                connectivity: f[2],
                kind: MutationKind::EdgeFlip,
                repeat: 0,
                success: true,
                mse_before: vec![y],
                mse_after: Some(vec![0.0]),
            }
        })
        .collect();
    let mean = records.iter().map(|r| r.mse_before[0]).sum::<f64>() / n as f64;
    let m = fit_ols(&records, MutationKind::EdgeFlip, TargetKind::ImprovementOnlySuccess).map_err(|e| e.to_string())?;
    if (m.intercept - mean).abs() > 1e-10 {
        return Err(format!("intercept {} differs from mean {mean}", m.intercept));
    }
    Ok(format!("planted coefficients within {coef_err:.1e}, intercept equals mean within 1e-10"))
}

/// Independent copy of the call-option target at spot `50 + 100 x`.
fn call_option(x: f64) -> f64 {
    let s = 50.0 + 100.0 * x;
    (s - 100.0).max(0.0) / 25.0 - 1.0
}

fn ac8_desk_qas() -> Outcome {
    let start = Instant::now();
    let config = GaConfig { seed: 8, ..GaConfig::default() };
    if config.population_size != 20 || config.generations != 30 || config.qubits != (3, 4) {
        return Err("default configuration drifted from population 20, 30 generations, 3-4 qubits".into());
    }
    let run = run_ga(&config, TargetFunction::CallOption).map_err(|e| e.to_string())?;
    let t = start.elapsed();

    let n = config.n_support_points;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| call_option(x)).collect();
    let mean = ys.iter().sum::<f64>() / n as f64;
    let baseline = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n as f64;

    let best = run.front.iter().min_by(|a, b| a.fitness.mse.total_cmp(&b.fitness.mse)).ok_or("empty front")?;
    let mut resimulated = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let p = simulate(&best.circuit, &best.binding, *x).map_err(|e| e.to_string())?;
        resimulated += (p - y).powi(2) / n as f64;
    }
    if (resimulated - best.fitness.mse).abs() > 1e-9 * baseline.max(1.0) {
        return Err(format!("stored mse {} but re-simulated {resimulated}", best.fitness.mse));
    }
    let ratio = resimulated / baseline;

    let complexity = |f: &FitnessVector| [f.depth, f.two_qubit_count, f.input_encoding_count];
    let mut trade_offs = 0;
    for a in &run.front {
        for b in &run.front {
            let cheaper = complexity(&b.fitness).iter().zip(complexity(&a.fitness)).any(|(x, y)| *x < y);
            if a.fitness.mse < b.fitness.mse && cheaper && !a.fitness.dominates(&b.fitness) {
                trade_offs += 1;
            }
        }
    }
    let summary = format!(
        "best mse {resimulated:.4} = {ratio:.3} of constant baseline {baseline:.4}, front {}, {trade_offs} trade-off pairs, {t:.1?}",
        run.front.len()
    );
    if ratio > 0.5 || trade_offs == 0 || run.front.len() < 2 || t > Duration::from_secs(15 * 60) {
        return Err(summary);
    }
    Ok(summary)
}

fn ga_outputs(config: &GaConfig) -> std::result::Result<(String, String), String> {
    let run = run_ga(config, TargetFunction::Relu).map_err(|e| e.to_string())?;
    let mut csv = format!("{HISTORY_HEADER}\n");
    for r in &run.history {
        csv.push_str(&r.csv_line());
        csv.push('\n');
    }
    let json = serde_json::to_string_pretty(&run.front).map_err(|e| e.to_string())?;
    Ok((csv, json))
}

fn ac9_determinism() -> Outcome {
    let config = GaConfig {
        population_size: 8,
        mutation_count: 5,
        generations: 4,
        train: TrainConfig { epochs: 30, restarts: 1, ..TrainConfig::default() },
        seed: 9,
        ..GaConfig::default()
    };
    let first = ga_outputs(&config)?;
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let second = single.install(|| ga_outputs(&config))?;
    if first != second {
        return Err("search outputs differ between runs".into());
    }

    let study = StudyConfig {
        n_diagrams: 6,
        repeats: 2,
        train: TrainConfig { epochs: 10, restarts: 1, ..TrainConfig::default() },
        train_points: 8,
        seed: 9,
        ..StudyConfig::default()
    };
    let outputs = || -> std::result::Result<(String, String), String> {
        let records = run_mutation_study(&study).map_err(|e| e.to_string())?;
        Ok((study_csv(&records), ols_json(&fit_all(&records))))
    };
    let a = outputs()?;
    let b = single.install(outputs)?;
    if a != b {
        return Err("study outputs differ between runs".into());
    }
    Ok(format!("search ({} bytes) and study ({} bytes) outputs identical across runs and thread counts", first.0.len() + first.1.len(), a.0.len() + a.1.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("oracle soundness", ac1_oracle_soundness),
        ("extraction round trip", ac2_extraction_round_trip),
        ("M1/M3 preserve validity", ac3_preservation),
        ("mutation viability", ac4_mutation_viability),
        ("gradient correctness", ac5_gradients),
        ("pareto correctness", ac6_pareto),
        ("OLS correctness", ac7_ols),
        ("desk-scale search", ac8_desk_qas),
        ("determinism", ac9_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("AC{} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("AC{} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
