use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use zxqas::evolve::{run_baseline_ga_with, run_ga_with, GaConfig, Individual, HISTORY_HEADER};
use zxqas::extract::extract_any;
use zxqas::mutations::MutationKind;
use zxqas::report::{improvement_chart, ols_chart};
use zxqas::study::{
    fit_all, improvement_by_function, improvement_csv, ols_json, run_mutation_study, study_csv, StudyConfig,
    TargetKind,
};
use zxqas::{circuit_matrix, contract, target, Binding, GateCircuit, TargetFunction, ZxDiagram};

use crate::io::{create_dir, read_text, write_atomic, CliError, CliResult};
use crate::{ExportArgs, QasArgs, Span, StudyArgs, TrainFlags, VerifyArgs};

const ORACLE_MAX_QUBITS: usize = 4;

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Reads a config file. `section` picks the sub-object when the file is a
/// saved `run.json`; otherwise the whole file is the config.
fn load_config(path: &Path, section: &str) -> CliResult<(Value, Option<String>)> {
    let text = read_text(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::io(path, e))?;
    let target = value.get("target").and_then(Value::as_str).map(String::from);
    match value.get(section) {
        Some(inner) => Ok((inner.clone(), target)),
        None => Ok((value, target)),
    }
}

fn parse_config<T: serde::de::DeserializeOwned>(path: &Path, value: Value) -> CliResult<T> {
    serde_json::from_value(value).map_err(|e| CliError::io(path, e))
}

fn apply_train(flags: &TrainFlags, train: &mut zxqas::TrainConfig, points: &mut usize) {
    if let Some(v) = flags.epochs {
        train.epochs = v;
    }
    if let Some(v) = flags.restarts {
        train.restarts = v;
    }
    if let Some(v) = flags.lr {
        train.lr = v;
    }
    if let Some(v) = flags.train_points {
        *points = v;
    }
}

fn span(s: Option<Span>, into: &mut (usize, usize)) {
    if let Some(Span(a, b)) = s {
        *into = (a, b);
    }
}

/// Applies `m1=0.1,m5=0.3` or `all=0.25` on top of `probs`.
pub(crate) fn apply_probs(spec: &str, probs: &mut zxqas::mutations::KindProbabilities) -> CliResult {
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("--mutation-probs: expected key=value, got `{part}`")))?;
        let p: f64 =
            v.trim().parse().map_err(|e| CliError::usage(format!("--mutation-probs: `{v}`: {e}")))?;
        if k.trim().eq_ignore_ascii_case("all") {
            for kind in MutationKind::ALL {
                probs.insert(kind, p);
            }
        } else {
            let kind: MutationKind = k.trim().parse().map_err(|e: zxqas::Error| CliError::usage(e.to_string()))?;
            probs.insert(kind, p);
        }
    }
    Ok(())
}

fn ga_config(args: &QasArgs) -> CliResult<(GaConfig, TargetFunction)> {
    let (mut config, file_target) = match &args.config {
        Some(path) => {
            let (value, t) = load_config(path, "ga")?;
            (parse_config::<GaConfig>(path, value)?, t)
        }
        None => (GaConfig::default(), None),
    };
    let name = args.target.clone().or(file_target).unwrap_or_else(|| "call_option".to_string());
    let target = target(&name)?;
    span(args.qubits, &mut config.qubits);
    span(args.depth, &mut config.depth);
    if let Some(v) = args.generations {
        config.generations = v;
    }
    if let Some(v) = args.population {
        config.population_size = v;
    }
    if let Some(v) = args.mutation_count {
        config.mutation_count = v;
    }
    if let Some(v) = args.max_trials {
        config.max_trials = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.support_points {
        config.n_support_points = v;
    }
    if let Some(spec) = &args.mutation_probs {
        apply_probs(spec, &mut config.kind_probabilities)?;
    }
    apply_train(&args.train, &mut config.train, &mut config.train_points);
    config.validate()?;
    Ok((config, target))
}

fn front_json(generation: usize, individuals: &[Individual]) -> String {
    to_json(&json!({ "generation": generation, "individuals": individuals }))
}

/// Writes `member_###.{qasm,json,binding.json}` for each individual.
fn export_individuals(dir: &Path, individuals: &[Individual]) -> CliResult {
    create_dir(dir)?;
    for (i, ind) in individuals.iter().enumerate() {
        let stem = format!("member_{i:03}");
        write_atomic(&dir.join(format!("{stem}.qasm")), ind.circuit.to_qasm().as_bytes())?;
        write_atomic(&dir.join(format!("{stem}.json")), to_json(&ind.diagram).as_bytes())?;
        write_atomic(&dir.join(format!("{stem}.binding.json")), to_json(&ind.binding).as_bytes())?;
    }
    Ok(())
}

fn front_table(front: &[Individual]) -> String {
    let mut order: Vec<&Individual> = front.iter().collect();
    order.sort_by(|a, b| a.fitness.mse.total_cmp(&b.fitness.mse));
    let mut s = format!("{:>4}  {:>12}  {:>5}  {:>9}  {:>9}  lineage\n", "#", "mse", "depth", "two_qubit", "encodings");
    for (i, ind) in order.iter().enumerate() {
        let f = ind.fitness;
        let lineage: Vec<String> = ind.lineage.iter().map(|k| k.to_string()).collect();
        let _ = writeln!(
            s,
            "{:>4}  {:>12.6}  {:>5}  {:>9}  {:>9}  {}",
            i,
            f.mse,
            f.depth,
            f.two_qubit_count,
            f.input_encoding_count,
            lineage.join(" ")
        );
    }
    s
}

pub fn qas(args: QasArgs) -> CliResult {
    let (config, target) = ga_config(&args)?;
    let out = args.out.as_path();
    create_dir(out)?;
    let run = json!({
        "command": "qas",
        "target": target.name(),
        "formula": target.formula(),
        "baseline": args.baseline,
        "ga": config,
    });
    write_atomic(&out.join("run.json"), to_json(&run).as_bytes())?;

    let mut failure = None;
    let on_generation = |gen: usize, front: &[Individual]| {
        if failure.is_none() {
            failure = write_generation(out, gen, front).err();
        }
    };
    let result = if args.baseline {
        run_baseline_ga_with(&config, target, on_generation)?
    } else {
        run_ga_with(&config, target, on_generation)?
    };
    if let Some(e) = failure {
        return Err(e);
    }

    let mut history = format!("{HISTORY_HEADER}\n");
    for rec in &result.history {
        history.push_str(&rec.csv_line());
        history.push('\n');
    }
    write_atomic(&out.join("history.csv"), history.as_bytes())?;
    export_individuals(&out.join("circuits"), &result.front)?;
    print!("{}", front_table(&result.front));
    println!("wrote {}", out.display());
    Ok(())
}

fn write_generation(out: &Path, gen: usize, front: &[Individual]) -> CliResult {
    let dir = out.join(format!("gen_{gen:04}"));
    create_dir(&dir)?;
    write_atomic(&dir.join("front.json"), front_json(gen, front).as_bytes())
}

fn study_config(args: &StudyArgs) -> CliResult<StudyConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let (value, _) = load_config(path, "study")?;
            parse_config::<StudyConfig>(path, value)?
        }
        None => StudyConfig::default(),
    };
    if args.paper_scale {
        config = config.paper_scale();
    }
    if let Some(v) = args.diagrams {
        config.n_diagrams = v;
    }
    if let Some(v) = args.repeats {
        config.repeats = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    span(args.qubits, &mut config.qubits);
    span(args.depth, &mut config.depth);
    apply_train(&args.train, &mut config.train, &mut config.train_points);
    config.validate()?;
    Ok(config)
}

pub fn study(args: StudyArgs) -> CliResult {
    let config = study_config(&args)?;
    if args.paper_scale {
        println!(
            "paper-scale study: {} diagrams x {} mutations x {} repeats = {} mutation attempts",
            config.n_diagrams,
            MutationKind::ALL.len(),
            config.repeats,
            config.attempts()
        );
        if !args.yes {
            println!("pass --yes to start it");
            return Ok(());
        }
    }
    let out = args.out.as_path();
    create_dir(out)?;
    let run = json!({ "command": "study", "study": config });
    write_atomic(&out.join("run.json"), to_json(&run).as_bytes())?;

    let records = run_mutation_study(&config)?;
    write_atomic(&out.join("study.csv"), study_csv(&records).as_bytes())?;
    let fits = fit_all(&records);
    write_atomic(&out.join("ols.json"), format!("{}\n", ols_json(&fits)).as_bytes())?;
    let matrix = improvement_by_function(&records);
    write_atomic(&out.join("improvement_matrix.csv"), improvement_csv(&matrix).as_bytes())?;

    let models: Vec<_> = fits.iter().filter_map(|(_, _, r)| r.as_ref().ok().cloned()).collect();
    let charts = [
        (TargetKind::Success, "ols_success.svg", "Mutation success"),
        (TargetKind::ImprovementWithFailures, "ols_improvement_with_failures.svg", "Improvement, failures as zero"),
        (TargetKind::ImprovementOnlySuccess, "ols_improvement_only_success.svg", "Improvement, successes only"),
    ];
    for (tk, file, title) in charts {
        write_atomic(&out.join(file), ols_chart(&models, tk, title).as_bytes())?;
    }
    write_atomic(&out.join("improvement.svg"), improvement_chart(&matrix).as_bytes())?;

    for kind in MutationKind::ALL {
        let rows: Vec<_> = records.iter().filter(|r| r.kind == kind).collect();
        let ok = rows.iter().filter(|r| r.success).count();
        println!("{kind} success {ok}/{}", rows.len());
    }
    println!("wrote {}", out.display());
    Ok(())
}

enum Loaded {
    Diagram(ZxDiagram),
    Circuit(GateCircuit),
    Front(Vec<Individual>),
}

fn load(path: &Path) -> CliResult<Loaded> {
    let text = read_text(path)?;
    let parse_err = |e: &dyn std::fmt::Display| CliError::usage(format!("{}: parse error: {e}", path.display()));
    if text.trim_start().starts_with("OPENQASM") {
        return GateCircuit::from_qasm(&text).map(Loaded::Circuit).map_err(|e| parse_err(&e));
    }
    let value: Value = serde_json::from_str(&text).map_err(|e| parse_err(&e))?;
    let individuals = match &value {
        Value::Object(m) if m.contains_key("individuals") => Some(m["individuals"].clone()),
        Value::Array(_) => Some(value.clone()),
        _ => None,
    };
    match individuals {
        Some(v) => serde_json::from_value(v).map(Loaded::Front).map_err(|e| parse_err(&e)),
        None => serde_json::from_value(value).map(Loaded::Diagram).map_err(|e| parse_err(&e)),
    }
}

fn random_binding(symbols: impl IntoIterator<Item = zxqas::SymbolId>, rng: &mut ChaCha8Rng) -> Binding {
    symbols.into_iter().map(|s| (s, rng.gen_range(-3.0..3.0))).collect()
}

/// Extracts `diagram` and compares it with `circuit` (the extracted one when
/// absent) under a random binding.
fn check(diagram: &ZxDiagram, circuit: Option<&GateCircuit>, tol: f64, rng: &mut ChaCha8Rng) -> Result<String, String> {
    diagram.validate().map_err(|e| e.to_string())?;
    let extracted = extract_any(diagram).map_err(|e| format!("extraction failed: {e}"))?;
    let circuit = circuit.unwrap_or(&extracted.circuit);
    let m = circuit.metrics();
    let metrics = format!("depth={} two_qubit={} encodings={}", m.depth, m.two_qubit_count, m.input_encoding_count);
    if diagram.qubit_count() > ORACLE_MAX_QUBITS {
        return Ok(format!("{metrics} (oracle skipped above {ORACLE_MAX_QUBITS} qubits)"));
    }
    let binding = random_binding(diagram.symbols().into_iter().chain(circuit.symbols()), rng);
    let a = contract(diagram, &binding).map_err(|e| e.to_string())?;
    let b = circuit_matrix(circuit, &binding).map_err(|e| e.to_string())?;
    if a.equal_up_to_scalar(&b, tol) {
        Ok(metrics)
    } else {
        Err(format!("circuit differs from diagram ({metrics})"))
    }
}

pub fn verify(args: VerifyArgs) -> CliResult {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let results: Vec<(String, Result<String, String>)> = match load(&args.file)? {
        Loaded::Diagram(d) => vec![("diagram".into(), check(&d, None, args.tol, &mut rng))],
        Loaded::Circuit(c) => vec![("circuit".into(), check(&c.to_diagram(), Some(&c), args.tol, &mut rng))],
        Loaded::Front(inds) => inds
            .iter()
            .enumerate()
            .map(|(i, ind)| (format!("member {i}"), check(&ind.diagram, Some(&ind.circuit), args.tol, &mut rng)))
            .collect(),
    };
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(m) => println!("PASS {name} {m}"),
            Err(e) => {
                failed += 1;
                println!("FAIL {name} {e}");
            }
        }
    }
    if failed > 0 {
        return Err(CliError::verify(format!("{failed} of {} checks failed", results.len())));
    }
    Ok(())
}

pub fn export(args: ExportArgs) -> CliResult {
    let out = args.out.as_path();
    let stem = args.file.file_stem().and_then(|s| s.to_str()).unwrap_or("export").to_string();
    match load(&args.file)? {
        Loaded::Diagram(d) => {
            let extracted = extract_any(&d)?;
            create_dir(out)?;
            write_atomic(&out.join(format!("{stem}.qasm")), extracted.circuit.to_qasm().as_bytes())?;
        }
        Loaded::Circuit(c) => {
            create_dir(out)?;
            write_atomic(&out.join(format!("{stem}.json")), to_json(&c.to_diagram()).as_bytes())?;
        }
        Loaded::Front(inds) => export_individuals(out, &inds)?,
    }
    println!("wrote {}", out.display());
    Ok(())
}
