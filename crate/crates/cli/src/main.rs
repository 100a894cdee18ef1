//! `zxqas`: architecture search runs, mutation studies, and verification of
//! exported diagrams and circuits.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::io::CliError;

#[derive(Parser)]
#[command(name = "zxqas", version, about = "Quantum architecture search with ZX-diagram mutations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the genetic search on a regression target.
    Qas(QasArgs),
    /// Run the mutation-impact study and fit the linear models.
    Study(StudyArgs),
    /// Check that a diagram, circuit or saved front extracts and matches.
    Verify(VerifyArgs),
    /// Convert diagrams, circuits or saved fronts to QASM and JSON files.
    Export(ExportArgs),
}

/// `lo-hi` or a single value.
#[derive(Clone, Copy, Debug)]
pub struct Span(pub usize, pub usize);

fn parse_span(s: &str) -> Result<Span, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    match s.split_once(['-', ':']) {
        Some((a, b)) => Ok(Span(parse(a)?, parse(b)?)),
        None => {
            let v = parse(s)?;
            Ok(Span(v, v))
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct TrainFlags {
    /// Adam epochs per restart.
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Equidistant points used for training.
    #[arg(long)]
    pub train_points: Option<usize>,
}

#[derive(Args, Debug)]
pub struct QasArgs {
    /// Target function, e.g. call_option, step, relu.
    #[arg(long)]
    pub target: Option<String>,
    /// Qubit count or range of the random initial diagrams, e.g. 3-4.
    #[arg(long, value_parser = parse_span)]
    pub qubits: Option<Span>,
    /// Gate count or range of the random initial diagrams.
    #[arg(long, value_parser = parse_span)]
    pub depth: Option<Span>,
    #[arg(long)]
    pub generations: Option<usize>,
    #[arg(long)]
    pub population: Option<usize>,
    /// Individuals mutated per generation.
    #[arg(long)]
    pub mutation_count: Option<usize>,
    /// Per-kind probabilities, e.g. `m1=0.1,m5=0.3` or `all=0.25`.
    #[arg(long)]
    pub mutation_probs: Option<String>,
    #[arg(long)]
    pub max_trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Points at which the fitness error is measured.
    #[arg(long)]
    pub support_points: Option<usize>,
    #[command(flatten)]
    pub train: TrainFlags,
    /// Mutate gate lists directly instead of diagrams.
    #[arg(long)]
    pub baseline: bool,
    /// JSON file with a run configuration (a previous `run.json` works);
    /// flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "runs/qas")]
    pub out: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug)]
pub struct StudyArgs {
    #[arg(long)]
    pub diagrams: Option<usize>,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long, value_parser = parse_span)]
    pub qubits: Option<Span>,
    #[arg(long, value_parser = parse_span)]
    pub depth: Option<Span>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub train: TrainFlags,
    /// Use the full corpus size and repeat count of the original study.
    #[arg(long)]
    pub paper_scale: bool,
    /// Start a paper-scale study without asking.
    #[arg(long)]
    pub yes: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "runs/study")]
    pub out: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Diagram JSON, OpenQASM 2 circuit, or a `front.json`.
    pub file: PathBuf,
    /// Tolerance of the matrix comparison.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Seed for the random parameter values used in the comparison.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    /// Diagram JSON, OpenQASM 2 circuit, or a `front.json`.
    pub file: PathBuf,
    #[arg(long, default_value = "export")]
    pub out: PathBuf,
}

fn set_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Qas(args) => set_threads(args.threads).and_then(|_| commands::qas(args)),
        Command::Study(args) => set_threads(args.threads).and_then(|_| commands::study(args)),
        Command::Verify(args) => commands::verify(args),
        Command::Export(args) => commands::export(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans() {
        let Span(a, b) = parse_span("3-4").unwrap();
        assert_eq!((a, b), (3, 4));
        let Span(a, b) = parse_span("5").unwrap();
        assert_eq!((a, b), (5, 5));
        assert!(parse_span("x-4").is_err());
    }

    #[test]
    fn mutation_probs() {
        let mut p = zxqas::mutations::uniform_probabilities(0.25);
        commands::apply_probs("all=0.5, m3=0.1", &mut p).unwrap();
        assert_eq!(p[&zxqas::MutationKind::Pivot], 0.1);
        assert_eq!(p[&zxqas::MutationKind::EdgeFlip], 0.5);
        assert!(commands::apply_probs("m3", &mut p).is_err());
        assert!(commands::apply_probs("m3=high", &mut p).is_err());
    }
}
