use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zxqas::generate::{random_diagram, Generator, ProbConfig};
use zxqas::mutations::{attempt_mutation, MutationKind, MutationResult};
use zxqas::{circuit_matrix, contract, extract_circuit, to_graph_like, Binding, ZxDiagram};

fn random_binding(d: &ZxDiagram, rng: &mut ChaCha8Rng) -> Binding {
    d.symbols().into_iter().map(|s| (s, rng.gen_range(0.0..std::f64::consts::TAU))).collect()
}

fn assert_extraction_exact(d: &ZxDiagram, rng: &mut ChaCha8Rng) {
    let g = to_graph_like(d);
    let r = extract_circuit(&g).expect("extractable");
    let b = random_binding(d, rng);
    let want = contract(d, &b).unwrap();
    let got = circuit_matrix(&r.circuit, &b).unwrap();
    assert!(want.equal_up_to_scalar(&got, 1e-8), "{}", r.circuit.to_qasm());
}

#[test]
fn circuit_like_diagrams_extract_to_the_same_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for i in 0..150 {
        let q = rng.gen_range(1..=4);
        let depth = rng.gen_range(1..=25);
        let d = random_diagram(Generator::ALL[i % 3], q, depth, ProbConfig::uniform(0.6), &mut rng);
        assert_extraction_exact(&d, &mut rng);
    }
}

#[test]
fn successful_mutants_extract_to_their_own_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut successes = 0;
    for i in 0..60 {
        let q = rng.gen_range(2..=4);
        let depth = rng.gen_range(5..=20);
        let d = to_graph_like(&random_diagram(Generator::ALL[i % 3], q, depth, ProbConfig::uniform(0.5), &mut rng));
        for kind in MutationKind::ALL {
            if let MutationResult::Success(m) = attempt_mutation(&d, kind, 5, &mut rng).result {
                assert_extraction_exact(&m, &mut rng);
                successes += 1;
            }
        }
    }
    assert!(successes > 100, "{successes}");
}
