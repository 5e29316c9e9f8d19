use std::path::PathBuf;

use cheshire_core::duality::DualityParams;
use cheshire_core::optics::{build_setup, run_circuit, source_state, Circuit, Detector, NdFilter};

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/setup_alpha45_nd_pr.json")
}

fn reference_circuit() -> Circuit {
    let p = DualityParams::new(45f64.to_radians()).unwrap();
    let nd = NdFilter {
        target: "PR".parse().unwrap(),
        transmission: 0.99,
    };
    build_setup(&p, Some(nd)).unwrap()
}

#[test]
fn circuit_matches_golden_file() {
    let json = reference_circuit().to_json();
    let path = golden_path();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &json).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("golden file present");
    assert_eq!(json, golden);
}

#[test]
fn golden_file_runs() {
    let c = Circuit::from_json(&std::fs::read_to_string(golden_path()).unwrap()).unwrap();
    let out = run_circuit(&c, &source_state()).unwrap();
    // N₀ = 1/2, N(t) = (1 + (√0.99 − 1)/2)²
    let expected = 0.5 * (1.0 + (0.99f64.sqrt() - 1.0) / 2.0).powi(2);
    assert!((out.probability(Detector::D1) - expected).abs() < 1e-14);
    assert!((out.total() - 1.0).abs() < 1e-12);
}
