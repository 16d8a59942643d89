use std::path::PathBuf;

use braidwork::canonical::{canonical_pattern, layout_canonical, pattern_mismatches, CanonicalLayoutParams};
use braidwork::geometry::{bounding_volume, validate_geometry};
use braidwork::icm::{clifford_t_to_icm, parse_gates, parse_icm};
use braidwork::moves::replay;
use braidwork::optimizer::{optimize, verify_result, SearchConfig, Strategy};
use braidwork::resources::{estimate, estimate_at, Code, ErrorModel};
use braidwork::topology::linking_matrix;
use braidwork::tqc::to_tqc;

fn asset(rel: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../assets").join(rel);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn assets_compile_to_patterned_layouts() {
    for name in ["cnot2", "dist7", "dist15"] {
        let icm = parse_icm(&asset(&format!("icm/{name}.icm"))).unwrap();
        let c = layout_canonical(&icm, &CanonicalLayoutParams::default()).unwrap();
        assert!(validate_geometry(&c).is_valid(), "{name}");
        let m = linking_matrix(&c).unwrap();
        assert!(pattern_mismatches(&m, &canonical_pattern(&icm)).is_empty(), "{name}");
    }
}

#[test]
fn gates_lower_and_compile() {
    let (n, gates) = parse_gates(&asset("gates/t_then_h.gates")).unwrap();
    let icm = clifford_t_to_icm(n, &gates).unwrap();
    assert_eq!(icm.num_qubits, 5);
    let c = layout_canonical(&icm, &CanonicalLayoutParams::default()).unwrap();
    assert!(validate_geometry(&c).is_valid());
}

fn cnot2() -> braidwork::geometry::TopoCircuit {
    let icm = parse_icm(&asset("icm/cnot2.icm")).unwrap();
    layout_canonical(&icm, &CanonicalLayoutParams::default()).unwrap()
}

#[test]
fn cnot2_prices_at_forced_distance_four() {
    let c = cnot2();
    assert_eq!(bounding_volume(&c), 48);
    let model = ErrorModel::new(1e-3);
    let s = estimate_at(&c, Code::Surface, 4, &model, 1e-9).unwrap();
    assert_eq!((s.qubits, s.time_steps), (6 * 2 * 121, 4 * 5));
    let r = estimate_at(&c, Code::Raussendorf, 4, &model, 1e-9).unwrap();
    assert_eq!(r.qubits, 48 * 540);
    let auto = estimate(&c, Code::Surface, &model, 1e-9).unwrap();
    assert_eq!(auto.d % 2, 1);
}

/// Regression anchor: seeded anneal on the n=2, m=1 canonical circuit.
/// Pinned from the first verified run; a change here means search behaviour changed.
#[test]
fn anneal_anchor_on_cnot2() {
    let c = cnot2();
    let cfg = SearchConfig { strategy: Strategy::Anneal, seed: 3, max_steps: 400, ..Default::default() };
    let r = optimize(&c, &cfg);
    verify_result(&c, &r).unwrap();
    assert_eq!(r.initial_volume, 48);
    assert_eq!(r.final_volume, 36);
    assert_eq!(to_tqc(&replay(&c, &r.log).unwrap()), to_tqc(&r.final_circuit));
}
