//! Library results against independent computations written here from first
//! principles: disk-crossing counts, hand-evaluated formulas, brute-force scans.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use braidwork::canonical::{canonical_volume, cnots, layout_canonical, CanonicalLayoutParams};
use braidwork::fixtures::{random_icm, random_loop, to_curve};
use braidwork::geometry::{bounding_volume, segment_points, validate_geometry, LatticePoint as P};
use braidwork::icm::IcmCircuit;
use braidwork::resources::{qubits_per_piece, select_distance, steps_per_piece, Code, ErrorModel, MAX_DISTANCE};
use braidwork::topology::{link_curves, linking_matrix, LinkingMatrix};

/// Linking number of a counterclockwise axis-parallel rectangle in the plane
/// `z = z0` with a rectilinear loop, by counting signed passes of the loop
/// through the rectangle's flat disk.
///
/// The loop is first pushed up by an infinitesimal amount, which cannot cross
/// the rectangle (a z-run reaching within epsilon below it would touch it), so
/// a run crosses the plane iff it spans from below `z0` to at least `z0`.
fn disk_crossings(rect: (i64, i64, i64, i64, i64), b: &[P]) -> i64 {
    let (x0, x1, y0, y1, z0) = rect;
    let mut total = 0;
    for i in 0..b.len() {
        let (p, q) = (b[i], b[(i + 1) % b.len()]);
        if p.x != q.x || p.y != q.y || p.z == q.z {
            continue;
        }
        let (lo, hi) = (p.z.min(q.z), p.z.max(q.z));
        let inside = x0 < p.x && p.x < x1 && y0 < p.y && p.y < y1;
        if inside && lo < z0 && z0 <= hi {
            total += if q.z > p.z { 1 } else { -1 };
        }
    }
    total
}

fn points_of(path: &[P]) -> HashSet<P> {
    (0..path.len()).flat_map(|i| segment_points(path[i], path[(i + 1) % path.len()])).collect()
}

#[test]
fn linking_matches_disk_crossings() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut nonzero = 0;
    let mut checked = 0;
    while checked < 2000 {
        let (x0, y0, z0) = (rng.random_range(2..12), rng.random_range(2..12), rng.random_range(2..16));
        let (x1, y1) = (x0 + rng.random_range(1..7), y0 + rng.random_range(1..7));
        let a = vec![P::new(x0, y0, z0), P::new(x1, y0, z0), P::new(x1, y1, z0), P::new(x0, y1, z0)];
        let b = random_loop(&mut rng, 20, 24);
        if !points_of(&a).is_disjoint(&points_of(&b)) {
            continue;
        }
        let want = disk_crossings((x0, x1, y0, y1, z0), &b);
        let got = link_curves(&to_curve(&a), &to_curve(&b)).unwrap();
        assert_eq!(got, want, "a = {a:?}\nb = {b:?}");
        nonzero += (want != 0) as usize;
        checked += 1;
    }
    assert!(nonzero > 20, "too few linked samples ({nonzero}) to mean anything");
}

/// `(2m+2) * (4n-2) * (2 if m > 0 else 1)`, written out from the layout constants.
fn hand_volume(n: i64, m: i64) -> i64 {
    let x = 2 * m + 2;
    let y = 4 * (n - 1) + 2;
    let z = if m > 0 { 2 } else { 1 };
    x * y * z
}

#[test]
fn canonical_volume_matches_layout_constants() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let mut c = random_icm(&mut rng, 6, 10);
        c.inputs.clear();
        c.outputs.clear();
        let c = rebuild_without_io(c);
        let layout = layout_canonical(&c, &CanonicalLayoutParams::default()).unwrap();
        let (n, m) = (c.num_qubits as i64, c.cnot_count() as i64);
        assert_eq!(bounding_volume(&layout), hand_volume(n, m), "n={n} m={m}");
        assert_eq!(canonical_volume(c.num_qubits, c.cnot_count()), hand_volume(n, m));
    }
    assert_eq!(hand_volume(2, 1), 48);
}

/// Re-generates init and measure events so every line is closed.
fn rebuild_without_io(c: IcmCircuit) -> IcmCircuit {
    use braidwork::icm::{IcmEvent, InitBasis, MeasureBasis};
    let mut out = IcmCircuit { name: c.name, num_qubits: c.num_qubits, ..Default::default() };
    for q in 0..c.num_qubits {
        out.events.push(IcmEvent::Init { qubit: q, basis: InitBasis::Z0 });
    }
    for (control, target) in cnots(&IcmCircuit { events: c.events, ..Default::default() }) {
        out.events.push(IcmEvent::Cnot { control, target });
    }
    for q in 0..c.num_qubits {
        out.events.push(IcmEvent::Measure { qubit: q, basis: MeasureBasis::Z, flag: None });
    }
    out
}

/// Per-line linking with ring `ring`: the line's single strand, or for a line
/// split into two open rails, rail `a` minus rail `b` (the rails joined into
/// one loop outside the box).
fn line_linking(m: &LinkingMatrix, ring: &str, q: usize) -> i64 {
    let single = format!("q{q}");
    if m.ids.contains(&single) {
        return m.get(ring, &single).unwrap();
    }
    m.get(ring, &format!("q{q}a")).unwrap() - m.get(ring, &format!("q{q}b")).unwrap()
}

#[test]
fn canonical_linking_is_ring_to_control_and_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..60 {
        let c = random_icm(&mut rng, 6, 10);
        let layout = layout_canonical(&c, &CanonicalLayoutParams::default()).unwrap();
        assert!(validate_geometry(&layout).is_valid());
        let m = linking_matrix(&layout).unwrap();
        for (k, (control, target)) in cnots(&c).into_iter().enumerate() {
            let ring = format!("c{k}");
            for q in 0..c.num_qubits {
                let want = if q == control || q == target { 1 } else { 0 };
                assert_eq!(line_linking(&m, &ring, q).abs(), want, "ring {ring} line {q} in {c:?}");
            }
        }
        for ((a, b), v) in &m.entries {
            if a.starts_with('q') == b.starts_with('q') {
                assert_eq!(*v, 0, "{a} {b}");
            }
        }
    }
}

#[test]
fn piece_formulas_match_printed_expressions() {
    for d in [4u32, 8, 12, 16] {
        let f = d as f64;
        let surface = 25.0 * f * f / 4.0 + 5.0 * f + 1.0;
        let raussendorf = 6.0 * f.powi(3) + 9.0 * f * f + 3.0 * f;
        let steps = 5.0 * f / 4.0;
        assert_eq!(qubits_per_piece(Code::Surface, d).unwrap() as f64, surface);
        assert_eq!(qubits_per_piece(Code::Raussendorf, d).unwrap() as f64, raussendorf);
        assert_eq!(steps_per_piece(Code::Surface, d).unwrap() as f64, steps);
    }
    assert_eq!(qubits_per_piece(Code::Surface, 5).unwrap(), (25.0f64 * 25.0 / 4.0).ceil() as u64 + 26);
    assert_eq!(steps_per_piece(Code::Surface, 5).unwrap(), 7);
}

/// Smallest odd d in 3..=199 passing the failure budget, by direct scan.
fn scan(volume: u64, model: &ErrorModel, eps: f64) -> Option<u32> {
    (3..=MAX_DISTANCE).step_by(2).find(|&d| {
        let exponent = (d + 1).div_ceil(2) as i32;
        volume as f64 * model.prefactor * (model.p_phys / model.p_th).powi(exponent) <= eps * (1.0 + 1e-12)
    })
}

#[test]
fn distance_matches_scan() {
    for ratio in [0.5, 0.1, 0.01] {
        for volume in [1u64, 18, 192, 10_000, 1_000_000] {
            for eps in [0.5, 1e-3, 1e-9, 1e-15] {
                let model = ErrorModel { p_phys: ratio * 0.01, ..Default::default() };
                assert_eq!(select_distance(volume, &model, eps).ok(), scan(volume, &model, eps));
            }
        }
    }
    let model = ErrorModel::new(1e-3);
    assert_eq!(select_distance(1, &model, 1e-10).unwrap(), 17);
    assert_eq!(select_distance(1_000_000, &model, 1e-10).unwrap(), 29);
}
