//! Canonical (unoptimized) geometry for an ICM circuit: one primal rail loop
//! per qubit line and one dual ring per CNOT.
//!
//! With the default parameters, qubit `i` is the rectangle with rails at
//! `y = 4i` and `y = 4i + 2` in the plane `z = 0`, spanning `x` in `[0, 2m + 2]`.
//! CNOT `k` is a ring in the plane `x = 2k + 1` spanning `y` in
//! `[4c + 1, 4t + 1]` (`c < t` after sorting) and `z` in `[-1, 1]`. The ring's
//! two vertical sides pierce the loops of its control and target; every loop in
//! between crosses the ring's disk twice with opposite signs.
//!
//! Input lines drop their `x = 0` side and output lines their `x = max` side;
//! the open ends become ports. A line that is both input and output becomes
//! two open rails, `q<i>a` and `q<i>b`.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::geometry::{Bounds, DefectStrand, LatticePoint as P, PortFace, PortLabel, StrandKind, TopoCircuit};
use crate::icm::{validate_icm, IcmCircuit, IcmEvent};
use crate::topology::signature::pair_key;
use crate::topology::LinkingMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CanonicalLayoutParams {
    /// z-extent of a CNOT ring and y-distance between the two rails of a loop.
    pub rail_gap: i64,
    /// y-distance between neighbouring qubit loops.
    pub qubit_pitch: i64,
    /// x-distance between neighbouring CNOT rings.
    pub slot_pitch: i64,
    /// Free space declared around the layout in y and z, for moves to use.
    pub margin: i64,
}

impl Default for CanonicalLayoutParams {
    fn default() -> Self {
        Self { rail_gap: 2, qubit_pitch: 4, slot_pitch: 2, margin: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("invalid ICM circuit: {0}")]
    InvalidCircuit(String),
    #[error("layout parameters must be even and at least 2, with qubit_pitch > rail_gap")]
    InvalidParams,
}

pub fn qubit_strand_id(q: usize) -> String {
    format!("q{q}")
}

pub fn ring_strand_id(k: usize) -> String {
    format!("c{k}")
}

/// The CNOTs of `c` in event order.
pub fn cnots(c: &IcmCircuit) -> Vec<(usize, usize)> {
    c.events
        .iter()
        .filter_map(|e| match e {
            IcmEvent::Cnot { control, target } => Some((*control, *target)),
            _ => None,
        })
        .collect()
}

pub fn layout_canonical(c: &IcmCircuit, p: &CanonicalLayoutParams) -> Result<TopoCircuit, LayoutError> {
    let even = |v: i64| v >= 2 && v % 2 == 0;
    if !(even(p.rail_gap) && even(p.qubit_pitch) && even(p.slot_pitch)) || p.qubit_pitch <= p.rail_gap || p.margin < 0 {
        return Err(LayoutError::InvalidParams);
    }
    if let Some(issue) = validate_icm(c).into_iter().next() {
        return Err(LayoutError::InvalidCircuit(issue.message));
    }

    let gates = cnots(c);
    let x_max = p.slot_pitch * (gates.len() as i64 + 1);
    let half = p.rail_gap / 2;
    let y_top = p.qubit_pitch * (c.num_qubits.max(1) as i64 - 1) + p.rail_gap;
    let mut circuit = TopoCircuit::new(Bounds::new(
        P::new(0, -p.margin, -half - p.margin),
        P::new(x_max, y_top + p.margin, half + p.margin),
    ));

    for q in 0..c.num_qubits {
        let (ya, yb) = (p.qubit_pitch * q as i64, p.qubit_pitch * q as i64 + p.rail_gap);
        let (a0, a1) = (P::new(0, ya, 0), P::new(x_max, ya, 0));
        let (b0, b1) = (P::new(0, yb, 0), P::new(x_max, yb, 0));
        let id = qubit_strand_id(q);
        let (input, output) = (c.inputs.contains(&q), c.outputs.contains(&q));
        let mut port = |name: String, position: P, face: PortFace| {
            circuit.ports.push(PortLabel { name: name.clone(), position, face });
            name
        };
        let strands = match (input, output) {
            (false, false) => vec![DefectStrand::closed(id, StrandKind::Primal, vec![a0, a1, b1, b0])],
            (true, false) => {
                let (pa, pb) = (port(format!("{id}.in.a"), a0, PortFace::Input), port(format!("{id}.in.b"), b0, PortFace::Input));
                vec![DefectStrand::open(id, StrandKind::Primal, vec![a0, a1, b1, b0], pa, pb)]
            }
            (false, true) => {
                let (pa, pb) = (port(format!("{id}.out.a"), a1, PortFace::Output), port(format!("{id}.out.b"), b1, PortFace::Output));
                vec![DefectStrand::open(id, StrandKind::Primal, vec![a1, a0, b0, b1], pa, pb)]
            }
            (true, true) => {
                let ia = port(format!("{id}.in.a"), a0, PortFace::Input);
                let oa = port(format!("{id}.out.a"), a1, PortFace::Output);
                let ib = port(format!("{id}.in.b"), b0, PortFace::Input);
                let ob = port(format!("{id}.out.b"), b1, PortFace::Output);
                vec![
                    DefectStrand::open(format!("{id}a"), StrandKind::Primal, vec![a0, a1], ia, oa),
                    DefectStrand::open(format!("{id}b"), StrandKind::Primal, vec![b0, b1], ib, ob),
                ]
            }
        };
        let init = c.init_basis(q).map(|b| b.to_string()).unwrap_or_else(|| "input".into());
        let (measure, flag) = match c.measurement(q) {
            Some((b, f)) => (b.to_string(), f.map(str::to_string)),
            None => ("output".into(), None),
        };
        for mut s in strands {
            s = s.with_meta("qubit", q.to_string()).with_meta("init", init.clone()).with_meta("measure", measure.clone());
            if let Some(f) = &flag {
                s = s.with_meta("flag", f.clone());
            }
            circuit.strands.push(s);
        }
    }

    for (k, &(control, target)) in gates.iter().enumerate() {
        let x = p.slot_pitch * k as i64 + p.slot_pitch / 2;
        let (lo, hi) = (control.min(target) as i64, control.max(target) as i64);
        let (y0, y1) = (p.qubit_pitch * lo + half, p.qubit_pitch * hi + half);
        let ring = DefectStrand::closed(
            ring_strand_id(k),
            StrandKind::Dual,
            vec![P::new(x, y0, -half), P::new(x, y1, -half), P::new(x, y1, half), P::new(x, y0, half)],
        )
        .with_meta("cnot", k.to_string())
        .with_meta("control", control.to_string())
        .with_meta("target", target.to_string());
        circuit.strands.push(ring);
    }
    Ok(circuit)
}

/// The strand pairs that must have linking number of magnitude 1 in
/// `layout_canonical(c, _)`; every other pair must be 0.
///
/// For two-rail lines, rail `a` (low y) is threaded by a ring iff
/// `lo < q <= hi` and rail `b` iff `lo <= q < hi`: each open rail is closed
/// on its own over the top of the circuit, so it counts once per ring that
/// spans it.
pub fn canonical_pattern(c: &IcmCircuit) -> BTreeSet<(String, String)> {
    let mut linked = BTreeSet::new();
    for (k, (control, target)) in cnots(c).into_iter().enumerate() {
        let ring = ring_strand_id(k);
        let (lo, hi) = (control.min(target), control.max(target));
        for q in 0..c.num_qubits {
            let through = c.inputs.contains(&q) && c.outputs.contains(&q);
            if !through {
                if q == lo || q == hi {
                    linked.insert(pair_key(&ring, &qubit_strand_id(q)));
                }
                continue;
            }
            if lo < q && q <= hi {
                linked.insert(pair_key(&ring, &format!("{}a", qubit_strand_id(q))));
            }
            if lo <= q && q < hi {
                linked.insert(pair_key(&ring, &format!("{}b", qubit_strand_id(q))));
            }
        }
    }
    linked
}

/// Compares a computed linking matrix with [`canonical_pattern`]; returns the mismatching pairs.
pub fn pattern_mismatches(m: &LinkingMatrix, pattern: &BTreeSet<(String, String)>) -> Vec<((String, String), i64)> {
    let mut bad = Vec::new();
    for (key, &v) in &m.entries {
        let want = if pattern.contains(key) { 1 } else { 0 };
        if v.abs() != want {
            bad.push((key.clone(), v));
        }
    }
    for key in pattern {
        if !m.entries.contains_key(key) {
            bad.push((key.clone(), 0));
        }
    }
    bad
}

/// Closed-form tight volume of the default layout of an I/O-free circuit with
/// `n` lines and `m` CNOTs.
pub fn canonical_volume(n: usize, m: usize) -> i64 {
    let (n, m) = (n as i64, m as i64);
    let z = if m >= 1 { 2 } else { 1 };
    (2 * m + 2) * (4 * n - 2) * z
}
