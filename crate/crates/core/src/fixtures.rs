//! Generated circuits for property tests, fuzzing and benchmarks.
//!
//! Everything here is driven by a caller-supplied RNG, so a seed pins the output.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::geometry::{
    normalize_path, occupied_pieces, segment_len, segment_points, validate_geometry, Axis, Closure, DefectStrand,
    LatticePoint as P, StrandKind, TopoCircuit,
};
use crate::icm::{IcmCircuit, IcmEvent, InitBasis, MeasureBasis};
use crate::topology::Vec3;

/// Corner list as `f64` points, for the raw linking backends.
pub fn to_curve(path: &[P]) -> Vec<Vec3> {
    path.iter().map(P::as_f64).collect()
}

fn loop_points(path: &[P]) -> Vec<P> {
    let n = path.len();
    (0..n)
        .flat_map(|i| {
            let (a, b) = (path[i], path[(i + 1) % n]);
            segment_points(a, b).take(segment_len(a, b) as usize)
        })
        .collect()
}

/// Normalizes `path` as a closed loop and rejects self-intersections.
fn simple_loop(path: &[P], max_vertices: usize) -> Option<Vec<P>> {
    let v = normalize_path(path, Closure::Closed)?;
    if v.len() > max_vertices {
        return None;
    }
    let pts = loop_points(&v);
    let distinct: HashSet<P> = pts.iter().copied().collect();
    (distinct.len() == pts.len()).then_some(v)
}

fn random_point(rng: &mut impl Rng, side: i64) -> P {
    P::new(rng.random_range(0..side), rng.random_range(0..side), rng.random_range(0..side))
}

/// Joins waypoints with axis-ordered staircases (a random axis order per leg).
fn staircase_loop(rng: &mut impl Rng, waypoints: &[P]) -> Vec<P> {
    let mut path = Vec::new();
    let n = waypoints.len();
    for i in 0..n {
        let (from, to) = (waypoints[i], waypoints[(i + 1) % n]);
        let mut axes = Axis::ALL;
        axes.shuffle(rng);
        let mut cur = from;
        path.push(cur);
        for ax in axes {
            cur = cur.with_coord(ax, to.coord(ax));
            path.push(cur);
        }
    }
    path
}

/// A random simple rectilinear loop inside `[0, side)^3` with at most `max_vertices` corners.
pub fn random_loop(rng: &mut impl Rng, side: i64, max_vertices: usize) -> Vec<P> {
    loop {
        let k = rng.random_range(2..=max_vertices.div_ceil(3).clamp(2, 6));
        let waypoints: Vec<P> = (0..k).map(|_| random_point(rng, side)).collect();
        if let Some(v) = simple_loop(&staircase_loop(rng, &waypoints), max_vertices) {
            return v;
        }
    }
}

/// A loop that encircles the lattice point `p` in the plane normal to `axis`,
/// sometimes with one side lifted out of that plane.
fn loop_around(rng: &mut impl Rng, p: P, axis: Axis, side: i64) -> Vec<P> {
    let others: Vec<Axis> = Axis::ALL.into_iter().filter(|&a| a != axis).collect();
    let (u, v) = (others[0], others[1]);
    let lo_u = (p.coord(u) - rng.random_range(1..=4)).max(0);
    let hi_u = (p.coord(u) + rng.random_range(1..=4)).min(side - 1);
    let lo_v = (p.coord(v) - rng.random_range(1..=4)).max(0);
    let hi_v = (p.coord(v) + rng.random_range(1..=4)).min(side - 1);
    let at = |a: i64, b: i64| p.with_coord(u, a).with_coord(v, b);
    let mut path = vec![at(lo_u, lo_v), at(hi_u, lo_v), at(hi_u, hi_v), at(lo_u, hi_v)];
    if rng.random_bool(0.5) {
        // Lift one side out of the plane.
        let lift = rng.random_range(-3..=3);
        let w = (p.coord(axis) + lift).clamp(0, side - 1);
        let (a, b) = (path[0], path[1]);
        path.splice(1..1, [a.with_coord(axis, w), b.with_coord(axis, w)]);
    }
    path
}

/// Two disjoint random loops. About half the pairs are built with the second
/// loop encircling a point of the first, so nonzero linking numbers are common.
pub fn random_loop_pair(rng: &mut impl Rng, side: i64, max_vertices: usize) -> (Vec<P>, Vec<P>) {
    loop {
        let a = random_loop(rng, side, max_vertices);
        let b = if rng.random_bool(0.5) {
            let pts = loop_points(&a);
            let i = rng.random_range(0..a.len());
            let (s, e) = (a[i], a[(i + 1) % a.len()]);
            let axis = s.axis_to(&e).expect("normalized loops are rectilinear");
            let p = pts[rng.random_range(0..pts.len())];
            let p = if crate::geometry::segment_contains(s, e, p) { p } else { s };
            match simple_loop(&loop_around(rng, p, axis, side), max_vertices) {
                Some(b) => b,
                None => continue,
            }
        } else {
            random_loop(rng, side, max_vertices)
        };
        let occupied: HashSet<P> = loop_points(&a).into_iter().collect();
        if loop_points(&b).iter().all(|p| !occupied.contains(p)) {
            return (a, b);
        }
    }
}

/// A random valid ICM circuit with `1..=max_n` lines and `0..=max_m` CNOTs.
/// Lines are inputs or outputs with probability 1/4 each.
pub fn random_icm(rng: &mut impl Rng, max_n: usize, max_m: usize) -> IcmCircuit {
    let n = rng.random_range(1..=max_n.max(1));
    let m = if n < 2 { 0 } else { rng.random_range(0..=max_m) };
    let mut c = IcmCircuit { name: "random".into(), num_qubits: n, ..Default::default() };
    for q in 0..n {
        if rng.random_bool(0.25) {
            c.inputs.insert(q);
        }
        if rng.random_bool(0.25) {
            c.outputs.insert(q);
        }
    }
    let bases = [InitBasis::Z0, InitBasis::XPlus, InitBasis::A, InitBasis::Y];
    for q in (0..n).filter(|q| !c.inputs.contains(q)) {
        c.events.push(IcmEvent::Init { qubit: q, basis: bases[rng.random_range(0..bases.len())] });
    }
    for _ in 0..m {
        let control = rng.random_range(0..n);
        let mut target = rng.random_range(0..n - 1);
        if target >= control {
            target += 1;
        }
        c.events.push(IcmEvent::Cnot { control, target });
    }
    for q in (0..n).filter(|q| !c.outputs.contains(q)) {
        let basis = if rng.random_bool(0.5) { MeasureBasis::Z } else { MeasureBasis::X };
        c.events.push(IcmEvent::Measure { qubit: q, basis, flag: None });
    }
    c
}

fn fits(c: &TopoCircuit, s: &DefectStrand) -> bool {
    let mut next = c.clone();
    next.strands.push(s.clone());
    validate_geometry(&next).is_valid()
}

/// Adds `count` small unlinked closed loops `deco<i>` in free space.
///
/// Loops are 1x1 or 1x2 rectangles: no lattice segment can pass through their
/// interior, so they link nothing. Returns `None` if space runs out.
pub fn add_decorations(c: &TopoCircuit, count: usize, rng: &mut impl Rng) -> Option<TopoCircuit> {
    let mut out = c.clone();
    let (lo, hi) = (c.bounds.min, c.bounds.max);
    for i in 0..count {
        let id = format!("deco{i}");
        let placed = (0..1000).find_map(|_| {
            let mut axes = Axis::ALL;
            axes.shuffle(rng);
            let (u, v) = (axes[0], axes[1]);
            let (du, dv) = (1, rng.random_range(1..=2));
            let base = P::new(
                rng.random_range(lo.x..=hi.x),
                rng.random_range(lo.y..=hi.y),
                rng.random_range(lo.z..=hi.z),
            );
            let at = |a: i64, b: i64| base.with_coord(u, base.coord(u) + a).with_coord(v, base.coord(v) + b);
            let kind = if rng.random_bool(0.5) { StrandKind::Primal } else { StrandKind::Dual };
            let s = DefectStrand::closed(id.clone(), kind, vec![at(0, 0), at(du, 0), at(du, dv), at(0, dv)])
                .with_meta("decoration", "true");
            fits(&out, &s).then_some(s)
        })?;
        out.strands.push(placed);
    }
    Some(out)
}

/// Inserts a depth-1 hairpin (a width-1 finger) strictly inside segment `seg`
/// of strand `idx`, at offset `t` from the segment start, bulging along `dir`.
pub fn insert_hairpin(c: &TopoCircuit, idx: usize, seg: usize, t: i64, dir: P) -> Option<TopoCircuit> {
    let s = &c.strands[idx];
    let (a, b) = s.segment(seg);
    let len = segment_len(a, b);
    if t < 1 || t + 2 > len {
        return None;
    }
    let d = b - a;
    let u = P::new(d.x.signum(), d.y.signum(), d.z.signum());
    if dir.manhattan() != 1 || (u.x * dir.x + u.y * dir.y + u.z * dir.z) != 0 {
        return None;
    }
    let p0 = a + u * t;
    let p1 = a + u * (t + 1);
    let mut path = s.path.clone();
    path.splice(seg + 1..seg + 1, [p0, p0 + dir, p1 + dir, p1]);
    let mut next = c.clone();
    next.strands[idx].path = normalize_path(&path, s.closure)?;
    validate_geometry(&next).is_valid().then_some(next)
}

/// Adds `k` hairpins at random positions. Returns `None` if placement fails.
pub fn add_hairpins(c: &TopoCircuit, k: usize, rng: &mut impl Rng) -> Option<TopoCircuit> {
    let mut out = c.clone();
    for _ in 0..k {
        let next = (0..1000).find_map(|_| {
            let idx = rng.random_range(0..out.strands.len());
            let s = &out.strands[idx];
            if s.segment_count() == 0 {
                return None;
            }
            let seg = rng.random_range(0..s.segment_count());
            let (a, b) = s.segment(seg);
            let len = segment_len(a, b);
            if len < 3 {
                return None;
            }
            let t = rng.random_range(1..=len - 2);
            let axis = a.axis_to(&b)?;
            let perp: Vec<P> = Axis::ALL
                .into_iter()
                .filter(|&ax| ax != axis)
                .flat_map(|ax| [ax.unit(), ax.unit() * -1])
                .collect();
            let dir = perp[rng.random_range(0..perp.len())];
            insert_hairpin(&out, idx, seg, t, dir)
        })?;
        out = next;
    }
    Some(out)
}

/// Number of occupied lattice points.
pub fn occupied_cells(c: &TopoCircuit) -> usize {
    occupied_pieces(c).len()
}
