//! Signature-preserving rewrites: slides, same-strand bridges and null-loop deletion.
//!
//! A slide translates one segment of a strand perpendicular to itself. The
//! moved segment `P-Q` is replaced by `P-P'-Q'-Q` with `P' = P + k v`,
//! `Q' = Q + k v`, and the path is re-normalized, which creates or cancels
//! corners. It is legal when the closed rectangle swept by the segment holds
//! no point of another strand and no point of its own strand outside the
//! segment and its two neighbours. That is the discrete form of moving a
//! piece of string without cutting it, so no linking number can change; a
//! distance-`k` slide is the same as `k` unit slides in a row.
//!
//! A bridge cuts a strand along two antiparallel segments one unit apart and
//! reconnects across the gap, splitting the strand in two. One half must be
//! port-free and unlinked from everything; it is dropped, the other half
//! keeps the strand id. The band between the two segments holds no lattice
//! point, so the survivor links every other strand exactly as before.
//!
//! `DeleteLoop` removes a closed, port-free strand whose linking row is zero.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    normalize_path, segment_contains, segment_len, segment_points, validate_strand, Closure, DefectStrand,
    Direction, LatticePoint, Occupancy, TopoCircuit, ValidityReport, Violation, ViolationCode,
};
use crate::topology::{linking_in_frame, ClosureFrame, LinkingError};
use crate::tqc::circuit_digest;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Move {
    Slide { strand: String, segment: usize, direction: Direction, distance: u32 },
    Bridge { strand: String, segment_a: usize, segment_b: usize },
    DeleteLoop { strand: String },
}

impl Move {
    pub fn strand(&self) -> &str {
        match self {
            Move::Slide { strand, .. } | Move::Bridge { strand, .. } | Move::DeleteLoop { strand } => strand,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Move::Slide { .. } => "slide",
            Move::Bridge { .. } => "bridge",
            Move::DeleteLoop { .. } => "delete",
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Slide { strand, segment, direction, distance } => {
                let v = direction.vector();
                write!(f, "slide {strand} {segment} {} {} {} {distance}", v.x, v.y, v.z)
            }
            Move::Bridge { strand, segment_a, segment_b } => write!(f, "bridge {strand} {segment_a} {segment_b}"),
            Move::DeleteLoop { strand } => write!(f, "delete {strand}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum MoveError {
    #[error("unknown strand {0}")]
    UnknownStrand(String),
    #[error("strand {strand} has no segment {segment}")]
    BadSegment { strand: String, segment: usize },
    #[error("direction is parallel to segment {segment} of strand {strand}")]
    NotPerpendicular { strand: String, segment: usize },
    #[error("slide distance must be at least 1")]
    ZeroDistance,
    #[error("move blocked: {0}")]
    Blocked(ValidityReport),
    #[error("strand {0} would collapse")]
    Collapse(String),
    #[error("strand carries ports: {0}")]
    CarriesPorts(String),
    #[error("nonzero linking row: {strand} links {other} ({lk})")]
    NonzeroLinking { strand: String, other: String, lk: i64 },
    #[error("segments {a} and {b} of {strand} are not antiparallel and one unit apart")]
    NotFacing { strand: String, a: usize, b: usize },
    #[error("would change signature: neither half of bridged strand {0} is null")]
    WouldChangeSignature(String),
    #[error(transparent)]
    Linking(#[from] LinkingError),
}

impl MoveError {
    /// Stable short code for protocol responses.
    pub fn code(&self) -> &'static str {
        match self {
            MoveError::UnknownStrand(_) => "unknown_strand",
            MoveError::BadSegment { .. } => "bad_segment",
            MoveError::NotPerpendicular { .. } => "not_perpendicular",
            MoveError::ZeroDistance => "zero_distance",
            MoveError::Blocked(_) => "blocked",
            MoveError::Collapse(_) => "collapse",
            MoveError::CarriesPorts(_) => "carries_ports",
            MoveError::NonzeroLinking { .. } => "nonzero_linking_row",
            MoveError::NotFacing { .. } => "not_facing",
            MoveError::WouldChangeSignature(_) => "would_change_signature",
            MoveError::Linking(_) => "linking",
        }
    }
}

fn strand_index(c: &TopoCircuit, id: &str) -> Result<usize, MoveError> {
    c.strand_index(id).ok_or_else(|| MoveError::UnknownStrand(id.to_string()))
}

fn slide_path(s: &DefectStrand, segment: usize, v: LatticePoint) -> Vec<LatticePoint> {
    let (p, q) = s.segment(segment);
    let mut path = s.path.clone();
    path.splice(segment + 1..segment + 1, [p + v, q + v]);
    path
}

fn with_path(s: &DefectStrand, path: Vec<LatticePoint>) -> DefectStrand {
    DefectStrand { path, ..s.clone() }
}

/// Checks a slide against a prebuilt occupancy index; on success returns the moved strand.
fn slide_with(
    c: &TopoCircuit,
    occ: &Occupancy,
    idx: usize,
    segment: usize,
    direction: Direction,
    distance: u32,
) -> Result<DefectStrand, MoveError> {
    let s = &c.strands[idx];
    if segment >= s.segment_count() {
        return Err(MoveError::BadSegment { strand: s.id.clone(), segment });
    }
    if distance == 0 {
        return Err(MoveError::ZeroDistance);
    }
    let (p, q) = s.segment(segment);
    if p.axis_to(&q) == Some(direction.axis()) {
        return Err(MoveError::NotPerpendicular { strand: s.id.clone(), segment });
    }
    let v = direction.vector() * distance as i64;

    let mut report = ValidityReport::default();
    for corner in [p + v, q + v] {
        if let Some((axis, upper)) = c.bounds.violated_face(&corner) {
            report.push(Violation::new(
                ViolationCode::OutOfBounds,
                &[&s.id],
                &[corner],
                format!("slide leaves the bounds through the {}{axis:?} face", if upper { "+" } else { "-" }),
            ));
            return Err(MoveError::Blocked(report));
        }
    }

    let n = s.segment_count();
    let neighbours: Vec<(LatticePoint, LatticePoint)> = match s.closure {
        Closure::Closed => vec![s.segment((segment + n - 1) % n), s.segment(segment), s.segment((segment + 1) % n)],
        Closure::Open => [segment.checked_sub(1), Some(segment), Some(segment + 1).filter(|&i| i < n)]
            .into_iter()
            .flatten()
            .map(|i| s.segment(i))
            .collect(),
    };
    let len = segment_len(p, q);
    let step = direction.vector();
    let mut own: Option<HashSet<LatticePoint>> = None;
    for base in segment_points(p, q).take(len as usize + 1) {
        for j in 0..=distance as i64 {
            let x = base + step * j;
            match occ.owner(&x) {
                Some(o) if o != idx => {
                    let other = &c.strands[o].id;
                    report.push(Violation::new(
                        ViolationCode::BlockedSweep,
                        &[&s.id, other],
                        &[x],
                        format!("sweep of {} segment {segment} hits strand {other} at {x}", s.id),
                    ));
                    return Err(MoveError::Blocked(report));
                }
                Some(_) => {
                    if neighbours.iter().any(|&(a, b)| segment_contains(a, b, x)) {
                        continue;
                    }
                    let own = own.get_or_insert_with(|| s.points().into_iter().collect());
                    if own.contains(&x) {
                        report.push(Violation::new(
                            ViolationCode::BlockedSweep,
                            &[&s.id],
                            &[x],
                            format!("sweep of {} segment {segment} hits its own strand at {x}", s.id),
                        ));
                        return Err(MoveError::Blocked(report));
                    }
                }
                None => {}
            }
        }
    }

    let path = normalize_path(&slide_path(s, segment, v), s.closure).ok_or_else(|| MoveError::Collapse(s.id.clone()))?;
    let moved = with_path(s, path);
    let r = validate_strand(&moved, &c.bounds, &c.ports);
    if !r.is_valid() {
        return Err(MoveError::Blocked(r));
    }
    Ok(moved)
}

/// Sweep and validity diagnostics for a slide; empty when the slide is legal.
pub fn check_slide(c: &TopoCircuit, strand: &str, segment: usize, direction: Direction, distance: u32) -> ValidityReport {
    let fail = |code, message: String| {
        let mut r = ValidityReport::default();
        r.push(Violation::new(code, &[strand], &[], message));
        r
    };
    let idx = match c.strand_index(strand) {
        Some(i) => i,
        None => return fail(ViolationCode::PortMismatch, format!("unknown strand {strand}")),
    };
    match slide_with(c, &Occupancy::build(c), idx, segment, direction, distance) {
        Ok(_) => ValidityReport::default(),
        Err(MoveError::Blocked(r)) => r,
        Err(e) => fail(ViolationCode::BlockedSweep, e.to_string()),
    }
}

/// The two pieces of a strand cut by a bridge.
struct Halves {
    /// Closed piece between the two cut segments (`None` if it degenerates away).
    middle: Option<Vec<LatticePoint>>,
    /// The rest; open if the strand was open.
    outer: Option<Vec<LatticePoint>>,
}

fn bridge_halves(s: &DefectStrand, a: usize, b: usize) -> Option<Halves> {
    let n = s.segment_count();
    if a == b || a >= n || b >= n {
        return None;
    }
    let (i, j) = (a.min(b), a.max(b));
    let (a0, a1) = s.segment(i);
    let (b0, b1) = s.segment(j);
    let axis = a0.axis_to(&a1)?;
    if b0.axis_to(&b1) != Some(axis) {
        return None;
    }
    let unit = |d: LatticePoint| LatticePoint::new(d.x.signum(), d.y.signum(), d.z.signum());
    let u = unit(a1 - a0);
    if unit(b1 - b0) != -u {
        return None;
    }
    let along = |p: LatticePoint| p.coord(axis) - a0.coord(axis);
    let e = (b0 - a0).with_coord(axis, 0);
    if e.manhattan() != 1 {
        return None;
    }
    let sign = u.coord(axis);
    let t = |p: LatticePoint| along(p) * sign;
    let lo = 0.max(t(b1));
    let hi = t(a1).min(t(b0));
    if hi - lo < 1 {
        return None;
    }
    let a_lo = a0 + u * lo;
    let a_hi = a0 + u * hi;
    let (b_lo, b_hi) = (a_lo + e, a_hi + e);

    let mut middle = vec![a_hi];
    middle.extend_from_slice(&s.path[i + 1..=j]);
    middle.push(b_hi);

    let outer = match s.closure {
        Closure::Closed => {
            let mut v = vec![b_lo];
            v.extend((j + 1..j + 1 + (n - j - 1) + i + 1).map(|k| s.path[k % n]));
            v.push(a_lo);
            normalize_path(&v, Closure::Closed)
        }
        Closure::Open => {
            let mut v = s.path[..=i].to_vec();
            v.push(a_lo);
            v.push(b_lo);
            v.extend_from_slice(&s.path[j + 1..]);
            normalize_path(&v, Closure::Open)
        }
    };
    Some(Halves { middle: normalize_path(&middle, Closure::Closed), outer })
}

fn first_nonzero_link(
    c: &TopoCircuit,
    frame: &ClosureFrame,
    strand: &DefectStrand,
    skip: usize,
    extra: Option<&DefectStrand>,
) -> Result<Option<(String, i64)>, MoveError> {
    let others = c.strands.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, s)| s).chain(extra);
    for other in others {
        let lk = linking_in_frame(strand, other, frame, true)?;
        if lk != 0 {
            return Ok(Some((other.id.clone(), lk)));
        }
    }
    Ok(None)
}

fn bridge_with(c: &TopoCircuit, frame: &ClosureFrame, idx: usize, a: usize, b: usize) -> Result<Option<DefectStrand>, MoveError> {
    let s = &c.strands[idx];
    let n = s.segment_count();
    for seg in [a, b] {
        if seg >= n {
            return Err(MoveError::BadSegment { strand: s.id.clone(), segment: seg });
        }
    }
    let halves = bridge_halves(s, a, b).ok_or_else(|| MoveError::NotFacing { strand: s.id.clone(), a, b })?;
    let closed_half = |path: &Vec<LatticePoint>| DefectStrand::closed(format!("{}~", s.id), s.kind, path.clone());
    let survivor = |path: Vec<LatticePoint>| with_path(s, path);

    let null = |piece: &DefectStrand, sibling: Option<&DefectStrand>| -> Result<bool, MoveError> {
        Ok(first_nonzero_link(c, frame, piece, idx, sibling)?.is_none())
    };

    let kept = match (halves.middle, halves.outer) {
        (None, None) => return Err(MoveError::Collapse(s.id.clone())),
        (None, Some(outer)) => Some(survivor(outer)),
        (Some(middle), None) if s.is_closed() => Some(survivor(middle)),
        (Some(_), None) => return Err(MoveError::Collapse(s.id.clone())),
        (Some(middle), Some(outer)) => {
            let mid = closed_half(&middle);
            let out = if s.is_closed() { closed_half(&outer) } else { survivor(outer.clone()) };
            if null(&mid, Some(&out))? {
                Some(survivor(outer))
            } else if s.is_closed() && null(&out, Some(&mid))? {
                Some(survivor(middle))
            } else {
                return Err(MoveError::WouldChangeSignature(s.id.clone()));
            }
        }
    };
    if let Some(k) = &kept {
        let r = validate_strand(k, &c.bounds, &c.ports);
        if !r.is_valid() {
            return Err(MoveError::Blocked(r));
        }
    }
    Ok(kept)
}

fn delete_check(c: &TopoCircuit, frame: &ClosureFrame, idx: usize) -> Result<(), MoveError> {
    let s = &c.strands[idx];
    if !s.is_closed() || !s.ports.is_empty() {
        return Err(MoveError::CarriesPorts(s.id.clone()));
    }
    if let Some((other, lk)) = first_nonzero_link(c, frame, s, idx, None)? {
        return Err(MoveError::NonzeroLinking { strand: s.id.clone(), other, lk });
    }
    Ok(())
}

fn replace_strand(c: &TopoCircuit, idx: usize, s: Option<DefectStrand>) -> TopoCircuit {
    let mut out = c.clone();
    match s {
        Some(s) => out.strands[idx] = s,
        None => {
            out.strands.remove(idx);
        }
    }
    out
}

/// Runs the checks for `m` and returns the rewritten circuit.
pub fn apply_move(c: &TopoCircuit, m: &Move) -> Result<TopoCircuit, MoveError> {
    let idx = strand_index(c, m.strand())?;
    match m {
        Move::Slide { segment, direction, distance, .. } => {
            let moved = slide_with(c, &Occupancy::build(c), idx, *segment, *direction, *distance)?;
            Ok(replace_strand(c, idx, Some(moved)))
        }
        Move::Bridge { segment_a, segment_b, .. } => {
            let kept = bridge_with(c, &ClosureFrame::of(c), idx, *segment_a, *segment_b)?;
            Ok(replace_strand(c, idx, kept))
        }
        Move::DeleteLoop { .. } => {
            delete_check(c, &ClosureFrame::of(c), idx)?;
            Ok(replace_strand(c, idx, None))
        }
    }
}

/// Validity of `m` without building the result circuit.
pub fn check_move(c: &TopoCircuit, m: &Move) -> Result<(), MoveError> {
    apply_move(c, m).map(|_| ())
}

/// Performs the geometric rewrite of `m` with no legality checks. Only
/// parameter lookups can fail; the result may be invalid or change the
/// signature. Used to show that the checks are not vacuous.
pub fn force_apply(c: &TopoCircuit, m: &Move) -> Option<TopoCircuit> {
    let idx = c.strand_index(m.strand())?;
    let s = &c.strands[idx];
    match m {
        Move::Slide { segment, direction, distance, .. } => {
            if *segment >= s.segment_count() {
                return None;
            }
            let path = slide_path(s, *segment, direction.vector() * *distance as i64);
            let path = normalize_path(&path, s.closure).unwrap_or(path);
            Some(replace_strand(c, idx, Some(with_path(s, path))))
        }
        Move::Bridge { segment_a, segment_b, .. } => {
            let h = bridge_halves(s, *segment_a, *segment_b)?;
            let kept = h.outer.or(h.middle).map(|p| with_path(s, p));
            Some(replace_strand(c, idx, kept))
        }
        Move::DeleteLoop { .. } => Some(replace_strand(c, idx, None)),
    }
}

/// Every candidate move shape, legal or not, in enumeration order: strands by
/// id, segments ascending, directions `-x +x -y +y -z +z`, distances ascending
/// up to the bounds; then bridges by segment pair; then deletions.
pub fn enumerate_candidates(c: &TopoCircuit) -> Vec<Move> {
    let mut out = Vec::new();
    let mut order: Vec<&DefectStrand> = c.strands.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    for s in &order {
        for seg in 0..s.segment_count() {
            let (p, q) = s.segment(seg);
            for d in Direction::ALL {
                if p.axis_to(&q) == Some(d.axis()) {
                    continue;
                }
                for k in 1..=room(c, p, d) {
                    out.push(Move::Slide { strand: s.id.clone(), segment: seg, direction: d, distance: k as u32 });
                }
            }
        }
    }
    for s in &order {
        let n = s.segment_count();
        for a in 0..n {
            for b in a + 1..n {
                out.push(Move::Bridge { strand: s.id.clone(), segment_a: a, segment_b: b });
            }
        }
    }
    for s in &order {
        out.push(Move::DeleteLoop { strand: s.id.clone() });
    }
    out
}

fn room(c: &TopoCircuit, p: LatticePoint, d: Direction) -> i64 {
    let a = d.axis();
    if d.sign() > 0 {
        c.bounds.max.coord(a) - p.coord(a)
    } else {
        p.coord(a) - c.bounds.min.coord(a)
    }
}

fn facing_pair(s: &DefectStrand, a: usize, b: usize) -> bool {
    bridge_halves(s, a, b).is_some()
}

/// Legal moves in enumeration order (see [`enumerate_candidates`]), at most `budget`.
pub fn enumerate_moves(c: &TopoCircuit, budget: usize) -> Vec<Move> {
    enumerate_with_results(c, budget).into_iter().map(|(m, _)| m).collect()
}

/// Legal moves paired with the circuits they produce.
pub fn enumerate_with_results(c: &TopoCircuit, budget: usize) -> Vec<(Move, TopoCircuit)> {
    let mut out = Vec::new();
    if budget == 0 {
        return out;
    }
    let occ = Occupancy::build(c);
    let frame = ClosureFrame::of(c);
    let mut order: Vec<usize> = (0..c.strands.len()).collect();
    order.sort_by(|&a, &b| c.strands[a].id.cmp(&c.strands[b].id));

    for &idx in &order {
        let s = &c.strands[idx];
        for seg in 0..s.segment_count() {
            let (p, q) = s.segment(seg);
            for d in Direction::ALL {
                if p.axis_to(&q) == Some(d.axis()) {
                    continue;
                }
                for k in 1..=room(c, p, d) {
                    match slide_with(c, &occ, idx, seg, d, k as u32) {
                        Ok(moved) => {
                            let m = Move::Slide { strand: s.id.clone(), segment: seg, direction: d, distance: k as u32 };
                            out.push((m, replace_strand(c, idx, Some(moved))));
                            if out.len() >= budget {
                                return out;
                            }
                        }
                        // a blocked sweep stays blocked at larger distances
                        Err(MoveError::Blocked(r)) if r.has(ViolationCode::BlockedSweep) || r.has(ViolationCode::OutOfBounds) => break,
                        Err(_) => {}
                    }
                }
            }
        }
    }
    for &idx in &order {
        let s = &c.strands[idx];
        let n = s.segment_count();
        for a in 0..n {
            for b in a + 1..n {
                if !facing_pair(s, a, b) {
                    continue;
                }
                if let Ok(kept) = bridge_with(c, &frame, idx, a, b) {
                    out.push((Move::Bridge { strand: s.id.clone(), segment_a: a, segment_b: b }, replace_strand(c, idx, kept)));
                    if out.len() >= budget {
                        return out;
                    }
                }
            }
        }
    }
    for &idx in &order {
        if c.strands[idx].is_closed() && delete_check(c, &frame, idx).is_ok() {
            out.push((Move::DeleteLoop { strand: c.strands[idx].id.clone() }, replace_strand(c, idx, None)));
            if out.len() >= budget {
                return out;
            }
        }
    }
    out
}

/// A move sequence against a base circuit, identified by the digest of its `.tqc` bytes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveLog {
    pub base: String,
    pub moves: Vec<Move>,
    /// Free-text notes keyed by move id (the move's index in `moves`).
    pub annotations: BTreeMap<usize, String>,
}

impl MoveLog {
    pub fn for_base(c: &TopoCircuit) -> Self {
        Self { base: circuit_digest(c), ..Default::default() }
    }

    /// `.moves` text: `base <hex>`, one move per line, then `note <id> <text>` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("base {}\n", self.base);
        for m in &self.moves {
            out.push_str(&format!("{m}\n"));
        }
        for (id, text) in &self.annotations {
            out.push_str(&format!("note {id} {text}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, MovesFormatError> {
        let mut log = MoveLog::default();
        let mut saw_base = false;
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let err = |message: String| MovesFormatError { line, message };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let w: Vec<&str> = trimmed.split_whitespace().collect();
            if !saw_base {
                if w[0] != "base" || w.len() != 2 {
                    return Err(err("first line must be \"base <hex digest>\"".into()));
                }
                log.base = w[1].to_string();
                saw_base = true;
                continue;
            }
            if w[0] == "note" {
                let id = w.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| err("bad move id".into()))?;
                let text = trimmed.splitn(3, char::is_whitespace).nth(2).unwrap_or("").trim();
                log.annotations.insert(id, text.to_string());
                continue;
            }
            log.moves.push(trimmed.parse().map_err(err)?);
        }
        if !saw_base {
            return Err(MovesFormatError { line: 1, message: "missing base line".into() });
        }
        Ok(log)
    }
}

impl std::str::FromStr for Move {
    type Err = String;

    /// One `.moves` record: `slide <strand> <seg> <dx dy dz> <dist>`,
    /// `bridge <strand> <segA> <segB>` or `delete <strand>`.
    fn from_str(line: &str) -> Result<Self, String> {
        let w: Vec<&str> = line.split_whitespace().collect();
        let int = |k: usize| -> Result<i64, String> {
            w.get(k).and_then(|s| s.parse().ok()).ok_or_else(|| format!("expected an integer in \"{line}\""))
        };
        let index = |k: usize| usize::try_from(int(k)?).map_err(|_| format!("negative index in \"{line}\""));
        match w.first().copied() {
            Some("slide") if w.len() == 7 => {
                let v = LatticePoint::new(int(3)?, int(4)?, int(5)?);
                let direction = Direction::from_vector(v).ok_or("direction must be a unit lattice vector")?;
                let distance = u32::try_from(int(6)?).map_err(|_| "distance out of range".to_string())?;
                Ok(Move::Slide { strand: w[1].to_string(), segment: index(2)?, direction, distance })
            }
            Some("bridge") if w.len() == 4 => {
                Ok(Move::Bridge { strand: w[1].to_string(), segment_a: index(2)?, segment_b: index(3)? })
            }
            Some("delete") if w.len() == 2 => Ok(Move::DeleteLoop { strand: w[1].to_string() }),
            _ => Err(format!("unrecognized move \"{line}\"")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct MovesFormatError {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ReplayError {
    #[error("base digest mismatch: log expects {expected}, circuit is {actual}")]
    HashMismatch { expected: String, actual: String },
    #[error("step {step} ({mv}) rejected: {error}")]
    Step { step: usize, mv: String, error: MoveError },
}

/// Re-applies `log` to `base`, checking every step.
pub fn replay(base: &TopoCircuit, log: &MoveLog) -> Result<TopoCircuit, ReplayError> {
    let actual = circuit_digest(base);
    if actual != log.base {
        return Err(ReplayError::HashMismatch { expected: log.base.clone(), actual });
    }
    let mut c = base.clone();
    for (step, m) in log.moves.iter().enumerate() {
        c = apply_move(&c, m).map_err(|error| ReplayError::Step { step, mv: m.to_string(), error })?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{occupied_pieces, validate_geometry, Axis, Bounds, LatticePoint as P, StrandKind};
    use crate::topology::{signature, signatures_equal};

    fn rect(id: &str, kind: StrandKind, pts: [(i64, i64, i64); 4]) -> DefectStrand {
        DefectStrand::closed(id, kind, pts.iter().map(|&(x, y, z)| P::new(x, y, z)).collect())
    }

    fn square() -> TopoCircuit {
        TopoCircuit::new(Bounds::from_extents(10, 10, 10))
            .with_strand(rect("a", StrandKind::Primal, [(4, 4, 5), (6, 4, 5), (6, 6, 5), (4, 6, 5)]))
    }

    fn same_signature(a: &TopoCircuit, b: &TopoCircuit) -> bool {
        signatures_equal(&signature(a).unwrap(), &signature(b).unwrap()).is_equal()
    }

    #[test]
    fn outward_slide_grows_the_rectangle() {
        let c = square();
        let m = Move::Slide { strand: "a".into(), segment: 0, direction: Direction::NegY, distance: 1 };
        let out = apply_move(&c, &m).unwrap();
        assert_eq!(out.strands[0].path, vec![P::new(4, 3, 5), P::new(6, 3, 5), P::new(6, 6, 5), P::new(4, 6, 5)]);
        assert!(validate_geometry(&out).is_valid());
        assert!(same_signature(&c, &out));
    }

    #[test]
    fn square_has_all_eight_in_plane_slides() {
        let c = square();
        let moves = enumerate_moves(&c, usize::MAX);
        let in_plane: Vec<_> = moves
            .iter()
            .filter(|m| matches!(m, Move::Slide { direction, distance: 1, .. } if direction.axis() != Axis::Z))
            .collect();
        // each edge can move outward and inward by one
        assert_eq!(in_plane.len(), 8);
        for m in &moves {
            assert!(check_move(&c, m).is_ok());
        }
        assert!(moves.contains(&Move::DeleteLoop { strand: "a".into() }));
    }

    #[test]
    fn inward_slide_by_full_width_collapses() {
        let c = square();
        let m = Move::Slide { strand: "a".into(), segment: 0, direction: Direction::PosY, distance: 2 };
        let err = apply_move(&c, &m).unwrap_err();
        assert!(matches!(err, MoveError::Collapse(_) | MoveError::Blocked(_)), "{err}");
        let half = Move::Slide { strand: "a".into(), segment: 0, direction: Direction::PosY, distance: 1 };
        assert!(apply_move(&c, &half).is_ok());
    }

    #[test]
    fn blocked_by_a_perpendicular_strand() {
        let c = square().with_strand(rect("b", StrandKind::Dual, [(5, 2, 4), (5, 3, 4), (5, 3, 6), (5, 2, 6)]));
        assert!(validate_geometry(&c).is_valid());
        let r = check_slide(&c, "a", 0, Direction::NegY, 1);
        assert!(r.has(ViolationCode::BlockedSweep));
        assert!(r.violations[0].strands.contains(&"b".to_string()));
        assert_eq!(r.violations[0].points, vec![P::new(5, 3, 5)]);

        let forced = force_apply(&c, &Move::Slide { strand: "a".into(), segment: 0, direction: Direction::NegY, distance: 2 }).unwrap();
        assert!(!validate_geometry(&forced).is_valid() || !same_signature(&c, &forced));
    }

    #[test]
    fn flattening_a_detour() {
        // square with a one-deep notch on its bottom edge
        let path = vec![(0, 0), (2, 0), (2, 1), (3, 1), (3, 0), (5, 0), (5, 4), (0, 4)];
        let s = DefectStrand::closed("a", StrandKind::Primal, path.iter().map(|&(x, y)| P::new(x, y, 2)).collect());
        let c = TopoCircuit::new(Bounds::from_extents(8, 8, 4)).with_strand(s);
        assert!(validate_geometry(&c).is_valid());
        let m = Move::Slide { strand: "a".into(), segment: 2, direction: Direction::NegY, distance: 1 };
        let out = apply_move(&c, &m).unwrap();
        assert_eq!(out.strands[0].path.len(), 4);
        assert!(occupied_pieces(&out).len() < occupied_pieces(&c).len());
        assert!(same_signature(&c, &out));
    }

    #[test]
    fn slide_and_inverse_restore_points() {
        let c = square();
        let m = Move::Slide { strand: "a".into(), segment: 1, direction: Direction::PosX, distance: 2 };
        let out = apply_move(&c, &m).unwrap();
        let seg = (0..out.strands[0].segment_count())
            .find(|&i| {
                let (p, q) = out.strands[0].segment(i);
                p.x == 8 && q.x == 8
            })
            .unwrap();
        let back = apply_move(&out, &Move::Slide { strand: "a".into(), segment: seg, direction: Direction::NegX, distance: 2 }).unwrap();
        assert_eq!(occupied_pieces(&back), occupied_pieces(&c));
    }

    #[test]
    fn delete_rules() {
        let c = square();
        let out = apply_move(&c, &Move::DeleteLoop { strand: "a".into() }).unwrap();
        assert!(out.strands.is_empty());
        assert!(same_signature(&c, &out));

        // Hopf pair: neither may be deleted
        let c = square().with_strand(rect("b", StrandKind::Dual, [(5, 5, 4), (5, 8, 4), (5, 8, 6), (5, 5, 6)]));
        assert!(validate_geometry(&c).is_valid());
        assert!(matches!(apply_move(&c, &Move::DeleteLoop { strand: "b".into() }), Err(MoveError::NonzeroLinking { .. })));
    }

    fn corridor_loop() -> TopoCircuit {
        // rectangle with a doubled-back corridor sticking up from its top edge
        let path = vec![(0, 0), (6, 0), (6, 3), (3, 3), (3, 7), (2, 7), (2, 3), (0, 3)];
        let s = DefectStrand::closed("a", StrandKind::Primal, path.iter().map(|&(x, y)| P::new(x + 1, y + 1, 2)).collect());
        TopoCircuit::new(Bounds::from_extents(10, 10, 4)).with_strand(s)
    }

    #[test]
    fn bridge_removes_a_corridor() {
        let c = corridor_loop();
        assert!(validate_geometry(&c).is_valid());
        let out = apply_move(&c, &Move::Bridge { strand: "a".into(), segment_a: 3, segment_b: 5 }).unwrap();
        assert!(validate_geometry(&out).is_valid());
        assert_eq!(out.strands[0].path.len(), 4);
        assert!(occupied_pieces(&out).len() < occupied_pieces(&c).len());
        assert!(crate::geometry::bounding_volume(&out) < crate::geometry::bounding_volume(&c));
        assert!(same_signature(&c, &out));
        let moves = enumerate_moves(&c, usize::MAX);
        assert!(moves.contains(&Move::Bridge { strand: "a".into(), segment_a: 3, segment_b: 5 }));
    }

    #[test]
    fn bridge_refuses_when_both_halves_link() {
        // two lobes joined by a one-wide neck, each lobe threaded by a ring
        let path = [(0, 0), (4, 0), (4, 2), (8, 2), (8, 0), (12, 0), (12, 5), (8, 5), (8, 3), (4, 3), (4, 4), (0, 4)];
        let s = DefectStrand::closed("a", StrandKind::Primal, path.iter().map(|&(x, y)| P::new(x, y, 2)).collect());
        let c = TopoCircuit::new(Bounds::from_extents(14, 10, 4))
            .with_strand(s)
            .with_strand(rect("r1", StrandKind::Dual, [(2, 2, 1), (2, 6, 1), (2, 6, 3), (2, 2, 3)]))
            .with_strand(rect("r2", StrandKind::Dual, [(10, 2, 1), (10, 7, 1), (10, 7, 3), (10, 2, 3)]));
        let r = validate_geometry(&c);
        assert!(r.is_valid(), "{r}");
        let bridge = Move::Bridge { strand: "a".into(), segment_a: 2, segment_b: 8 };
        let res = apply_move(&c, &bridge);
        assert!(matches!(res, Err(MoveError::WouldChangeSignature(_))), "{res:?}");

        // without the second ring the far lobe is null and goes away
        let mut c2 = c.clone();
        c2.strands.pop();
        let out = apply_move(&c2, &bridge).unwrap();
        assert_eq!(out.strands[0].path.len(), 4);
        assert!(same_signature(&c2, &out));
    }

    #[test]
    fn moves_text_round_trip() {
        let c = square();
        let mut log = MoveLog::for_base(&c);
        log.moves.push(Move::Slide { strand: "a".into(), segment: 0, direction: Direction::NegY, distance: 2 });
        log.moves.push(Move::Bridge { strand: "a".into(), segment_a: 1, segment_b: 3 });
        log.moves.push(Move::DeleteLoop { strand: "a".into() });
        log.annotations.insert(0, "widen first".into());
        let text = log.to_text();
        assert!(text.contains("slide a 0 0 -1 0 2\n"));
        assert_eq!(MoveLog::parse(&text).unwrap(), log);
    }

    #[test]
    fn replay_checks_hash_and_steps() {
        let c = square();
        let mut log = MoveLog::for_base(&c);
        assert_eq!(replay(&c, &log).unwrap(), c);
        log.moves.push(Move::Slide { strand: "a".into(), segment: 0, direction: Direction::NegY, distance: 1 });
        log.moves.push(Move::Slide { strand: "a".into(), segment: 0, direction: Direction::PosY, distance: 9 });
        assert!(matches!(replay(&c, &log), Err(ReplayError::Step { step: 1, .. })));
        let other = c.translated(P::new(1, 0, 0));
        assert!(matches!(replay(&other, &log), Err(ReplayError::HashMismatch { .. })));
    }
}
