//! Integer-lattice representation of defect circuits.
//!
//! One lattice unit is one plumbing piece. Defects are zero-thickness
//! rectilinear polylines through piece centres; the temporal axis is `x`,
//! with circuit inputs on the `x = min` face and outputs on the `x = max`
//! face of the declared bounds.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point of the plumbing-piece lattice.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

impl LatticePoint {
    pub const fn new(x: i64, y: i64, z: i64) -> Self {
        Self { x, y, z }
    }

    pub fn coord(&self, axis: Axis) -> i64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    pub fn with_coord(mut self, axis: Axis, value: i64) -> Self {
        match axis {
            Axis::X => self.x = value,
            Axis::Y => self.y = value,
            Axis::Z => self.z = value,
        }
        self
    }

    pub fn as_f64(&self) -> [f64; 3] {
        [self.x as f64, self.y as f64, self.z as f64]
    }

    /// Axis along which `self` and `other` differ, if they differ in exactly one coordinate.
    pub fn axis_to(&self, other: &LatticePoint) -> Option<Axis> {
        let d = *other - *self;
        match (d.x != 0, d.y != 0, d.z != 0) {
            (true, false, false) => Some(Axis::X),
            (false, true, false) => Some(Axis::Y),
            (false, false, true) => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn manhattan(&self) -> i64 {
        self.x.abs() + self.y.abs() + self.z.abs()
    }
}

impl Add for LatticePoint {
    type Output = LatticePoint;
    fn add(self, o: LatticePoint) -> LatticePoint {
        LatticePoint::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for LatticePoint {
    type Output = LatticePoint;
    fn sub(self, o: LatticePoint) -> LatticePoint {
        LatticePoint::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for LatticePoint {
    type Output = LatticePoint;
    fn neg(self) -> LatticePoint {
        LatticePoint::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<i64> for LatticePoint {
    type Output = LatticePoint;
    fn mul(self, k: i64) -> LatticePoint {
        LatticePoint::new(self.x * k, self.y * k, self.z * k)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

impl Serialize for LatticePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y, self.z].serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticePoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y, z] = <[i64; 3]>::deserialize(d)?;
        Ok(LatticePoint { x, y, z })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn unit(self) -> LatticePoint {
        match self {
            Axis::X => LatticePoint::new(1, 0, 0),
            Axis::Y => LatticePoint::new(0, 1, 0),
            Axis::Z => LatticePoint::new(0, 0, 1),
        }
    }
}

/// Unit lattice direction. Declaration order is the enumeration order used by
/// move generation: -x, +x, -y, +y, -z, +z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    NegX,
    PosX,
    NegY,
    PosY,
    NegZ,
    PosZ,
}

impl Direction {
    pub const ALL: [Direction; 6] = [
        Direction::NegX,
        Direction::PosX,
        Direction::NegY,
        Direction::PosY,
        Direction::NegZ,
        Direction::PosZ,
    ];

    pub fn axis(self) -> Axis {
        match self {
            Direction::NegX | Direction::PosX => Axis::X,
            Direction::NegY | Direction::PosY => Axis::Y,
            Direction::NegZ | Direction::PosZ => Axis::Z,
        }
    }

    pub fn sign(self) -> i64 {
        match self {
            Direction::NegX | Direction::NegY | Direction::NegZ => -1,
            _ => 1,
        }
    }

    pub fn vector(self) -> LatticePoint {
        self.axis().unit() * self.sign()
    }

    pub fn opposite(self) -> Direction {
        Direction::from_vector(-self.vector()).expect("unit vector")
    }

    pub fn from_vector(v: LatticePoint) -> Option<Direction> {
        match (v.x, v.y, v.z) {
            (-1, 0, 0) => Some(Direction::NegX),
            (1, 0, 0) => Some(Direction::PosX),
            (0, -1, 0) => Some(Direction::NegY),
            (0, 1, 0) => Some(Direction::PosY),
            (0, 0, -1) => Some(Direction::NegZ),
            (0, 0, 1) => Some(Direction::PosZ),
            _ => None,
        }
    }
}

impl Serialize for Direction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.vector().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = LatticePoint::deserialize(d)?;
        Direction::from_vector(v).ok_or_else(|| serde::de::Error::custom("direction must be a unit lattice vector"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrandKind {
    Primal,
    Dual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Closure {
    Closed,
    Open,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PortFace {
    /// The `x = min` face.
    Input,
    /// The `x = max` face.
    Output,
}

/// A named, immovable attachment point of an open strand on a temporal face.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PortLabel {
    pub name: String,
    pub position: LatticePoint,
    pub face: PortFace,
}

/// Axis-aligned box, inclusive on both ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Bounds {
    pub min: LatticePoint,
    pub max: LatticePoint,
}

impl Bounds {
    pub fn new(min: LatticePoint, max: LatticePoint) -> Self {
        Self { min, max }
    }

    /// `[0,X] x [0,Y] x [0,Z]`.
    pub fn from_extents(x: i64, y: i64, z: i64) -> Self {
        Self::new(LatticePoint::default(), LatticePoint::new(x, y, z))
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        Axis::ALL
            .iter()
            .all(|&a| p.coord(a) >= self.min.coord(a) && p.coord(a) <= self.max.coord(a))
    }

    /// The face `p` pokes through, if it is outside.
    pub fn violated_face(&self, p: &LatticePoint) -> Option<(Axis, bool)> {
        for a in Axis::ALL {
            if p.coord(a) < self.min.coord(a) {
                return Some((a, false));
            }
            if p.coord(a) > self.max.coord(a) {
                return Some((a, true));
            }
        }
        None
    }

    pub fn face_x(&self, face: PortFace) -> i64 {
        match face {
            PortFace::Input => self.min.x,
            PortFace::Output => self.max.x,
        }
    }

    /// Product of the (max - min) extents, each clamped to at least 1.
    pub fn volume(&self) -> i64 {
        Axis::ALL
            .iter()
            .map(|&a| (self.max.coord(a) - self.min.coord(a)).max(1))
            .product()
    }

    pub fn translated(&self, by: LatticePoint) -> Bounds {
        Bounds::new(self.min + by, self.max + by)
    }
}

impl Serialize for Bounds {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.min, self.max].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Bounds {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [min, max] = <[LatticePoint; 2]>::deserialize(d)?;
        Ok(Bounds { min, max })
    }
}

/// One primal or dual defect.
///
/// `path` lists the corner vertices. Closed strands return from the last vertex
/// to the first; open strands run from the port named `ports[0]` at `path[0]`
/// to the port named `ports[1]` at the last vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DefectStrand {
    pub id: String,
    pub kind: StrandKind,
    pub closure: Closure,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
    #[serde(default)]
    pub ports: Vec<String>,
    pub path: Vec<LatticePoint>,
}

impl DefectStrand {
    pub fn closed(id: impl Into<String>, kind: StrandKind, path: Vec<LatticePoint>) -> Self {
        Self {
            id: id.into(),
            kind,
            closure: Closure::Closed,
            meta: BTreeMap::new(),
            ports: Vec::new(),
            path,
        }
    }

    pub fn open(
        id: impl Into<String>,
        kind: StrandKind,
        path: Vec<LatticePoint>,
        start_port: impl Into<String>,
        end_port: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            kind,
            closure: Closure::Open,
            meta: BTreeMap::new(),
            ports: vec![start_port.into(), end_port.into()],
            path,
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn is_closed(&self) -> bool {
        self.closure == Closure::Closed
    }

    pub fn segment_count(&self) -> usize {
        let n = self.path.len();
        match self.closure {
            Closure::Closed if n >= 2 => n,
            Closure::Closed => 0,
            Closure::Open => n.saturating_sub(1),
        }
    }

    /// Endpoints of segment `i`.
    pub fn segment(&self, i: usize) -> (LatticePoint, LatticePoint) {
        let n = self.path.len();
        (self.path[i], self.path[(i + 1) % n])
    }

    pub fn segments(&self) -> impl Iterator<Item = (LatticePoint, LatticePoint)> + '_ {
        (0..self.segment_count()).map(move |i| self.segment(i))
    }

    /// Every lattice point on the strand, each listed once, in traversal order.
    pub fn points(&self) -> Vec<LatticePoint> {
        let mut out = Vec::new();
        for (a, b) in self.segments() {
            out.extend(segment_points(a, b).take(segment_len(a, b) as usize));
        }
        if self.closure == Closure::Open {
            if let Some(last) = self.path.last() {
                out.push(*last);
            }
        } else if self.path.len() == 1 {
            out.push(self.path[0]);
        }
        out
    }

    pub fn translated(&self, by: LatticePoint) -> DefectStrand {
        let mut s = self.clone();
        for p in &mut s.path {
            *p = *p + by;
        }
        s
    }

    /// Tight min/max corners of the vertices.
    pub fn vertex_box(&self) -> Option<(LatticePoint, LatticePoint)> {
        let first = *self.path.first()?;
        Some(self.path.iter().fold((first, first), |(lo, hi), p| {
            (
                LatticePoint::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z)),
                LatticePoint::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z)),
            )
        }))
    }
}

/// Length of an axis-aligned segment (Manhattan length otherwise).
pub fn segment_len(a: LatticePoint, b: LatticePoint) -> i64 {
    (b - a).manhattan()
}

/// Lattice points from `a` to `b` inclusive. Only meaningful for axis-aligned segments.
pub fn segment_points(a: LatticePoint, b: LatticePoint) -> impl Iterator<Item = LatticePoint> {
    let d = b - a;
    let len = d.manhattan();
    let step = LatticePoint::new(d.x.signum(), d.y.signum(), d.z.signum());
    (0..=len).map(move |k| a + step * k)
}

/// Whether `p` lies on the axis-aligned segment `a`-`b`.
pub fn segment_contains(a: LatticePoint, b: LatticePoint, p: LatticePoint) -> bool {
    Axis::ALL.iter().all(|&ax| {
        let (lo, hi) = (a.coord(ax).min(b.coord(ax)), a.coord(ax).max(b.coord(ax)));
        p.coord(ax) >= lo && p.coord(ax) <= hi
    })
}

/// Removes repeated vertices and non-corner vertices. Open strands keep their
/// endpoints. Returns `None` when a closed path degenerates to fewer than three
/// distinct vertices.
pub fn normalize_path(path: &[LatticePoint], closure: Closure) -> Option<Vec<LatticePoint>> {
    let closed = closure == Closure::Closed;
    let mut v = path.to_vec();
    loop {
        v.dedup();
        while closed && v.len() > 1 && v.first() == v.last() {
            v.pop();
        }
        let n = v.len();
        if closed && n < 3 {
            return None;
        }
        let range = if closed { 0..n } else { 1..n.saturating_sub(1) };
        let straight = range.into_iter().find(|&i| {
            let (prev, cur, next) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
            matches!((prev.axis_to(&cur), cur.axis_to(&next)), (Some(a), Some(b)) if a == b)
        });
        match straight {
            Some(i) => {
                v.remove(i);
            }
            None => break,
        }
    }
    if closed && v.len() < 4 {
        return None;
    }
    Some(v)
}

/// The unit of compilation: strands inside a declared box, plus the port table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopoCircuit {
    pub bounds: Bounds,
    pub ports: Vec<PortLabel>,
    pub strands: Vec<DefectStrand>,
}

impl TopoCircuit {
    pub fn new(bounds: Bounds) -> Self {
        Self { bounds, ports: Vec::new(), strands: Vec::new() }
    }

    pub fn with_strand(mut self, s: DefectStrand) -> Self {
        self.strands.push(s);
        self
    }

    pub fn strand(&self, id: &str) -> Option<&DefectStrand> {
        self.strands.iter().find(|s| s.id == id)
    }

    pub fn strand_index(&self, id: &str) -> Option<usize> {
        self.strands.iter().position(|s| s.id == id)
    }

    pub fn port(&self, name: &str) -> Option<&PortLabel> {
        self.ports.iter().find(|p| p.name == name)
    }

    /// Translates strands, ports and bounds together.
    pub fn translated(&self, by: LatticePoint) -> TopoCircuit {
        TopoCircuit {
            bounds: self.bounds.translated(by),
            ports: self
                .ports
                .iter()
                .map(|p| PortLabel { position: p.position + by, ..p.clone() })
                .collect(),
            strands: self.strands.iter().map(|s| s.translated(by)).collect(),
        }
    }

    /// Quarter turn about the temporal axis: `(x, y, z) -> (x, -z, y)`.
    /// Ports stay on their faces.
    pub fn rotated_about_x(&self) -> TopoCircuit {
        let rot = |p: LatticePoint| LatticePoint::new(p.x, -p.z, p.y);
        let (a, b) = (rot(self.bounds.min), rot(self.bounds.max));
        TopoCircuit {
            bounds: Bounds::new(
                LatticePoint::new(a.x.min(b.x), a.y.min(b.y), a.z.min(b.z)),
                LatticePoint::new(a.x.max(b.x), a.y.max(b.y), a.z.max(b.z)),
            ),
            ports: self
                .ports
                .iter()
                .map(|p| PortLabel { position: rot(p.position), ..p.clone() })
                .collect(),
            strands: self
                .strands
                .iter()
                .map(|s| DefectStrand { path: s.path.iter().map(|&p| rot(p)).collect(), ..s.clone() })
                .collect(),
        }
    }

    /// Tight min/max corners over every strand vertex.
    pub fn tight_box(&self) -> Option<(LatticePoint, LatticePoint)> {
        self.strands.iter().filter_map(|s| s.vertex_box()).reduce(|(lo, hi), (a, b)| {
            (
                LatticePoint::new(lo.x.min(a.x), lo.y.min(a.y), lo.z.min(a.z)),
                LatticePoint::new(hi.x.max(b.x), hi.y.max(b.y), hi.z.max(b.z)),
            )
        })
    }

    /// Tight `(X', Y', Z')` extents, each clamped to at least 1.
    pub fn tight_extents(&self) -> Option<[i64; 3]> {
        self.tight_box()
            .map(|(lo, hi)| [(hi.x - lo.x).max(1), (hi.y - lo.y).max(1), (hi.z - lo.z).max(1)])
    }

    /// Number of distinct occupied lattice points.
    pub fn occupied_count(&self) -> usize {
        self.strands.iter().map(|s| s.points().len()).sum()
    }
}

/// Tight bounding-box volume in plumbing pieces; 0 for an empty circuit.
pub fn bounding_volume(c: &TopoCircuit) -> i64 {
    c.tight_extents().map(|e| e.iter().product()).unwrap_or(0)
}

/// Every lattice point on any strand.
pub fn occupied_pieces(c: &TopoCircuit) -> HashSet<LatticePoint> {
    c.strands.iter().flat_map(|s| s.points()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationCode {
    DuplicateStrandId,
    DuplicatePort,
    TooFewVertices,
    NotAxisAligned,
    ZeroLengthSegment,
    CollinearVertex,
    SelfIntersection,
    SharedPoint,
    OutOfBounds,
    PortMismatch,
    PortNotOnFace,
    UnpinnedEndpoint,
    EndpointNotPerpendicular,
    UnreferencedPort,
    BlockedSweep,
}

/// One violated invariant, with the strands and points involved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub strands: Vec<String>,
    pub points: Vec<LatticePoint>,
    pub message: String,
}

impl Violation {
    pub fn new(code: ViolationCode, strands: &[&str], points: &[LatticePoint], message: impl Into<String>) -> Self {
        Self {
            code,
            strands: strands.iter().map(|s| s.to_string()).collect(),
            points: points.to_vec(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.code, self.message)
    }
}

/// Diagnostics; empty means every checked invariant holds.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }

    pub fn extend(&mut self, other: ValidityReport) {
        self.violations.extend(other.violations);
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks the invariants of a single strand in isolation (shape, bounds, port pinning).
pub fn validate_strand(s: &DefectStrand, bounds: &Bounds, ports: &[PortLabel]) -> ValidityReport {
    let mut r = ValidityReport::default();
    let id = s.id.as_str();
    let n = s.path.len();
    let min_vertices = if s.is_closed() { 4 } else { 2 };
    if n < min_vertices {
        r.push(Violation::new(
            ViolationCode::TooFewVertices,
            &[id],
            &s.path,
            format!("strand {id} has {n} vertices, needs at least {min_vertices}"),
        ));
        return r;
    }

    let mut shape_ok = true;
    for (i, (a, b)) in s.segments().enumerate() {
        if a == b {
            shape_ok = false;
            r.push(Violation::new(
                ViolationCode::ZeroLengthSegment,
                &[id],
                &[a],
                format!("strand {id} segment {i} has zero length"),
            ));
        } else if a.axis_to(&b).is_none() {
            shape_ok = false;
            r.push(Violation::new(
                ViolationCode::NotAxisAligned,
                &[id],
                &[a, b],
                format!("strand {id} segment {i} is not axis-aligned"),
            ));
        }
    }
    if !shape_ok {
        return r;
    }

    let corner_range = if s.is_closed() { 0..n } else { 1..n - 1 };
    for i in corner_range {
        let prev = s.path[(i + n - 1) % n];
        let next = s.path[(i + 1) % n];
        if prev.axis_to(&s.path[i]) == s.path[i].axis_to(&next) {
            r.push(Violation::new(
                ViolationCode::CollinearVertex,
                &[id],
                &[s.path[i]],
                format!("strand {id} vertex {i} is not a corner"),
            ));
        }
    }

    let mut seen = HashSet::new();
    for p in s.points() {
        if !seen.insert(p) {
            r.push(Violation::new(
                ViolationCode::SelfIntersection,
                &[id],
                &[p],
                format!("strand {id} visits {p} twice"),
            ));
        }
        if let Some((axis, upper)) = bounds.violated_face(&p) {
            r.push(Violation::new(
                ViolationCode::OutOfBounds,
                &[id],
                &[p],
                format!(
                    "strand {id} point {p} crosses the {}{:?} face",
                    if upper { "+" } else { "-" },
                    axis
                ),
            ));
        }
    }

    match s.closure {
        Closure::Closed => {
            if !s.ports.is_empty() {
                r.push(Violation::new(
                    ViolationCode::PortMismatch,
                    &[id],
                    &[],
                    format!("closed strand {id} declares ports"),
                ));
            }
        }
        Closure::Open => {
            if s.ports.len() != 2 {
                r.push(Violation::new(
                    ViolationCode::PortMismatch,
                    &[id],
                    &[],
                    format!("open strand {id} must name exactly two ports"),
                ));
                return r;
            }
            let ends = [(s.path[0], s.path[1]), (s.path[n - 1], s.path[n - 2])];
            for (k, (end, inner)) in ends.into_iter().enumerate() {
                let on_face = end.x == bounds.min.x || end.x == bounds.max.x;
                if !on_face {
                    r.push(Violation::new(
                        ViolationCode::UnpinnedEndpoint,
                        &[id],
                        &[end],
                        format!("open strand {id} endpoint {end} is not on a temporal boundary face"),
                    ));
                } else if end.axis_to(&inner) != Some(Axis::X) {
                    r.push(Violation::new(
                        ViolationCode::EndpointNotPerpendicular,
                        &[id],
                        &[end],
                        format!("open strand {id} endpoint segment at {end} is not perpendicular to its face"),
                    ));
                }
                match ports.iter().find(|p| p.name == s.ports[k]) {
                    None => r.push(Violation::new(
                        ViolationCode::PortMismatch,
                        &[id],
                        &[end],
                        format!("strand {id} references unknown port {}", s.ports[k]),
                    )),
                    Some(port) if port.position != end => r.push(Violation::new(
                        ViolationCode::PortMismatch,
                        &[id],
                        &[end, port.position],
                        format!("strand {id} endpoint {end} does not sit on port {}", port.name),
                    )),
                    Some(_) => {}
                }
            }
        }
    }
    r
}

/// Full circuit validation.
pub fn validate_geometry(c: &TopoCircuit) -> ValidityReport {
    let mut r = ValidityReport::default();

    let mut ids = HashSet::new();
    for s in &c.strands {
        if !ids.insert(s.id.as_str()) {
            r.push(Violation::new(
                ViolationCode::DuplicateStrandId,
                &[&s.id],
                &[],
                format!("strand id {} used twice", s.id),
            ));
        }
    }

    let mut names = HashSet::new();
    let mut positions = HashSet::new();
    for p in &c.ports {
        if !names.insert(p.name.as_str()) || !positions.insert(p.position) {
            r.push(Violation::new(
                ViolationCode::DuplicatePort,
                &[],
                &[p.position],
                format!("port {} duplicates a name or position", p.name),
            ));
        }
        if p.position.x != c.bounds.face_x(p.face) || !c.bounds.contains(&p.position) {
            r.push(Violation::new(
                ViolationCode::PortNotOnFace,
                &[],
                &[p.position],
                format!("port {} at {} is not on its {:?} face", p.name, p.position, p.face),
            ));
        }
        let refs: Vec<&str> = c
            .strands
            .iter()
            .filter(|s| s.closure == Closure::Open && s.ports.iter().any(|n| n == &p.name))
            .map(|s| s.id.as_str())
            .collect();
        if refs.len() != 1 {
            r.push(Violation::new(
                ViolationCode::UnreferencedPort,
                &refs,
                &[p.position],
                format!("port {} is referenced by {} open strands", p.name, refs.len()),
            ));
        }
    }

    let mut owner: HashMap<LatticePoint, usize> = HashMap::new();
    for (i, s) in c.strands.iter().enumerate() {
        r.extend(validate_strand(s, &c.bounds, &c.ports));
        let mut reported = HashSet::new();
        for p in s.points() {
            match owner.get(&p) {
                Some(&j) if j != i => {
                    if reported.insert(j) {
                        r.push(Violation::new(
                            ViolationCode::SharedPoint,
                            &[&c.strands[j].id, &s.id],
                            &[p],
                            format!("strands {} and {} share {p}", c.strands[j].id, s.id),
                        ));
                    }
                }
                Some(_) => {}
                None => {
                    owner.insert(p, i);
                }
            }
        }
    }
    r
}

/// Point-to-strand index used by move checks.
#[derive(Clone, Debug, Default)]
pub struct Occupancy {
    owner: HashMap<LatticePoint, usize>,
}

impl Occupancy {
    pub fn build(c: &TopoCircuit) -> Self {
        let mut owner = HashMap::new();
        for (i, s) in c.strands.iter().enumerate() {
            for p in s.points() {
                owner.entry(p).or_insert(i);
            }
        }
        Self { owner }
    }

    pub fn owner(&self, p: &LatticePoint) -> Option<usize> {
        self.owner.get(p).copied()
    }
}
