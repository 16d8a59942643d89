use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linking::{canonical_orientation, linking_in_frame, ClosureFrame, LinkingError};
use crate::geometry::{Closure, PortLabel, StrandKind, TopoCircuit};

/// Linking numbers over unordered strand pairs, in canonical orientation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkingMatrix {
    /// Strand ids in circuit order.
    pub ids: Vec<String>,
    /// Keyed by the lexicographically ordered id pair.
    #[serde(with = "pair_entries")]
    pub entries: BTreeMap<(String, String), i64>,
}

impl LinkingMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<i64> {
        self.entries.get(&pair_key(a, b)).copied()
    }

    /// True when every entry involving `id` is zero.
    pub fn row_is_null(&self, id: &str) -> bool {
        self.entries.iter().all(|((a, b), v)| (a != id && b != id) || *v == 0)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (&str, &str, i64)> {
        self.entries.iter().filter(|(_, v)| **v != 0).map(|((a, b), v)| (a.as_str(), b.as_str(), *v))
    }
}

pub(crate) fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

mod pair_entries {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Entry {
        a: String,
        b: String,
        lk: i64,
    }

    pub fn serialize<S: serde::Serializer>(m: &BTreeMap<(String, String), i64>, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<Entry> = m.iter().map(|((a, b), lk)| Entry { a: a.clone(), b: b.clone(), lk: *lk }).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<BTreeMap<(String, String), i64>, D::Error> {
        let v = Vec::<Entry>::deserialize(d)?;
        Ok(v.into_iter().map(|e| (pair_key(&e.a, &e.b), e.lk)).collect())
    }
}

/// Linking matrix of every strand pair. Pairs whose closed curves are
/// separated by an axis-aligned plane are short-circuited to 0.
pub fn linking_matrix(c: &TopoCircuit) -> Result<LinkingMatrix, LinkingError> {
    let frame = ClosureFrame::of(c);
    let n = c.strands.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<Result<i64, LinkingError>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&c.strands[i], &c.strands[j]);
            let lk = linking_in_frame(a, b, &frame, true)?;
            Ok(lk * canonical_orientation(a) * canonical_orientation(b))
        })
        .collect();
    let mut entries = BTreeMap::new();
    for (&(i, j), v) in pairs.iter().zip(values) {
        entries.insert(pair_key(&c.strands[i].id, &c.strands[j].id), v?);
    }
    Ok(LinkingMatrix { ids: c.strands.iter().map(|s| s.id.clone()).collect(), entries })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrandEntry {
    pub kind: StrandKind,
    pub closure: Closure,
    pub meta: BTreeMap<String, String>,
}

/// Ports, strand registry and linking matrix: the invariant that moves must preserve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopoSignature {
    pub ports: Vec<PortLabel>,
    pub strands: BTreeMap<String, StrandEntry>,
    pub linking: LinkingMatrix,
}

pub fn signature(c: &TopoCircuit) -> Result<TopoSignature, LinkingError> {
    Ok(TopoSignature {
        ports: c.ports.clone(),
        strands: c
            .strands
            .iter()
            .map(|s| (s.id.clone(), StrandEntry { kind: s.kind, closure: s.closure, meta: s.meta.clone() }))
            .collect(),
        linking: linking_matrix(c)?,
    })
}

/// Outcome of a signature comparison.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureDiff {
    pub differences: Vec<String>,
}

impl SignatureDiff {
    pub fn is_equal(&self) -> bool {
        self.differences.is_empty()
    }
}

fn is_null(sig: &TopoSignature, id: &str) -> bool {
    sig.strands.get(id).is_some_and(|e| e.closure == Closure::Closed) && sig.linking.row_is_null(id)
}

/// Compares two signatures.
///
/// Strands present on only one side are tolerated when they are closed and
/// unlinked there (deleted null loops). Linking entries are compared up to
/// reversing closed strands: the two matrices must agree in magnitude, and
/// there must be a sign per closed strand reconciling every nonzero entry.
/// Open strands are oriented by their ports and never flip.
pub fn signatures_equal(s1: &TopoSignature, s2: &TopoSignature) -> SignatureDiff {
    let mut diff = Vec::new();
    if s1.ports != s2.ports {
        diff.push("port lists differ".to_string());
    }

    let ids: BTreeSet<&str> = s1.strands.keys().chain(s2.strands.keys()).map(|s| s.as_str()).collect();
    let mut common = Vec::new();
    for id in ids {
        match (s1.strands.get(id), s2.strands.get(id)) {
            (Some(a), Some(b)) => {
                if a != b {
                    diff.push(format!("strand {id} differs in kind, closure or labels"));
                }
                common.push(id);
            }
            (Some(_), None) if !is_null(s1, id) => diff.push(format!("strand {id} missing on the right and not null")),
            (None, Some(_)) if !is_null(s2, id) => diff.push(format!("strand {id} missing on the left and not null")),
            _ => {}
        }
    }

    // Signed constraint graph over common strands: flip(a) xor flip(b) = relation.
    let mut edges: HashMap<&str, Vec<(&str, bool)>> = HashMap::new();
    for (i, a) in common.iter().enumerate() {
        for b in &common[i + 1..] {
            let v1 = s1.linking.get(a, b).unwrap_or(0);
            let v2 = s2.linking.get(a, b).unwrap_or(0);
            if v1.abs() != v2.abs() {
                diff.push(format!("lk({a},{b}) is {v1} vs {v2}"));
            } else if v1 != 0 {
                let flipped = v1 != v2;
                edges.entry(a).or_default().push((b, flipped));
                edges.entry(b).or_default().push((a, flipped));
            }
        }
    }
    let fixed = |id: &str| s1.strands.get(id).is_some_and(|e| e.closure == Closure::Open);
    let mut flip: HashMap<&str, bool> = HashMap::new();
    for &root in &common {
        if flip.contains_key(root) || !edges.contains_key(root) {
            continue;
        }
        let mut queue = VecDeque::from([root]);
        flip.insert(root, false);
        let mut component = vec![root];
        while let Some(u) = queue.pop_front() {
            for &(v, rel) in edges.get(u).map(|e| e.as_slice()).unwrap_or(&[]) {
                let want = flip[u] ^ rel;
                match flip.get(v) {
                    None => {
                        flip.insert(v, want);
                        component.push(v);
                        queue.push_back(v);
                    }
                    Some(&have) if have != want => {
                        diff.push(format!("linking signs around {u} and {v} cannot be reconciled by reorientation"));
                    }
                    Some(_) => {}
                }
            }
        }
        // Flipping a whole component is free, so open strands only need to agree with each other.
        let pinned: Vec<&&str> = component.iter().filter(|id| fixed(id)).collect();
        if let Some(first) = pinned.first() {
            let base = flip[**first];
            for id in &pinned {
                if flip[**id] != base {
                    diff.push(format!("open strand {id} would need reversing"));
                }
            }
        }
    }
    diff.dedup();
    SignatureDiff { differences: diff }
}
