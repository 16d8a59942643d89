//! The `.tqc` geometry file: JSON with a fixed field order, one port or
//! strand per line, so that two writes of the same circuit are byte-identical.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{Bounds, DefectStrand, PortLabel, TopoCircuit};

pub const TQC_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed .tqc: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported .tqc version {0}")]
    Version(u32),
}

#[derive(Serialize, Deserialize)]
struct TqcDocument {
    version: u32,
    bounds: Bounds,
    ports: Vec<PortLabel>,
    strands: Vec<DefectStrand>,
}

pub fn to_tqc(c: &TopoCircuit) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"version\": {TQC_VERSION},\n"));
    out.push_str(&format!("  \"bounds\": {},\n", compact(&c.bounds)));
    push_list(&mut out, "ports", c.ports.iter().map(compact), true);
    push_list(&mut out, "strands", c.strands.iter().map(compact), false);
    out.push_str("}\n");
    out
}

fn push_list(out: &mut String, key: &str, items: impl Iterator<Item = String>, trailing_comma: bool) {
    let items: Vec<String> = items.collect();
    let comma = if trailing_comma { "," } else { "" };
    if items.is_empty() {
        out.push_str(&format!("  \"{key}\": []{comma}\n"));
        return;
    }
    out.push_str(&format!("  \"{key}\": [\n"));
    for (i, item) in items.iter().enumerate() {
        let sep = if i + 1 < items.len() { "," } else { "" };
        out.push_str(&format!("    {item}{sep}\n"));
    }
    out.push_str(&format!("  ]{comma}\n"));
}

fn compact<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("geometry values always serialize")
}

pub fn parse_tqc(text: &str) -> Result<TopoCircuit, FormatError> {
    let doc: TqcDocument = serde_json::from_str(text)?;
    if doc.version != TQC_VERSION {
        return Err(FormatError::Version(doc.version));
    }
    Ok(TopoCircuit { bounds: doc.bounds, ports: doc.ports, strands: doc.strands })
}

/// Hex SHA-256 of a byte string.
pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of the canonical `.tqc` rendering of `c`.
pub fn circuit_digest(c: &TopoCircuit) -> String {
    digest(to_tqc(c).as_bytes())
}
