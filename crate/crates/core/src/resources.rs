//! Physical cost of a circuit: code distance, qubits and syndrome-extraction steps.
//!
//! Per plumbing piece of distance `d`:
//! surface code `Q = ceil(25 d^2 / 4) + 5d + 1`, Raussendorf lattice
//! `Q = 6d^3 + 9d^2 + 3d`, and both take `T = ceil(5d / 4)` steps.
//! The ceilings only matter when `4` does not divide `d`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::TopoCircuit;

/// Largest distance `select_distance` will consider.
pub const MAX_DISTANCE: u32 = 199;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Code {
    Surface,
    Raussendorf,
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Code::Surface => "surface",
            Code::Raussendorf => "raussendorf",
        })
    }
}

impl std::str::FromStr for Code {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "surface" => Ok(Code::Surface),
            "raussendorf" => Ok(Code::Raussendorf),
            _ => Err(format!("unknown code \"{s}\" (expected surface or raussendorf)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub code: Code,
    pub d: u32,
}

/// Per-piece logical failure `prefactor * (p_phys / p_th)^ceil((d+1)/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub p_phys: f64,
    pub p_th: f64,
    pub prefactor: f64,
}

impl ErrorModel {
    pub fn new(p_phys: f64) -> Self {
        Self { p_phys, ..Default::default() }
    }

    pub fn per_piece_failure(&self, d: u32) -> f64 {
        self.prefactor * (self.p_phys / self.p_th).powi(((d + 2) / 2) as i32)
    }
}

impl Default for ErrorModel {
    fn default() -> Self {
        Self { p_phys: 1e-3, p_th: 0.01, prefactor: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ResourceError {
    #[error("code distance {0} is below 3")]
    DistanceTooSmall(u32),
    #[error("target unreachable under model (no odd d <= {MAX_DISTANCE} suffices)")]
    Unreachable,
    #[error("invalid error model: {0}")]
    InvalidModel(String),
    #[error("empty circuit")]
    EmptyCircuit,
}

fn check_d(d: u32) -> Result<(), ResourceError> {
    if d < 3 {
        Err(ResourceError::DistanceTooSmall(d))
    } else {
        Ok(())
    }
}

pub fn qubits_per_piece(code: Code, d: u32) -> Result<u64, ResourceError> {
    check_d(d)?;
    let d = d as u64;
    Ok(match code {
        Code::Surface => (25 * d * d).div_ceil(4) + 5 * d + 1,
        Code::Raussendorf => 6 * d * d * d + 9 * d * d + 3 * d,
    })
}

pub fn steps_per_piece(_code: Code, d: u32) -> Result<u64, ResourceError> {
    check_d(d)?;
    Ok((5 * d as u64).div_ceil(4))
}

fn check_model(model: &ErrorModel, eps: f64) -> Result<(), ResourceError> {
    let bad = |m: &str| Err(ResourceError::InvalidModel(m.to_string()));
    if !(model.p_phys > 0.0 && model.p_phys < 1.0) {
        return bad("p_phys must lie in (0, 1)");
    }
    if !(model.p_phys < model.p_th) {
        return bad("p_phys must be below p_th");
    }
    if !(model.prefactor > 0.0) {
        return bad("prefactor must be positive");
    }
    if !(eps > 0.0 && eps < 1.0) {
        return bad("eps_target must lie in (0, 1)");
    }
    Ok(())
}

/// Relative slack on the `<= eps_target` comparison, so that targets hit
/// exactly on paper (0.1 * 0.1^9 vs 1e-10) are not lost to rounding.
pub const DISTANCE_RELATIVE_SLACK: f64 = 1e-12;

/// Smallest odd `d >= 3` with `volume * p_L(d) <= eps_target`.
pub fn select_distance(volume: u64, model: &ErrorModel, eps_target: f64) -> Result<u32, ResourceError> {
    check_model(model, eps_target)?;
    let volume = volume.max(1) as f64;
    (3..=MAX_DISTANCE)
        .step_by(2)
        .find(|&d| volume * model.per_piece_failure(d) <= eps_target * (1.0 + DISTANCE_RELATIVE_SLACK))
        .ok_or(ResourceError::Unreachable)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub code: Code,
    pub d: u32,
    pub qubits: u64,
    pub time_steps: u64,
    pub volume_pieces: u64,
    /// Tight `(X', Y', Z')`; `X'` is time.
    pub extents: [u64; 3],
    pub qubits_per_piece: u64,
    pub steps_per_piece: u64,
    pub model: ErrorModel,
    pub eps_target: f64,
}

impl ResourceReport {
    /// Fixed-order `key: value` lines.
    pub fn to_text(&self) -> String {
        let convention = match self.code {
            Code::Surface => "qubits = Y' * Z' * Q (time along X')",
            Code::Raussendorf => "qubits = V * Q",
        };
        [
            format!("code: {}", self.code),
            format!("d: {}", self.d),
            format!("volume_pieces: {}", self.volume_pieces),
            format!("extents: {}x{}x{}", self.extents[0], self.extents[1], self.extents[2]),
            format!("qubits_per_piece: {}", self.qubits_per_piece),
            format!("steps_per_piece: {}", self.steps_per_piece),
            format!("qubits: {}", self.qubits),
            format!("time_steps: {}", self.time_steps),
            format!("convention: {convention}"),
            format!("p_phys: {}", self.model.p_phys),
            format!("p_th: {}", self.model.p_th),
            format!("prefactor: {}", self.model.prefactor),
            format!("eps_target: {}", self.eps_target),
        ]
        .join("\n")
            + "\n"
    }
}

/// Prices `c` at a given distance.
pub fn estimate_at(c: &TopoCircuit, code: Code, d: u32, model: &ErrorModel, eps_target: f64) -> Result<ResourceReport, ResourceError> {
    let [x, y, z] = c.tight_extents().ok_or(ResourceError::EmptyCircuit)?.map(|e| e as u64);
    let q = qubits_per_piece(code, d)?;
    let t = steps_per_piece(code, d)?;
    let volume = x * y * z;
    Ok(ResourceReport {
        code,
        d,
        qubits: match code {
            Code::Surface => y * z * q,
            Code::Raussendorf => volume * q,
        },
        time_steps: x * t,
        volume_pieces: volume,
        extents: [x, y, z],
        qubits_per_piece: q,
        steps_per_piece: t,
        model: *model,
        eps_target,
    })
}

/// Chooses `d` with [`select_distance`] and prices `c`.
pub fn estimate(c: &TopoCircuit, code: Code, model: &ErrorModel, eps_target: f64) -> Result<ResourceReport, ResourceError> {
    let v = crate::geometry::bounding_volume(c);
    if v == 0 {
        return Err(ResourceError::EmptyCircuit);
    }
    let d = select_distance(v as u64, model, eps_target)?;
    estimate_at(c, code, d, model, eps_target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_piece_counts() {
        assert_eq!(qubits_per_piece(Code::Surface, 4).unwrap(), 121);
        assert_eq!(qubits_per_piece(Code::Raussendorf, 4).unwrap(), 540);
        assert_eq!(qubits_per_piece(Code::Surface, 8).unwrap(), 441);
        assert_eq!(steps_per_piece(Code::Surface, 4).unwrap(), 5);
        assert_eq!(steps_per_piece(Code::Surface, 8).unwrap(), 10);
        assert_eq!(steps_per_piece(Code::Raussendorf, 5).unwrap(), 7);
        assert_eq!(qubits_per_piece(Code::Surface, 2), Err(ResourceError::DistanceTooSmall(2)));
    }

    #[test]
    fn strictly_increasing() {
        for code in [Code::Surface, Code::Raussendorf] {
            for d in 3..100 {
                assert!(qubits_per_piece(code, d + 1).unwrap() > qubits_per_piece(code, d).unwrap());
                assert!(steps_per_piece(code, d + 1).unwrap() > steps_per_piece(code, d).unwrap());
            }
        }
    }

    #[test]
    fn distance_examples() {
        let m = ErrorModel { p_phys: 0.001, p_th: 0.01, prefactor: 0.1 };
        assert_eq!(select_distance(1, &m, 1e-10), Ok(17));
        assert_eq!(select_distance(1_000_000, &m, 1e-10), Ok(29));
        assert_eq!(select_distance(1, &ErrorModel::new(1e-6), 0.5), Ok(3));
        let hard = ErrorModel { p_phys: 0.0099, ..m };
        assert_eq!(select_distance(1, &hard, 1e-15), Err(ResourceError::Unreachable));
        assert!(matches!(select_distance(1, &ErrorModel::new(0.02), 1e-3), Err(ResourceError::InvalidModel(_))));
    }

    #[test]
    fn empty_circuit_is_an_error() {
        let c = TopoCircuit::new(crate::geometry::Bounds::from_extents(1, 1, 1));
        assert_eq!(estimate(&c, Code::Surface, &ErrorModel::default(), 1e-3), Err(ResourceError::EmptyCircuit));
    }
}
