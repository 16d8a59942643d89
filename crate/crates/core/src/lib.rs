//! Compiler and volume optimizer for defect-based topological quantum circuits.
//!
//! Pipeline: an ICM circuit (`icm`) is laid out as canonical defect geometry
//! (`canonical`), compressed by signature-preserving moves (`moves`,
//! `optimizer`) and priced in physical qubits and time (`resources`). The
//! `service` module hosts shared puzzle sessions over the same move set.

pub mod canonical;
pub mod fixtures;
pub mod geometry;
pub mod icm;
pub mod moves;
pub mod optimizer;
pub mod resources;
pub mod service;
pub mod topology;
pub mod tqc;
