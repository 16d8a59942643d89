//! Linking invariants: the machine-checkable stand-in for "same computation".

pub mod linking;
pub mod signature;

pub use linking::{
    canonical_orientation, link_curves, linking_in_frame, linking_number, signed_crossing_sum, solid_angle_sum,
    ClosureFrame, LinkingError, Vec3,
};
pub use signature::{signature, signatures_equal, linking_matrix, LinkingMatrix, SignatureDiff, StrandEntry, TopoSignature};
