//! Sparse multimode Fock-space states and passive optical elements.
//!
//! A mode is labelled by spatial path, polarization and OAM index. States are
//! sparse maps from occupation patterns to complex amplitudes, so a handful of
//! photons in an eight-path circuit stays cheap no matter how many modes are
//! nominally available.

mod ket;
mod mode;
mod ops;

pub use ket::{inner_product, tensor, BasisState, Ket, AMPLITUDE_CUTOFF, NORM_TOLERANCE};
pub use mode::{ModeLabel, PathTag, Polarization};
pub use ops::{
    apply_beamsplitter, apply_filter, apply_mismatch, apply_oam_shift, apply_phase,
    measure_pattern, mismatch_carrier_factors,
};

pub(crate) use ops::apply_beamsplitter_paths;
