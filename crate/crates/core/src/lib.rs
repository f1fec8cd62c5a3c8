//! Simulation core for two-photon interference of phase-randomized weak
//! coherent states (PRWCS) carrying orbital angular momentum.
//!
//! The crate models a Mach-Zehnder interferometer in which two weak coherent
//! beams with a uniformly randomized relative phase are recombined on a 50:50
//! splitter. One output port is monitored through a polarizer, an OAM-shifting
//! element and a single-mode filter, then split again onto a pair of
//! single-photon detectors. Coincidences between those detectors, after a
//! three-run background subtraction, reveal the two-photon bunching
//! probability `cos^2(l*phi)/2` as a function of the mismatch angle `phi` and
//! the imprinted OAM index `l`.
//!
//! Two independent computation routes are provided and tested against each
//! other:
//!
//! * an exact Fock-space route ([`fockspace`], [`interferometer`],
//!   [`counting::analytic_rates`]) that propagates photon-number states
//!   through the circuit elements, and
//! * a Monte Carlo route ([`counting::simulate_timeline`],
//!   [`counting::bin_statistics`]) that propagates classical complex
//!   amplitudes per coherence-time bin and samples detector clicks.
//!
//! Their agreement is the core physics statement of the model: averaging a
//! coherent state over its phase is equivalent to a Poisson-weighted mixture
//! of number states ([`randomization`]).

pub mod counting;
pub mod error;
pub mod fockspace;
pub mod interferometer;
pub mod quasiclassical;
pub mod randomization;
pub mod streams;

pub use counting::{
    accidental_rate, analytic_rates, bin_statistics, count_coincidences, simulate_timeline,
    splitter_click_probability, three_run_subtraction, AnalyticRates, BinStats, ClickRecord,
    Coincidences, DetectorConfig, DetectorId, SourceConfig, SubtractionResult, Tally,
};
pub use error::{Error, Result};
pub use fockspace::{
    apply_beamsplitter, apply_filter, apply_mismatch, apply_oam_shift, apply_phase,
    measure_pattern, BasisState, Ket, ModeLabel, PathTag, Polarization,
};
pub use interferometer::{
    build_circuit, bunching_probability, conditional_probability, subspace_coefficients,
    CircuitConfig, DetectionPattern, Element,
};
pub use quasiclassical::{
    coherent_fock_amplitudes, mean_field, number_stddev, poisson_pmf, quantum_classical_ratio,
    truncation_level, CoherentAmplitude, FieldScale, PhotonDistribution,
};
pub use randomization::{
    randomized_density_analytic, randomized_density_mc, sample_phase, SmallDensity,
};
