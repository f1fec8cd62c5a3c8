//! Deterministic random-number plumbing.
//!
//! Every stochastic routine in this crate draws from counter-addressed
//! ChaCha streams so that results do not depend on how work is sliced across
//! threads. One base seed fans out as follows:
//!
//! * stream 0 holds the per-bin interference phases, addressed by bin index
//!   through [`PhaseOracle`];
//! * stream `1 + 2*slice + channel` drives the click sampling of one
//!   detector channel within one timeline slice ([`slice_rng`]);
//! * independent runs (the three-measurement subtraction protocol, scan
//!   points) hash the base seed with a label through [`derive_run_seed`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Detector channels simulated per timeline slice.
pub(crate) const CHANNELS_PER_SLICE: u64 = 2;

/// Uniform phases on `[0, 2*pi)` addressed by bin index.
///
/// Each query repositions the stream at the bin's own counter offset, so any
/// subset of bins can be read in any order — or concurrently from clones —
/// and always sees the same phase.
#[derive(Debug, Clone)]
pub struct PhaseOracle {
    rng: ChaCha8Rng,
}

impl PhaseOracle {
    /// Oracle over stream 0 of `seed`.
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0);
        Self { rng }
    }

    /// The interference phase of bin `index`, in `[0, 2*pi)`.
    pub fn phase(&mut self, index: u64) -> f64 {
        // A uniform f64 consumes one u64, i.e. two of the generator's words.
        self.rng.set_word_pos(2 * u128::from(index));
        self.rng.random::<f64>() * std::f64::consts::TAU
    }
}

/// Generator for one detector channel within one timeline slice.
pub(crate) fn slice_rng(seed: u64, slice: u64, channel: u64) -> ChaCha8Rng {
    debug_assert!(channel < CHANNELS_PER_SLICE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + CHANNELS_PER_SLICE * slice + channel);
    rng
}

/// Mixes a run label into a base seed (splitmix-style finalizer), so related
/// runs — the three arms of the subtraction protocol, points of a scan — use
/// uncorrelated streams while staying reproducible from one configured seed.
pub fn derive_run_seed(base: u64, label: u64) -> u64 {
    let mut z = base ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
