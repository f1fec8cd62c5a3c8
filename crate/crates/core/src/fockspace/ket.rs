//! Sparse occupation-number states and superpositions.

use super::mode::{ModeLabel, PathTag};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::btree_map;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Amplitudes with magnitude below this are dropped after every operation.
pub const AMPLITUDE_CUTOFF: f64 = 1e-15;

/// A state is accepted as normalized when its norm is within this tolerance
/// of one.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// An occupation pattern: how many photons sit in each mode. Zero
/// occupations are never stored, so equal patterns compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BasisState(BTreeMap<ModeLabel, u32>);

impl BasisState {
    /// The vacuum: no photons anywhere.
    pub fn vacuum() -> Self {
        Self::default()
    }

    /// Builds a pattern from `(mode, count)` pairs; counts for repeated modes
    /// add up and zero counts are ignored.
    pub fn from_occupations<I>(occupations: I) -> Self
    where
        I: IntoIterator<Item = (ModeLabel, u32)>,
    {
        let mut map = BTreeMap::new();
        for (mode, count) in occupations {
            if count > 0 {
                *map.entry(mode).or_insert(0) += count;
            }
        }
        Self(map)
    }

    /// Single photon in `mode`.
    pub fn single(mode: ModeLabel) -> Self {
        Self::from_occupations([(mode, 1)])
    }

    pub fn occupation(&self, mode: &ModeLabel) -> u32 {
        self.0.get(mode).copied().unwrap_or(0)
    }

    pub fn total_photons(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn photons_on_path(&self, path: PathTag) -> u32 {
        self.0
            .iter()
            .filter(|(m, _)| m.path == path)
            .map(|(_, &n)| n)
            .sum()
    }

    pub fn is_vacuum(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> btree_map::Iter<'_, ModeLabel, u32> {
        self.0.iter()
    }

    pub fn modes(&self) -> impl Iterator<Item = &ModeLabel> {
        self.0.keys()
    }

    /// Copy with the occupation of `mode` replaced (removed when zero).
    pub(crate) fn with_occupation(&self, mode: ModeLabel, count: u32) -> Self {
        let mut map = self.0.clone();
        if count == 0 {
            map.remove(&mode);
        } else {
            map.insert(mode, count);
        }
        Self(map)
    }

    /// Copy with every mode relabelled through `f`. The relabelling must be
    /// injective on the occupied modes (true for all uses here: OAM shifts
    /// and path moves).
    pub(crate) fn relabelled(&self, f: impl Fn(ModeLabel) -> ModeLabel) -> Self {
        let mut map = BTreeMap::new();
        for (&mode, &count) in &self.0 {
            *map.entry(f(mode)).or_insert(0) += count;
        }
        Self(map)
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_vacuum() {
            return f.write_str("|vac>");
        }
        f.write_str("|")?;
        for (i, (mode, count)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{count}@{mode}")?;
        }
        f.write_str(">")
    }
}

/// A (not necessarily normalized) superposition of occupation patterns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ket(BTreeMap<BasisState, Complex64>);

impl Ket {
    /// The zero vector (no terms at all).
    pub fn zero() -> Self {
        Self::default()
    }

    /// The vacuum state with unit amplitude.
    pub fn vacuum() -> Self {
        Self::basis(BasisState::vacuum())
    }

    /// A single occupation pattern with unit amplitude.
    pub fn basis(state: BasisState) -> Self {
        let mut map = BTreeMap::new();
        map.insert(state, Complex64::new(1.0, 0.0));
        Self(map)
    }

    /// Accumulates `(pattern, amplitude)` terms; amplitudes on repeated
    /// patterns add, and anything below [`AMPLITUDE_CUTOFF`] is dropped.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (BasisState, Complex64)>,
    {
        let mut map: BTreeMap<BasisState, Complex64> = BTreeMap::new();
        for (state, amp) in terms {
            *map.entry(state).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        let mut ket = Self(map);
        ket.prune();
        ket
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.0.len()
    }

    pub fn amplitude(&self, state: &BasisState) -> Complex64 {
        self.0
            .get(state)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> btree_map::Iter<'_, BasisState, Complex64> {
        self.0.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n <= 0.0 {
            return Err(Error::domain("normalize: cannot normalize a zero ket"));
        }
        for amp in self.0.values_mut() {
            *amp /= n;
        }
        Ok(())
    }

    /// True when the norm is within [`NORM_TOLERANCE`] of one.
    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for amp in out.0.values_mut() {
            *amp *= factor;
        }
        out.prune();
        out
    }

    pub fn add(&self, other: &Ket) -> Self {
        Self::from_terms(
            self.iter()
                .chain(other.iter())
                .map(|(s, a)| (s.clone(), *a)),
        )
    }

    /// Drops amplitudes with magnitude below [`AMPLITUDE_CUTOFF`].
    pub fn prune(&mut self) {
        self.0.retain(|_, amp| amp.norm() >= AMPLITUDE_CUTOFF);
    }

    /// All modes occupied by at least one term.
    pub fn occupied_modes(&self) -> BTreeSet<ModeLabel> {
        self.0
            .keys()
            .flat_map(|state| state.modes().copied())
            .collect()
    }

    /// Largest total photon number over the terms.
    pub fn max_photons(&self) -> u32 {
        self.0
            .keys()
            .map(|state| state.total_photons())
            .max()
            .unwrap_or(0)
    }
}

/// Tensor product of states over disjoint mode sets.
///
/// Fails when the two states share an occupied mode: the joint state of a
/// shared mode is not a product and must be built through the element
/// operations instead.
pub fn tensor(x: &Ket, y: &Ket) -> Result<Ket> {
    let mx = x.occupied_modes();
    let my = y.occupied_modes();
    if let Some(shared) = mx.intersection(&my).next() {
        return Err(Error::domain(format!(
            "tensor: mode sets overlap at {shared}"
        )));
    }
    Ok(Ket::from_terms(x.iter().flat_map(|(sx, ax)| {
        y.iter().map(move |(sy, ay)| {
            let joint = BasisState::from_occupations(
                sx.iter()
                    .map(|(&m, &n)| (m, n))
                    .chain(sy.iter().map(|(&m, &n)| (m, n))),
            );
            (joint, ax * ay)
        })
    })))
}

/// Hermitian inner product `<x|y>` (conjugate-linear in `x`).
pub fn inner_product(x: &Ket, y: &Ket) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (state, ax) in x.iter() {
        let ay = y.amplitude(state);
        if ay != Complex64::new(0.0, 0.0) {
            acc += ax.conj() * ay;
        }
    }
    acc
}
