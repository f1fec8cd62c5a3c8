//! Circuit-element operations on Fock-space kets.
//!
//! Everything here reduces to one engine, [`apply_two_mode_unitary`], which
//! expands `(m11 a1' + m21 a2')^{n1} (m12 a1' + m22 a2')^{n2} |0>` for each
//! basis term and reassembles the result with the right bosonic
//! normalization. The public wrappers encode the concrete elements of the
//! interferometer: 50:50 splitters, phase plates, OAM-shifting holograms, the
//! alignment-mismatch element and the single-mode filter.

use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::ket::{BasisState, Ket};
use crate::fockspace::mode::{ModeLabel, PathTag, Polarization};
use crate::quasiclassical::{binomial, ln_factorial};

/// Scattering matrix of the symmetric 50:50 beamsplitter: each reflection
/// picks up `i`, each transmission is real, columns act on the two inputs.
pub(crate) fn beamsplitter_matrix() -> [[Complex64; 2]; 2] {
    let t = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let r = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    [[t, r], [r, t]]
}

/// Applies the mode map `a_in1' -> m11 a_out1' + m21 a_out2'`,
/// `a_in2' -> m12 a_out1' + m22 a_out2'` to every basis term of `state`.
///
/// Photons in modes other than `in1`/`in2` pass through untouched. The output
/// modes must not already be occupied once the input occupation has been
/// removed; that would call for bosonic recombination with modes the element
/// never touched, which is always a wiring mistake in this crate.
pub(crate) fn apply_two_mode_unitary(
    state: &Ket,
    in1: ModeLabel,
    in2: ModeLabel,
    out1: ModeLabel,
    out2: ModeLabel,
    m: &[[Complex64; 2]; 2],
) -> Result<Ket> {
    if in1 == in2 || out1 == out2 {
        return Err(Error::domain(format!(
            "two-mode unitary: mode pairs must be distinct, got {in1}/{in2} -> {out1}/{out2}"
        )));
    }
    let mut terms: Vec<(BasisState, Complex64)> = Vec::new();
    for (basis, amp) in state.iter() {
        let n1 = basis.occupation(&in1);
        let n2 = basis.occupation(&in2);
        let rest = basis.with_occupation(in1, 0).with_occupation(in2, 0);
        for out in [out1, out2] {
            if rest.occupation(&out) > 0 {
                return Err(Error::domain(format!(
                    "two-mode unitary: output mode {out} already occupied in {basis}"
                )));
            }
        }
        if n1 == 0 && n2 == 0 {
            terms.push((rest, *amp));
            continue;
        }
        let ln_in = ln_factorial(n1 as u64) + ln_factorial(n2 as u64);
        for j in 0..=n1 {
            for k in 0..=n2 {
                let p = j + k;
                let q = (n1 - j) + (n2 - k);
                let weight = m[0][0].powu(j)
                    * m[1][0].powu(n1 - j)
                    * m[0][1].powu(k)
                    * m[1][1].powu(n2 - k);
                let scale = binomial(n1, j)
                    * binomial(n2, k)
                    * (0.5 * (ln_factorial(p as u64) + ln_factorial(q as u64) - ln_in)).exp();
                let next = rest.with_occupation(out1, p).with_occupation(out2, q);
                terms.push((next, amp * weight * scale));
            }
        }
    }
    Ok(Ket::from_terms(terms))
}

/// Mixes one polarization/OAM sector on a symmetric 50:50 beamsplitter.
///
/// All four labels must name the same sector and may differ only in path;
/// light on the two input paths in other sectors is not touched, so callers
/// mixing multi-sector states should loop over every occupied sector.
pub fn apply_beamsplitter(
    state: &Ket,
    in1: ModeLabel,
    in2: ModeLabel,
    out1: ModeLabel,
    out2: ModeLabel,
) -> Result<Ket> {
    for label in [in2, out1, out2] {
        if (label.pol, label.oam) != (in1.pol, in1.oam) {
            return Err(Error::domain(format!(
                "beamsplitter: modes must share one polarization/OAM sector, got {in1} vs {label}"
            )));
        }
    }
    if in1.path == in2.path || out1.path == out2.path {
        return Err(Error::domain(format!(
            "beamsplitter: input and output paths must be distinct, got {in1}/{in2} -> {out1}/{out2}"
        )));
    }
    apply_two_mode_unitary(state, in1, in2, out1, out2, &beamsplitter_matrix())
}

/// Mixes two paths on a 50:50 beamsplitter across every occupied sector.
pub(crate) fn apply_beamsplitter_paths(
    state: &Ket,
    in1: PathTag,
    in2: PathTag,
    out1: PathTag,
    out2: PathTag,
) -> Result<Ket> {
    if in1 == in2 || out1 == out2 {
        return Err(Error::domain(format!(
            "beamsplitter: paths must be distinct, got {in1}/{in2} -> {out1}/{out2}"
        )));
    }
    for out in [out1, out2] {
        if out == in1 || out == in2 {
            continue;
        }
        for (basis, _) in state.iter() {
            if basis.photons_on_path(out) > 0 {
                return Err(Error::domain(format!(
                    "beamsplitter: output path {out} already carries light in {basis}"
                )));
            }
        }
    }
    let mut sectors: BTreeSet<(Polarization, i32)> = BTreeSet::new();
    for (basis, _) in state.iter() {
        for (mode, _) in basis.iter() {
            if mode.path == in1 || mode.path == in2 {
                sectors.insert((mode.pol, mode.oam));
            }
        }
    }
    let mut next = state.clone();
    for (pol, oam) in sectors {
        next = apply_two_mode_unitary(
            &next,
            ModeLabel { path: in1, pol, oam },
            ModeLabel { path: in2, pol, oam },
            ModeLabel { path: out1, pol, oam },
            ModeLabel { path: out2, pol, oam },
            &beamsplitter_matrix(),
        )?;
    }
    Ok(next)
}

/// Advances every photon on `path` by `radians`: a term with `n` photons
/// there picks up `e^{i n radians}`.
pub fn apply_phase(state: &Ket, path: PathTag, radians: f64) -> Result<Ket> {
    if !radians.is_finite() {
        return Err(Error::domain(format!(
            "phase shift: angle must be finite, got {radians}"
        )));
    }
    let step = Complex64::from_polar(1.0, radians);
    Ok(Ket::from_terms(state.iter().map(|(basis, amp)| {
        (basis.clone(), amp * step.powu(basis.photons_on_path(path)))
    })))
}

/// Shifts the OAM index of every photon on `path` by `delta`, as a hologram
/// or spiral phase plate does. Pure relabelling, hence always succeeds.
pub fn apply_oam_shift(state: &Ket, path: PathTag, delta: i32) -> Ket {
    Ket::from_terms(state.iter().map(|(basis, amp)| {
        let relabelled = basis.relabelled(|mode| {
            if mode.path == path {
                mode.with_oam_shift(delta)
            } else {
                mode
            }
        });
        (relabelled, *amp)
    }))
}

/// Carrier sub-amplitude phase factors picked up by an OAM-`l` photon when
/// the optics behind it are rotated by `phi`: the two circular components of
/// its transverse carrier acquire `e^{2i phi}` and `e^{2i phi} e^{2i l phi}`.
pub fn mismatch_carrier_factors(oam: i32, phi: f64) -> (Complex64, Complex64) {
    let f1 = Complex64::from_polar(1.0, 2.0 * phi);
    let f2 = Complex64::from_polar(1.0, 2.0 * phi + 2.0 * f64::from(oam) * phi);
    (f1, f2)
}

/// Alignment-mismatch element: rotating the optics of one arm by `phi`
/// couples each OAM-`l` photon's aligned carrier component into the
/// orthogonal one by the angle `l*phi`, with an overall phase
/// `(2 + l) phi`. Tracked here as a two-mode rotation between the H
/// (aligned) and V (orthogonal) labels within each OAM sector on `path`.
pub fn apply_mismatch(state: &Ket, path: PathTag, phi: f64) -> Result<Ket> {
    if !phi.is_finite() {
        return Err(Error::domain(format!(
            "mismatch: rotation angle must be finite, got {phi}"
        )));
    }
    let mut oams: BTreeSet<i32> = BTreeSet::new();
    for (basis, _) in state.iter() {
        for (mode, _) in basis.iter() {
            if mode.path == path {
                oams.insert(mode.oam);
            }
        }
    }
    let mut next = state.clone();
    for oam in oams {
        let (f1, f2) = mismatch_carrier_factors(oam, phi);
        let diag = 0.5 * (f1 + f2);
        let off = (f2 - f1) / Complex64::new(0.0, 2.0);
        let m = [[diag, -off], [off, diag]];
        let h = ModeLabel { path, pol: Polarization::H, oam };
        let v = ModeLabel { path, pol: Polarization::V, oam };
        next = apply_two_mode_unitary(&next, h, v, h, v, &m)?;
    }
    Ok(next)
}

/// Single-mode filter on `path`: basis terms holding any photon there with
/// OAM other than `keep_oam` are rejected, and each surviving photon passes
/// independently with probability `efficiency`.
///
/// Returns the renormalized all-photons-pass branch together with its
/// probability. A state with no surviving branch comes back as
/// `(Ket::zero(), 0.0)`.
pub fn apply_filter(
    state: &Ket,
    path: PathTag,
    keep_oam: i32,
    efficiency: f64,
) -> Result<(Ket, f64)> {
    if !(0.0..=1.0).contains(&efficiency) {
        return Err(Error::domain(format!(
            "filter: efficiency must lie in [0, 1], got {efficiency}"
        )));
    }
    let root = efficiency.sqrt();
    let mut terms: Vec<(BasisState, Complex64)> = Vec::new();
    'term: for (basis, amp) in state.iter() {
        let mut passing = 0u32;
        for (mode, count) in basis.iter() {
            if mode.path == path {
                if mode.oam != keep_oam {
                    continue 'term;
                }
                passing += count;
            }
        }
        terms.push((basis.clone(), amp * root.powi(passing as i32)));
    }
    let mut kept = Ket::from_terms(terms);
    let pass_probability = kept.norm_sqr();
    if pass_probability == 0.0 {
        return Ok((Ket::zero(), 0.0));
    }
    kept.normalize()?;
    Ok((kept, pass_probability))
}

/// Probability that the photon counts on the listed paths come out exactly as
/// given; paths not listed are summed over. The state must be normalized.
pub fn measure_pattern(state: &Ket, pattern: &[(PathTag, u32)]) -> Result<f64> {
    if !state.is_normalized() {
        return Err(Error::domain(format!(
            "measure_pattern: state norm {} is not 1",
            state.norm()
        )));
    }
    let mut seen = BTreeSet::new();
    for (path, _) in pattern {
        if !seen.insert(*path) {
            return Err(Error::domain(format!(
                "measure_pattern: path {path} listed twice"
            )));
        }
    }
    Ok(state
        .iter()
        .filter(|(basis, _)| {
            pattern
                .iter()
                .all(|&(path, want)| basis.photons_on_path(path) == want)
        })
        .map(|(_, amp)| amp.norm_sqr())
        .sum())
}
