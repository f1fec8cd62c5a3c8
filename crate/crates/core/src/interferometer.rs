//! Interferometer layout and exact detection statistics for photon-number
//! inputs.
//!
//! [`build_circuit`] lays out the elements between the two input arms and
//! the detectors: OAM imprinting on each arm, the alignment mismatch on arm
//! `b`, the recombining 50:50 splitter, then — on the monitored output port —
//! an optional polarizer, the OAM-cancelling hologram, a single-mode filter
//! and a final 50:50 splitter feeding two detectors.
//!
//! [`conditional_probability`] pushes `|i photons, j photons>` through that
//! list. Unitary stages act on the ket directly; lossy stages are deferred to
//! the detection plane as per-mode survival probabilities, which is exact
//! here because nothing interferes behind them and counting statistics after
//! independent per-photon loss depend only on the number-basis diagonal.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{
    apply_beamsplitter_paths, apply_mismatch, apply_oam_shift, BasisState, Ket, ModeLabel,
    PathTag, Polarization,
};
use crate::quasiclassical::binomial;

/// Static description of the interferometer.
///
/// `l1`/`l2` are the OAM quanta imprinted on arms `a`/`b`, `l3` the shift
/// applied on the monitored port before the filter, and `phi` the alignment
/// mismatch angle of arm `b`. With `require_matched` set (the default),
/// validation insists on `l1 == l2` and `l3 == -l1`, the choice that routes
/// the interference signal through the zero-OAM filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitConfig {
    pub l1: i32,
    pub l2: i32,
    pub l3: i32,
    /// Mismatch rotation of arm `b`, radians.
    pub phi: f64,
    /// Whether the monitored port carries the polarizer that strips the
    /// mismatch-rotated carrier component.
    pub pbs2_enabled: bool,
    pub pbs2_transmission: f64,
    /// Diffraction efficiency of the OAM-cancelling hologram.
    pub slm_efficiency: f64,
    /// Transmission of the single-mode filter for the kept OAM.
    pub filter_efficiency: f64,
    pub require_matched: bool,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self {
            l1: 1,
            l2: 1,
            l3: -1,
            phi: 0.0,
            pbs2_enabled: true,
            pbs2_transmission: 1.0,
            slm_efficiency: 1.0,
            filter_efficiency: 1.0,
            require_matched: true,
        }
    }
}

impl CircuitConfig {
    /// Matched layout for one OAM quantum: `l1 = l2 = l`, `l3 = -l`.
    pub fn with_oam(l: i32) -> Self {
        Self {
            l1: l,
            l2: l,
            l3: -l,
            ..Self::default()
        }
    }

    /// Same layout at a different mismatch angle.
    pub fn at_phi(&self, phi: f64) -> Self {
        Self {
            phi,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.phi.is_finite() {
            return Err(Error::config("phi", format!("must be finite, got {}", self.phi)));
        }
        for (field, value) in [
            ("pbs2_transmission", self.pbs2_transmission),
            ("slm_efficiency", self.slm_efficiency),
            ("filter_efficiency", self.filter_efficiency),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::config(
                    field,
                    format!("must lie in [0, 1], got {value}"),
                ));
            }
        }
        if self.require_matched {
            if self.l1 != self.l2 {
                return Err(Error::config(
                    "l2",
                    format!("matched layout needs l1 == l2, got {} and {}", self.l1, self.l2),
                ));
            }
            if self.l3 != -self.l1 {
                return Err(Error::config(
                    "l3",
                    format!(
                        "matched layout needs l3 == -l1 so the signal reaches the zero-OAM filter, got {}",
                        self.l3
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// One stage of the interferometer, in beam order.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    /// Hologram adding `delta` OAM quanta on `path`.
    OamShift {
        path: PathTag,
        delta: i32,
        efficiency: f64,
    },
    /// Alignment mismatch of `path` by angle `phi`.
    Mismatch { path: PathTag, phi: f64 },
    /// Symmetric 50:50 splitter between two paths.
    Beamsplitter {
        inputs: (PathTag, PathTag),
        outputs: (PathTag, PathTag),
    },
    /// Polarizer transmitting the aligned carrier only.
    Polarizer { path: PathTag, transmission: f64 },
    /// Single-mode filter passing one OAM value.
    ModeFilter {
        path: PathTag,
        keep_oam: i32,
        efficiency: f64,
    },
    /// Final splitter distributing the monitored port onto two detectors.
    Splitter {
        input: PathTag,
        outputs: (PathTag, PathTag),
    },
}

/// The element list for `config`, from the input arms to the detectors.
pub fn build_circuit(config: &CircuitConfig) -> Result<Vec<Element>> {
    config.validate()?;
    let mut elements = vec![
        Element::OamShift {
            path: PathTag::A,
            delta: config.l1,
            efficiency: 1.0,
        },
        Element::OamShift {
            path: PathTag::B,
            delta: config.l2,
            efficiency: 1.0,
        },
        Element::Mismatch {
            path: PathTag::B,
            phi: config.phi,
        },
        Element::Beamsplitter {
            inputs: (PathTag::A, PathTag::B),
            outputs: (PathTag::C, PathTag::D),
        },
    ];
    if config.pbs2_enabled {
        elements.push(Element::Polarizer {
            path: PathTag::C,
            transmission: config.pbs2_transmission,
        });
    }
    elements.push(Element::OamShift {
        path: PathTag::C,
        delta: config.l3,
        efficiency: config.slm_efficiency,
    });
    elements.push(Element::ModeFilter {
        path: PathTag::C,
        keep_oam: 0,
        efficiency: config.filter_efficiency,
    });
    elements.push(Element::Splitter {
        input: PathTag::C,
        outputs: (PathTag::D1, PathTag::D2),
    });
    Ok(elements)
}

/// A detection outcome whose probability [`conditional_probability`] yields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionPattern {
    /// `c` photons detected at the monitored-port stage, `d` photons leaving
    /// the unmonitored port.
    Monitored { c: u32, d: u32 },
    /// Photon counts at the two detectors behind the final splitter plus the
    /// unmonitored port.
    Split { d1: u32, d2: u32, d: u32 },
}

fn modes_on_path(ket: &Ket, path: PathTag) -> Vec<ModeLabel> {
    ket.occupied_modes()
        .into_iter()
        .filter(|mode| mode.path == path)
        .collect()
}

/// Convolves `dist` with a binomial over the fate of `count` photons that
/// each survive with probability `s`.
fn convolve_binomial(dist: &[f64], count: u32, s: f64) -> Vec<f64> {
    let mut next = vec![0.0; dist.len() + count as usize];
    for (offset, p) in dist.iter().enumerate() {
        if *p == 0.0 {
            continue;
        }
        for survivors in 0..=count {
            let weight = binomial(count, survivors)
                * s.powi(survivors as i32)
                * (1.0 - s).powi((count - survivors) as i32);
            next[offset + survivors as usize] += p * weight;
        }
    }
    next
}

/// Joint distribution over (monitored-stage detections, unmonitored-port
/// photons) for the Fock input `|photons_a, photons_b>`, indexed `[c][d]`.
fn monitored_table(
    config: &CircuitConfig,
    photons_a: u32,
    photons_b: u32,
) -> Result<Vec<Vec<f64>>> {
    let elements = build_circuit(config)?;
    let mut ket = Ket::basis(BasisState::from_occupations([
        (
            ModeLabel {
                path: PathTag::A,
                pol: Polarization::H,
                oam: 0,
            },
            photons_a,
        ),
        (
            ModeLabel {
                path: PathTag::B,
                pol: Polarization::H,
                oam: 0,
            },
            photons_b,
        ),
    ]));
    let mut survival: BTreeMap<ModeLabel, f64> = BTreeMap::new();
    for element in &elements {
        match element {
            Element::OamShift {
                path,
                delta,
                efficiency,
            } => {
                ket = apply_oam_shift(&ket, *path, *delta);
                survival = survival
                    .into_iter()
                    .map(|(mode, s)| {
                        if mode.path == *path {
                            (mode.with_oam_shift(*delta), s)
                        } else {
                            (mode, s)
                        }
                    })
                    .collect();
                for mode in modes_on_path(&ket, *path) {
                    *survival.entry(mode).or_insert(1.0) *= efficiency;
                }
            }
            Element::Mismatch { path, phi } => {
                ket = apply_mismatch(&ket, *path, *phi)?;
            }
            Element::Beamsplitter { inputs, outputs } => {
                ket = apply_beamsplitter_paths(&ket, inputs.0, inputs.1, outputs.0, outputs.1)?;
            }
            Element::Polarizer { path, transmission } => {
                for mode in modes_on_path(&ket, *path) {
                    let factor = if mode.pol == Polarization::H {
                        *transmission
                    } else {
                        0.0
                    };
                    *survival.entry(mode).or_insert(1.0) *= factor;
                }
            }
            Element::ModeFilter {
                path,
                keep_oam,
                efficiency,
            } => {
                for mode in modes_on_path(&ket, *path) {
                    let factor = if mode.oam == *keep_oam { *efficiency } else { 0.0 };
                    *survival.entry(mode).or_insert(1.0) *= factor;
                }
            }
            // Only one lit input, so the final splitter adds no interference;
            // `conditional_probability` resolves it with a closed-form
            // binomial instead of growing the state space.
            Element::Splitter { .. } => {}
        }
    }
    let total = (photons_a + photons_b) as usize;
    let mut table = vec![vec![0.0; total + 1]; total + 1];
    for (basis, amp) in ket.iter() {
        let weight = amp.norm_sqr();
        let unmonitored = basis.photons_on_path(PathTag::D) as usize;
        let mut dist = vec![1.0];
        for (mode, count) in basis.iter() {
            if mode.path != PathTag::C {
                continue;
            }
            let s = survival.get(mode).copied().unwrap_or(1.0);
            dist = convolve_binomial(&dist, *count, s);
        }
        for (detected, p) in dist.iter().enumerate() {
            table[detected][unmonitored] += weight * p;
        }
    }
    Ok(table)
}

/// Probability of `pattern` given the Fock input `|photons_a, photons_b>`.
///
/// Detector quantum efficiency is not folded in here; the pattern counts
/// photons arriving at the detection stage.
pub fn conditional_probability(
    config: &CircuitConfig,
    photons_a: u32,
    photons_b: u32,
    pattern: DetectionPattern,
) -> Result<f64> {
    let table = monitored_table(config, photons_a, photons_b)?;
    let lookup = |c: u32, d: u32| -> f64 {
        table
            .get(c as usize)
            .and_then(|row| row.get(d as usize))
            .copied()
            .unwrap_or(0.0)
    };
    Ok(match pattern {
        DetectionPattern::Monitored { c, d } => lookup(c, d),
        DetectionPattern::Split { d1, d2, d } => {
            let at_stage = d1 + d2;
            lookup(at_stage, d) * binomial(at_stage, d1) * 0.5f64.powi(at_stage as i32)
        }
    })
}

/// Marginal distribution of the monitored-stage detection count for the
/// Fock input `|photons_a, photons_b>`.
pub(crate) fn monitored_count_distribution(
    config: &CircuitConfig,
    photons_a: u32,
    photons_b: u32,
) -> Result<Vec<f64>> {
    let table = monitored_table(config, photons_a, photons_b)?;
    Ok(table.iter().map(|row| row.iter().sum()).collect())
}

/// Closed form for the headline observable: the probability that one photon
/// from each arm bunches into the monitored port, `cos^2(l*phi) / 2`.
pub fn bunching_probability(l: i32, phi: f64) -> f64 {
    let c = (f64::from(l) * phi).cos();
    0.5 * c * c
}

/// Normalized coefficients `(exchange, bunching)` of the two-photon state
/// prepared when one photon enters each arm: `i e^{i l phi} / sqrt(2)` times
/// `sin(l*phi)` on the pair leaving by opposite ports and `cos(l*phi)` on
/// the pair leaving together. Each coefficient weights a two-term group, so
/// `2(|exchange|^2 + |bunching|^2) = 1`.
pub fn subspace_coefficients(l: i32, phi: f64) -> (Complex64, Complex64) {
    let angle = f64::from(l) * phi;
    let prefactor = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2)
        * Complex64::from_polar(1.0, angle);
    (prefactor * angle.sin(), prefactor * angle.cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matched(l: i32, phi: f64) -> CircuitConfig {
        CircuitConfig::with_oam(l).at_phi(phi)
    }

    #[test]
    fn default_config_validates() {
        assert!(CircuitConfig::default().validate().is_ok());
        assert_eq!(CircuitConfig::default(), CircuitConfig::with_oam(1));
    }

    #[test]
    fn validation_rejects_bad_values() {
        let mut config = CircuitConfig::default();
        config.pbs2_transmission = 1.5;
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains("pbs2_transmission"));

        let mut config = CircuitConfig::default();
        config.l3 = 2;
        assert!(config.validate().is_err());
        config.require_matched = false;
        assert!(config.validate().is_ok());

        let mut config = CircuitConfig::default();
        config.phi = f64::NAN;
        assert!(config.validate().is_err());
    }

    #[test]
    fn circuit_has_expected_stage_count() {
        assert_eq!(build_circuit(&CircuitConfig::default()).unwrap().len(), 8);
        let mut open = CircuitConfig::default();
        open.pbs2_enabled = false;
        assert_eq!(build_circuit(&open).unwrap().len(), 7);
    }

    #[test]
    fn bunching_closed_form_reference_points() {
        assert!((bunching_probability(1, 0.0) - 0.5).abs() < 1e-15);
        assert!(bunching_probability(1, std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(bunching_probability(2, std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!((bunching_probability(2, std::f64::consts::FRAC_PI_2) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fock_route_reproduces_the_bunching_law() {
        for l in 1..=3 {
            for step in 0..16 {
                let phi = step as f64 * std::f64::consts::PI / 16.0;
                let fock = conditional_probability(
                    &matched(l, phi),
                    1,
                    1,
                    DetectionPattern::Monitored { c: 2, d: 0 },
                )
                .unwrap();
                let law = bunching_probability(l, phi);
                assert!(
                    (fock - law).abs() < 1e-10,
                    "l={l} phi={phi}: {fock} vs {law}"
                );
            }
        }
    }

    #[test]
    fn coincidence_null_is_exact_at_alignment() {
        let split = conditional_probability(
            &matched(1, 0.0),
            1,
            1,
            DetectionPattern::Monitored { c: 1, d: 1 },
        )
        .unwrap();
        assert_eq!(split, 0.0);
    }

    #[test]
    fn final_splitter_statistics_are_binomial() {
        let config = matched(1, 0.4);
        let stage = conditional_probability(&config, 1, 1, DetectionPattern::Monitored { c: 2, d: 0 })
            .unwrap();
        let coincide =
            conditional_probability(&config, 1, 1, DetectionPattern::Split { d1: 1, d2: 1, d: 0 })
                .unwrap();
        let same_side =
            conditional_probability(&config, 1, 1, DetectionPattern::Split { d1: 2, d2: 0, d: 0 })
                .unwrap();
        assert!((coincide - 0.5 * stage).abs() < 1e-12);
        assert!((same_side - 0.25 * stage).abs() < 1e-12);
    }

    #[test]
    fn counts_are_complementary_without_the_polarizer() {
        for step in 0..8 {
            let phi = step as f64 * std::f64::consts::PI / 8.0;
            let mut config = matched(1, phi);
            config.pbs2_enabled = false;
            let p = |c, d| {
                conditional_probability(&config, 1, 1, DetectionPattern::Monitored { c, d })
                    .unwrap()
            };
            let total = p(2, 0) + p(1, 1) + p(0, 2);
            assert!((total - 1.0).abs() < 1e-12, "phi={phi}: total {total}");
            let both_monitored = 0.25 * (1.0 + phi.cos() * phi.cos());
            assert!(
                (p(2, 0) - both_monitored).abs() < 1e-12,
                "phi={phi}: {} vs {both_monitored}",
                p(2, 0)
            );
        }
    }

    #[test]
    fn polarizer_blocks_the_rotated_arm_at_quarter_turn() {
        let config = matched(1, std::f64::consts::FRAC_PI_2);
        let p = |c, d| {
            conditional_probability(&config, 1, 1, DetectionPattern::Monitored { c, d }).unwrap()
        };
        assert!(p(2, 0).abs() < 1e-12);
        assert!((p(1, 0) - 0.25).abs() < 1e-12);
        assert!((p(1, 1) - 0.25).abs() < 1e-12);
        assert!((p(0, 1) - 0.25).abs() < 1e-12);
        assert!((p(0, 2) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn filter_blocks_an_unmatched_hologram_setting() {
        let mut config = matched(1, 0.0);
        config.l3 = 1;
        config.require_matched = false;
        let bunch = conditional_probability(&config, 1, 1, DetectionPattern::Monitored { c: 2, d: 0 })
            .unwrap();
        assert_eq!(bunch, 0.0);
        let dist = monitored_count_distribution(&config, 1, 1).unwrap();
        assert!((dist[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detection_distribution_is_normalized() {
        for (i, j) in [(0, 0), (1, 1), (2, 1), (3, 2)] {
            let dist = monitored_count_distribution(&matched(1, 0.3), i, j).unwrap();
            let total: f64 = dist.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "({i},{j}): {total}");
        }
    }

    #[test]
    fn signal_period_in_phi_is_pi_over_l() {
        for l in 1..=3 {
            let period = std::f64::consts::PI / f64::from(l);
            for step in 0..5 {
                let phi = 0.13 + step as f64 * 0.37;
                let here = conditional_probability(
                    &matched(l, phi),
                    1,
                    1,
                    DetectionPattern::Monitored { c: 2, d: 0 },
                )
                .unwrap();
                let shifted = conditional_probability(
                    &matched(l, phi + period),
                    1,
                    1,
                    DetectionPattern::Monitored { c: 2, d: 0 },
                )
                .unwrap();
                assert!((here - shifted).abs() < 1e-10, "l={l} phi={phi}");
            }
        }
    }

    #[test]
    fn subspace_coefficients_recover_the_bunching_weight() {
        for l in 1..=3 {
            for step in 0..9 {
                let phi = step as f64 * 0.39;
                let (exchange, bunching) = subspace_coefficients(l, phi);
                let total = 2.0 * (exchange.norm_sqr() + bunching.norm_sqr());
                assert!((total - 1.0).abs() < 1e-12);
                assert!(
                    (bunching.norm_sqr() - bunching_probability(l, phi)).abs() < 1e-12,
                    "l={l} phi={phi}"
                );
            }
        }
        let (_, bunching) = subspace_coefficients(1, 0.2);
        let expect = std::f64::consts::FRAC_PI_2 + 0.2;
        assert!((bunching.arg() - expect).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn losses_only_ever_reduce_the_pair_rate(
            phi in 0.0..std::f64::consts::PI,
            lossy in 0.05f64..0.95,
            lossier_by in 0.01f64..0.5,
        ) {
            let cleaner = (lossy + lossier_by).min(1.0);
            let mut config = matched(1, phi);
            config.filter_efficiency = lossy;
            let low = conditional_probability(&config, 1, 1, DetectionPattern::Monitored { c: 2, d: 0 }).unwrap();
            config.filter_efficiency = cleaner;
            let high = conditional_probability(&config, 1, 1, DetectionPattern::Monitored { c: 2, d: 0 }).unwrap();
            prop_assert!(low <= high + 1e-12);
        }
    }
}
