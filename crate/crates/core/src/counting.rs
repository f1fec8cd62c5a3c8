//! Click-level counting statistics: Monte Carlo timelines and their closed
//! forms.
//!
//! The Monte Carlo route treats each coherence-time bin classically: the two
//! arms carry coherent amplitudes, the bin's randomized phase fixes the
//! fields at the detectors, and clicks fall as an inhomogeneous Poisson
//! process (sampled sparsely by thinning a constant-rate candidate process).
//! The closed forms ([`bin_statistics`], [`analytic_rates`]) evaluate the
//! same quantities through the photon-number route: Poisson-mixture inputs
//! pushed through the exact circuit of [`crate::interferometer`]. The two
//! must agree — phase-averaging a coherent state is exactly the
//! Poisson-weighted number mixture — and the test suites hold them to that.
//!
//! All results are reproducible: every run derives its randomness from one
//! seed through counter-addressed streams (see [`crate::streams`]), so click
//! timelines are identical byte for byte across repeats and worker counts.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fockspace::{mismatch_carrier_factors, Polarization};
use crate::interferometer::{monitored_count_distribution, CircuitConfig};
use crate::quasiclassical::{binomial, PhotonDistribution};
use crate::streams::{derive_run_seed, slice_rng, PhaseOracle};

/// Timeline slice length; slices are simulated independently (possibly in
/// parallel) and concatenated in order.
const SLICE_S: f64 = 0.05;

/// Tail mass ignored when truncating the per-arm Poisson mixtures.
const TRUNCATION_EPSILON: f64 = 1e-12;

/// The two weak beams entering the interferometer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    /// Mean photons per coherence bin in arm `a`.
    pub mu_a: f64,
    /// Mean photons per coherence bin in arm `b`.
    pub mu_b: f64,
    /// Source coherence time; one interference phase is drawn per bin.
    pub coherence_time_s: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            mu_a: 0.01,
            mu_b: 0.01,
            coherence_time_s: 1e-9,
        }
    }
}

impl SourceConfig {
    pub fn validate(&self) -> Result<()> {
        for (field, value) in [("mu_a", self.mu_a), ("mu_b", self.mu_b)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::config(field, format!("must be finite and >= 0, got {value}")));
            }
        }
        if !self.coherence_time_s.is_finite() || self.coherence_time_s <= 0.0 {
            return Err(Error::config(
                "coherence_time_s",
                format!("must be finite and > 0, got {}", self.coherence_time_s),
            ));
        }
        Ok(())
    }

    fn with_arms(&self, open_a: bool, open_b: bool) -> Self {
        Self {
            mu_a: if open_a { self.mu_a } else { 0.0 },
            mu_b: if open_b { self.mu_b } else { 0.0 },
            ..self.clone()
        }
    }
}

/// The pair of single-photon detectors behind the final splitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub efficiency: f64,
    pub dark_rate_hz: f64,
    /// Non-paralyzable recovery time; zero disables it.
    pub dead_time_s: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            efficiency: 0.6,
            dark_rate_hz: 100.0,
            dead_time_s: 0.0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::config(
                "efficiency",
                format!("must lie in [0, 1], got {}", self.efficiency),
            ));
        }
        for (field, value) in [("dark_rate_hz", self.dark_rate_hz), ("dead_time_s", self.dead_time_s)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::config(field, format!("must be finite and >= 0, got {value}")));
            }
        }
        Ok(())
    }
}

/// One of the two coincidence detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectorId {
    D1,
    D2,
}

impl DetectorId {
    pub const BOTH: [DetectorId; 2] = [DetectorId::D1, DetectorId::D2];

    pub fn index(self) -> usize {
        match self {
            DetectorId::D1 => 0,
            DetectorId::D2 => 1,
        }
    }
}

impl std::fmt::Display for DetectorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DetectorId::D1 => "d1",
            DetectorId::D2 => "d2",
        })
    }
}

/// A single detector click.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickRecord {
    pub time_s: f64,
    pub detector: DetectorId,
}

/// Totals extracted from one click timeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coincidences {
    /// Greedily matched one-use pairs with `|t1 - t2| <= window`.
    pub pairs: u64,
    pub singles: [u64; 2],
    pub window_s: f64,
}

/// Counts and rates of one acquisition run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tally {
    pub singles: [u64; 2],
    pub coincidences: u64,
    pub duration_s: f64,
    pub window_s: f64,
}

impl Tally {
    pub fn coincidence_rate_hz(&self) -> f64 {
        self.coincidences as f64 / self.duration_s
    }

    pub fn singles_rate_hz(&self, detector: DetectorId) -> f64 {
        self.singles[detector.index()] as f64 / self.duration_s
    }
}

/// Outcome of the three-measurement protocol: both arms open, then each arm
/// alone, with the single-arm coincidences subtracted from the raw count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubtractionResult {
    pub raw: Tally,
    pub arm_a: Tally,
    pub arm_b: Tally,
    /// `raw - arm_a - arm_b` coincidence counts; may fluctuate negative.
    pub absolute: f64,
    /// Poisson error of the subtraction, `sqrt(N_raw + N_a + N_b)`.
    pub standard_error: f64,
}

impl SubtractionResult {
    pub fn absolute_rate_hz(&self) -> f64 {
        self.absolute / self.raw.duration_s
    }
}

/// Per-coherence-bin click statistics, evaluated through the photon-number
/// route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinStats {
    /// Probability that a given detector clicks in a bin.
    pub p_click: [f64; 2],
    /// Probability that both detectors click in the same bin.
    pub p_joint: f64,
    pub coherence_time_s: f64,
}

/// Closed-form counting rates for one mismatch setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticRates {
    pub singles_hz: [f64; 2],
    /// Coincidence rate with both arms open, including cross-bin accidentals
    /// inside the matching window.
    pub raw_hz: f64,
    pub arm_a_hz: f64,
    pub arm_b_hz: f64,
    /// `raw - arm_a - arm_b`.
    pub absolute_hz: f64,
    /// Same-bin part of the subtracted rate, free of windowed accidentals.
    pub same_bin_absolute_hz: f64,
    /// Idealized two-photon cross term `mu_a mu_b J(1,1) / T`, dark counts
    /// excluded: what the subtraction is meant to isolate.
    pub leading_hz: f64,
}

/// Probability that both detectors behind the 50:50 splitter click when `n`
/// photons arrive at it and each is seen with probability `efficiency`.
pub fn splitter_click_probability(n: u32, efficiency: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&efficiency) {
        return Err(Error::domain(format!(
            "splitter_click_probability: efficiency must lie in [0, 1], got {efficiency}"
        )));
    }
    Ok(pair_click_probability(n, efficiency, 0.0))
}

/// Same as [`splitter_click_probability`] with an extra per-bin dark-click
/// probability folded into each detector.
fn pair_click_probability(n: u32, efficiency: f64, p_dark: f64) -> f64 {
    let quiet = 1.0 - p_dark;
    let miss = 1.0 - efficiency;
    (0..=n)
        .map(|k| {
            let split = binomial(n, k) * 0.5f64.powi(n as i32);
            let d1 = 1.0 - quiet * miss.powi(k as i32);
            let d2 = 1.0 - quiet * miss.powi((n - k) as i32);
            split * d1 * d2
        })
        .sum()
}

fn single_click_probability(n: u32, efficiency: f64, p_dark: f64) -> f64 {
    1.0 - (1.0 - p_dark) * (1.0 - 0.5 * efficiency).powi(n as i32)
}

/// Expected accidental coincidence rate between two independent click
/// streams matched over `|t1 - t2| <= window_s`.
pub fn accidental_rate(rate1_hz: f64, rate2_hz: f64, window_s: f64) -> f64 {
    2.0 * rate1_hz * rate2_hz * window_s
}

/// Classical per-bin detector intensity, as `nu(theta) = base + 2
/// Re(cross e^{i theta})` detected photons per bin (identical for both
/// detectors; the final splitter is balanced).
///
/// Derived by pushing the two coherent amplitudes through exactly the same
/// element conventions as the photon-number route: OAM imprinting, the
/// carrier rotation of the mismatch, the recombining splitter and the
/// monitored-port losses.
fn detector_bin_intensity(
    circuit: &CircuitConfig,
    source: &SourceConfig,
    detector: &DetectorConfig,
) -> (f64, Complex64) {
    let root_half = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let i_root_half = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    // Monitored-port amplitude per (carrier, OAM): a theta-independent part
    // from arm a and a coefficient of e^{i theta} from arm b.
    let mut modes: BTreeMap<(Polarization, i32), (Complex64, Complex64)> = BTreeMap::new();
    let alpha_a = Complex64::new(source.mu_a.sqrt(), 0.0);
    modes.entry((Polarization::H, circuit.l1)).or_insert((Complex64::ZERO, Complex64::ZERO)).0 +=
        alpha_a * root_half;
    let (f1, f2) = mismatch_carrier_factors(circuit.l2, circuit.phi);
    let aligned = 0.5 * (f1 + f2);
    let rotated = (f2 - f1) / Complex64::new(0.0, 2.0);
    let alpha_b = Complex64::new(source.mu_b.sqrt(), 0.0);
    modes.entry((Polarization::H, circuit.l2)).or_insert((Complex64::ZERO, Complex64::ZERO)).1 +=
        alpha_b * aligned * i_root_half;
    modes.entry((Polarization::V, circuit.l2)).or_insert((Complex64::ZERO, Complex64::ZERO)).1 +=
        alpha_b * rotated * i_root_half;

    let mut base = 0.0;
    let mut cross = Complex64::ZERO;
    for (&(pol, oam), &(steady, turning)) in &modes {
        let polarizer = if !circuit.pbs2_enabled {
            1.0
        } else if pol == Polarization::H {
            circuit.pbs2_transmission
        } else {
            0.0
        };
        let filter = if oam + circuit.l3 == 0 {
            circuit.filter_efficiency
        } else {
            0.0
        };
        let survival = polarizer * circuit.slm_efficiency * filter;
        // Half the monitored intensity reaches each detector.
        let weight = detector.efficiency * survival * 0.5;
        base += weight * (steady.norm_sqr() + turning.norm_sqr());
        cross += weight * steady.conj() * turning;
    }
    (base, cross)
}

/// Simulates the click timeline of both detectors over `duration_s`,
/// returning records sorted by time.
///
/// Clicks are drawn per 50 ms slice from counter-addressed streams, so the
/// output is a pure function of the configuration and `seed` regardless of
/// how many threads process the slices.
pub fn simulate_timeline(
    circuit: &CircuitConfig,
    source: &SourceConfig,
    detector: &DetectorConfig,
    duration_s: f64,
    seed: u64,
) -> Result<Vec<ClickRecord>> {
    circuit.validate()?;
    source.validate()?;
    detector.validate()?;
    if !duration_s.is_finite() || duration_s <= 0.0 {
        return Err(Error::config(
            "duration_s",
            format!("must be finite and > 0, got {duration_s}"),
        ));
    }
    let bin_s = source.coherence_time_s;
    let (base, cross) = detector_bin_intensity(circuit, source, detector);
    let peak_rate_hz = (base + 2.0 * cross.norm()) / bin_s + detector.dark_rate_hz;
    if peak_rate_hz == 0.0 {
        return Ok(Vec::new());
    }
    let slices = (duration_s / SLICE_S).ceil() as u64;
    let mut tasks: Vec<(u64, usize)> = Vec::new();
    for slice in 0..slices {
        for channel in 0..2 {
            tasks.push((slice, channel));
        }
    }
    let per_task: Vec<Vec<f64>> = tasks
        .par_iter()
        .map(|&(slice, channel)| {
            let mut rng = slice_rng(seed, slice, channel as u64);
            let mut oracle = PhaseOracle::new(seed);
            let exp = Exp::new(peak_rate_hz).expect("positive candidate rate");
            let start = slice as f64 * SLICE_S;
            let end = (start + SLICE_S).min(duration_s);
            let mut clicks = Vec::new();
            let mut t = start;
            loop {
                t += exp.sample(&mut rng);
                if t >= end {
                    break;
                }
                let bin = (t / bin_s) as u64;
                let theta = oracle.phase(bin);
                let nu = base + 2.0 * (cross * Complex64::from_polar(1.0, theta)).re;
                let rate_hz = nu / bin_s + detector.dark_rate_hz;
                if rng.random::<f64>() * peak_rate_hz < rate_hz {
                    clicks.push(t);
                }
            }
            clicks
        })
        .collect();

    // Stitch per-detector streams back together in slice order, then apply
    // the detector recovery time across slice boundaries.
    let mut per_detector: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for (task, clicks) in tasks.iter().zip(per_task) {
        per_detector[task.1].extend(clicks);
    }
    if detector.dead_time_s > 0.0 {
        for stream in &mut per_detector {
            let mut kept = Vec::with_capacity(stream.len());
            let mut last = f64::NEG_INFINITY;
            for &t in stream.iter() {
                if t - last >= detector.dead_time_s {
                    kept.push(t);
                    last = t;
                }
            }
            *stream = kept;
        }
    }
    let mut records: Vec<ClickRecord> = per_detector[0]
        .iter()
        .map(|&t| ClickRecord {
            time_s: t,
            detector: DetectorId::D1,
        })
        .chain(per_detector[1].iter().map(|&t| ClickRecord {
            time_s: t,
            detector: DetectorId::D2,
        }))
        .collect();
    records.sort_by(|x, y| {
        x.time_s
            .total_cmp(&y.time_s)
            .then_with(|| x.detector.index().cmp(&y.detector.index()))
    });
    Ok(records)
}

/// Greedy one-use coincidence matching over a time-sorted click stream: the
/// earliest unmatched clicks of the two detectors pair up whenever they lie
/// within `window_s` of each other.
pub fn count_coincidences(clicks: &[ClickRecord], window_s: f64) -> Result<Coincidences> {
    if !window_s.is_finite() || window_s < 0.0 {
        return Err(Error::domain(format!(
            "count_coincidences: window must be finite and >= 0, got {window_s}"
        )));
    }
    if clicks.windows(2).any(|pair| pair[0].time_s > pair[1].time_s) {
        return Err(Error::domain(
            "count_coincidences: click records must be sorted by time",
        ));
    }
    let mut streams: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for click in clicks {
        streams[click.detector.index()].push(click.time_s);
    }
    let (first, second) = (&streams[0], &streams[1]);
    let mut pairs = 0u64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < first.len() && j < second.len() {
        let gap = first[i] - second[j];
        if gap.abs() <= window_s {
            pairs += 1;
            i += 1;
            j += 1;
        } else if gap < 0.0 {
            i += 1;
        } else {
            j += 1;
        }
    }
    Ok(Coincidences {
        pairs,
        singles: [first.len() as u64, second.len() as u64],
        window_s,
    })
}

fn tally_run(
    circuit: &CircuitConfig,
    source: &SourceConfig,
    detector: &DetectorConfig,
    duration_s: f64,
    window_s: f64,
    seed: u64,
) -> Result<Tally> {
    let clicks = simulate_timeline(circuit, source, detector, duration_s, seed)?;
    let counted = count_coincidences(&clicks, window_s)?;
    Ok(Tally {
        singles: counted.singles,
        coincidences: counted.pairs,
        duration_s,
        window_s,
    })
}

/// Runs the three-measurement protocol: both arms open, arm `a` alone, arm
/// `b` alone, each on an independent stream derived from `seed`.
pub fn three_run_subtraction(
    circuit: &CircuitConfig,
    source: &SourceConfig,
    detector: &DetectorConfig,
    duration_s: f64,
    window_s: f64,
    seed: u64,
) -> Result<SubtractionResult> {
    let raw = tally_run(
        circuit,
        &source.with_arms(true, true),
        detector,
        duration_s,
        window_s,
        derive_run_seed(seed, 0),
    )?;
    let arm_a = tally_run(
        circuit,
        &source.with_arms(true, false),
        detector,
        duration_s,
        window_s,
        derive_run_seed(seed, 1),
    )?;
    let arm_b = tally_run(
        circuit,
        &source.with_arms(false, true),
        detector,
        duration_s,
        window_s,
        derive_run_seed(seed, 2),
    )?;
    let absolute = raw.coincidences as f64 - arm_a.coincidences as f64 - arm_b.coincidences as f64;
    let standard_error =
        ((raw.coincidences + arm_a.coincidences + arm_b.coincidences) as f64).sqrt();
    Ok(SubtractionResult {
        raw,
        arm_a,
        arm_b,
        absolute,
        standard_error,
    })
}

/// Per-bin click statistics through the photon-number route: each arm is a
/// truncated Poisson mixture, each Fock pair propagates exactly through the
/// circuit, and the splitter-detector stage is resolved in closed form.
pub fn bin_statistics(
    circuit: &CircuitConfig,
    source: &SourceConfig,
    detector: &DetectorConfig,
) -> Result<BinStats> {
    circuit.validate()?;
    source.validate()?;
    detector.validate()?;
    let dist_a = PhotonDistribution::truncated(source.mu_a, TRUNCATION_EPSILON)?;
    let dist_b = PhotonDistribution::truncated(source.mu_b, TRUNCATION_EPSILON)?;
    let p_dark = 1.0 - (-detector.dark_rate_hz * source.coherence_time_s).exp();
    let mut p_single = 0.0;
    let mut p_joint = 0.0;
    for i in 0..=dist_a.n_max() {
        for j in 0..=dist_b.n_max() {
            let weight = dist_a.pmf(i) * dist_b.pmf(j);
            let monitored = monitored_count_distribution(circuit, i as u32, j as u32)?;
            for (n, p_n) in monitored.iter().enumerate() {
                if *p_n == 0.0 {
                    continue;
                }
                let w = weight * p_n;
                p_single += w * single_click_probability(n as u32, detector.efficiency, p_dark);
                p_joint += w * pair_click_probability(n as u32, detector.efficiency, p_dark);
            }
        }
    }
    Ok(BinStats {
        p_click: [p_single, p_single],
        p_joint,
        coherence_time_s: source.coherence_time_s,
    })
}

/// Closed-form counting rates for the three-run protocol at one setting.
///
/// `window_s` is treated as a whole number of coherence bins (at least one);
/// coincidences split into the same-bin term and `2m - 1` bins' worth of
/// cross-bin accidentals.
pub fn analytic_rates(
    circuit: &CircuitConfig,
    source: &SourceConfig,
    detector: &DetectorConfig,
    window_s: f64,
) -> Result<AnalyticRates> {
    if !window_s.is_finite() || window_s <= 0.0 {
        return Err(Error::config(
            "window_s",
            format!("must be finite and > 0, got {window_s}"),
        ));
    }
    let bin_s = source.coherence_time_s;
    let bins_per_window = (window_s / bin_s).round().max(1.0);
    let cross_bins = 2.0 * bins_per_window - 1.0;

    let both = bin_statistics(circuit, &source.with_arms(true, true), detector)?;
    let only_a = bin_statistics(circuit, &source.with_arms(true, false), detector)?;
    let only_b = bin_statistics(circuit, &source.with_arms(false, true), detector)?;
    let windowed = |stats: &BinStats| {
        (stats.p_joint + cross_bins * stats.p_click[0] * stats.p_click[1]) / bin_s
    };
    let raw_hz = windowed(&both);
    let arm_a_hz = windowed(&only_a);
    let arm_b_hz = windowed(&only_b);
    let same_bin_absolute_hz = (both.p_joint - only_a.p_joint - only_b.p_joint) / bin_s;

    let pair_dist = monitored_count_distribution(circuit, 1, 1)?;
    let j_one_one: f64 = pair_dist
        .iter()
        .enumerate()
        .map(|(n, p)| p * pair_click_probability(n as u32, detector.efficiency, 0.0))
        .sum();
    let leading_hz = source.mu_a * source.mu_b * j_one_one / bin_s;

    Ok(AnalyticRates {
        singles_hz: [both.p_click[0] / bin_s, both.p_click[1] / bin_s],
        raw_hz,
        arm_a_hz,
        arm_b_hz,
        absolute_hz: raw_hz - arm_a_hz - arm_b_hz,
        same_bin_absolute_hz,
        leading_hz,
    })
}
