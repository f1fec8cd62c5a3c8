//! Parameter-scan drivers: the mismatch-angle fringe and the rate curve.

use anyhow::{bail, ensure, Context};
use prwcs_core::streams::derive_run_seed;
use prwcs_core::{accidental_rate, analytic_rates, bin_statistics, three_run_subtraction, SourceConfig};
use serde::Serialize;

use crate::config::RunSpec;
use crate::fit::{fit_cosine, FitResult};

/// How the scan evaluates each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMode {
    /// Monte Carlo click timelines, three runs per point.
    Simulate,
    /// Closed-form expected counts.
    Analytic,
}

/// One row of the fringe scan; counts are totals over the acquisition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanPoint {
    pub phi_deg: f64,
    pub raw_cc: f64,
    pub arm_a_cc: f64,
    pub arm_b_cc: f64,
    pub absolute_cc: f64,
    pub stderr: f64,
    /// `absolute_cc` over the fitted fringe maximum.
    pub normalized: f64,
}

/// Full fringe-scan report: the points, the fit, and a copy of the spec the
/// scan was run from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub spec: RunSpec,
    pub mode: ScanMode,
    /// Detector efficiency the reported rates assume.
    pub efficiency: f64,
    /// Raw-run singles rate at the first grid point, averaged over the two
    /// detectors.
    pub singles_hz: f64,
    pub points: Vec<ScanPoint>,
    pub fit: FitResult,
    /// Fitted count total at a fringe maximum; the normalization scale.
    pub fitted_peak: f64,
}

/// Sweeps the mismatch angle over the spec's grid, running the three-run
/// subtraction at every point, and fits the resulting fringe.
pub fn scan_phi(spec: &RunSpec, mode: ScanMode) -> anyhow::Result<ScanReport> {
    spec.validate()?;
    let angles = spec.scan.angles_deg();
    ensure!(
        angles.len() >= 4,
        "scan grid has {} points; fitting the fringe needs at least 4",
        angles.len()
    );
    let duration = spec.acquisition.duration_s;
    let window = spec.acquisition.window_s;
    let mut raws = Vec::with_capacity(angles.len());
    let mut singles_hz = 0.0;
    for (index, &deg) in angles.iter().enumerate() {
        let circuit = spec.circuit.at_phi(deg.to_radians());
        match mode {
            ScanMode::Simulate => {
                let run = three_run_subtraction(
                    &circuit,
                    &spec.source,
                    &spec.detector,
                    duration,
                    window,
                    derive_run_seed(spec.seed, index as u64),
                )?;
                if index == 0 {
                    singles_hz = (run.raw.singles_rate_hz(prwcs_core::DetectorId::D1)
                        + run.raw.singles_rate_hz(prwcs_core::DetectorId::D2))
                        / 2.0;
                }
                raws.push((
                    deg,
                    run.raw.coincidences as f64,
                    run.arm_a.coincidences as f64,
                    run.arm_b.coincidences as f64,
                    run.absolute,
                    run.standard_error.max(1.0),
                ));
            }
            ScanMode::Analytic => {
                let rates = analytic_rates(&circuit, &spec.source, &spec.detector, window)?;
                if index == 0 {
                    singles_hz = (rates.singles_hz[0] + rates.singles_hz[1]) / 2.0;
                }
                let (raw, arm_a, arm_b) = (
                    rates.raw_hz * duration,
                    rates.arm_a_hz * duration,
                    rates.arm_b_hz * duration,
                );
                raws.push((
                    deg,
                    raw,
                    arm_a,
                    arm_b,
                    raw - arm_a - arm_b,
                    (raw + arm_a + arm_b).sqrt().max(1.0),
                ));
            }
        }
    }

    let phi_rad: Vec<f64> = raws.iter().map(|r| r.0.to_radians()).collect();
    let values: Vec<f64> = raws.iter().map(|r| r.4).collect();
    let sigmas: Vec<f64> = raws.iter().map(|r| r.5).collect();
    // The fringe oscillates with the OAM index written onto arm b.
    let fit = fit_cosine(spec.circuit.l2, &phi_rad, &values, &sigmas)?;
    let fitted_peak = fit.peak();
    let points = raws
        .into_iter()
        .map(|(deg, raw, arm_a, arm_b, absolute, stderr)| ScanPoint {
            phi_deg: deg,
            raw_cc: raw,
            arm_a_cc: arm_a,
            arm_b_cc: arm_b,
            absolute_cc: absolute,
            stderr,
            normalized: absolute / fitted_peak,
        })
        .collect();
    Ok(ScanReport {
        spec: spec.clone(),
        mode,
        efficiency: spec.detector.efficiency,
        singles_hz,
        points,
        fit,
        fitted_peak,
    })
}

/// Scales the two source intensities together until the closed-form singles
/// rate meets `target_hz`, preserving the `mu_b / mu_a` ratio.
pub fn source_for_singles(
    circuit: &prwcs_core::interferometer::CircuitConfig,
    template: &SourceConfig,
    detector: &prwcs_core::DetectorConfig,
    target_hz: f64,
) -> anyhow::Result<SourceConfig> {
    ensure!(
        target_hz.is_finite() && target_hz > 0.0,
        "target singles rate must be finite and > 0, got {target_hz}"
    );
    ensure!(
        template.mu_a + template.mu_b > 0.0,
        "cannot reach a singles target with both sources off"
    );
    let bin = template.coherence_time_s;
    ensure!(
        target_hz < 0.99 / bin,
        "target singles rate {target_hz} exceeds one click per coherence bin"
    );
    let scaled = |factor: f64| SourceConfig {
        mu_a: template.mu_a * factor,
        mu_b: template.mu_b * factor,
        ..template.clone()
    };
    let singles = |factor: f64| -> anyhow::Result<f64> {
        let stats = bin_statistics(circuit, &scaled(factor), detector)?;
        Ok(stats.p_click[0] / bin)
    };
    let floor_hz = singles(0.0)?;
    let target_part = target_hz - floor_hz;
    ensure!(
        target_part > 0.0,
        "target singles rate {target_hz} is below the dark-count floor {floor_hz}"
    );
    // The photon part of the singles rate is nearly proportional to the
    // intensity scale, so proportional correction converges in a few steps.
    let mut factor = 1.0;
    for _ in 0..64 {
        let part = singles(factor)? - floor_hz;
        if part <= 0.0 {
            bail!("singles rate failed to respond to the source intensity");
        }
        if (part - target_part).abs() <= 1e-9 * target_part {
            return Ok(scaled(factor));
        }
        factor *= target_part / part;
    }
    bail!("singles-rate inversion did not converge for target {target_hz}")
}

/// One row of the rate curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub singles_hz: f64,
    pub mu_a: f64,
    pub mu_b: f64,
    pub raw_hz: f64,
    pub arm_a_hz: f64,
    pub arm_b_hz: f64,
    pub absolute_hz: f64,
    /// Two-stream accidental estimate `2 R1 R2 w` at this singles rate.
    pub accidental_hz: f64,
}

/// Closed-form coincidence rates on a geometric grid of singles rates, at
/// the spec's mismatch setting.
pub fn scan_rate(spec: &RunSpec, min_hz: f64, max_hz: f64, points: usize) -> anyhow::Result<Vec<RatePoint>> {
    spec.validate()?;
    ensure!(points >= 2, "rate scan needs at least 2 points, got {points}");
    ensure!(
        min_hz.is_finite() && min_hz > 0.0 && max_hz.is_finite() && max_hz > min_hz,
        "rate scan bounds must satisfy 0 < min < max, got [{min_hz}, {max_hz}]"
    );
    let window = spec.acquisition.window_s;
    let ratio = (max_hz / min_hz).powf(1.0 / (points - 1) as f64);
    let mut rows = Vec::with_capacity(points);
    for k in 0..points {
        let target = min_hz * ratio.powi(k as i32);
        let source = source_for_singles(&spec.circuit, &spec.source, &spec.detector, target)
            .with_context(|| format!("rate-scan point at {target:.3e} Hz"))?;
        let rates = analytic_rates(&spec.circuit, &source, &spec.detector, window)?;
        rows.push(RatePoint {
            singles_hz: rates.singles_hz[0],
            mu_a: source.mu_a,
            mu_b: source.mu_b,
            raw_hz: rates.raw_hz,
            arm_a_hz: rates.arm_a_hz,
            arm_b_hz: rates.arm_b_hz,
            absolute_hz: rates.absolute_hz,
            accidental_hz: accidental_rate(rates.singles_hz[0], rates.singles_hz[1], window),
        });
    }
    Ok(rows)
}
