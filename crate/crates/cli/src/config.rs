//! Run specification: one JSON document describing the circuit, the two
//! sources, the detectors, the acquisition settings and the scan grid.

use prwcs_core::interferometer::CircuitConfig;
use prwcs_core::{DetectorConfig, Error, SourceConfig};
use serde::{Deserialize, Serialize};

/// Timing of one acquisition run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcquisitionConfig {
    pub duration_s: f64,
    /// Coincidence matching window: clicks with `|t1 - t2| <= window_s`
    /// count as a pair.
    pub window_s: f64,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self {
            duration_s: 5.0,
            window_s: 1e-8,
        }
    }
}

impl AcquisitionConfig {
    pub fn validate(&self) -> prwcs_core::Result<()> {
        for (field, value) in [
            ("acquisition.duration_s", self.duration_s),
            ("acquisition.window_s", self.window_s),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::config(field, format!("must be finite and > 0, got {value}")));
            }
        }
        Ok(())
    }
}

/// Inclusive grid of mismatch angles, in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub start_deg: f64,
    pub stop_deg: f64,
    pub step_deg: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            start_deg: 0.0,
            stop_deg: 180.0,
            step_deg: 22.5,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> prwcs_core::Result<()> {
        for (field, value) in [
            ("scan.start_deg", self.start_deg),
            ("scan.stop_deg", self.stop_deg),
            ("scan.step_deg", self.step_deg),
        ] {
            if !value.is_finite() {
                return Err(Error::config(field, format!("must be finite, got {value}")));
            }
        }
        if self.step_deg <= 0.0 {
            return Err(Error::config(
                "scan.step_deg",
                format!("must be > 0, got {}", self.step_deg),
            ));
        }
        if self.stop_deg < self.start_deg {
            return Err(Error::config(
                "scan.stop_deg",
                format!("must be >= start_deg, got {} < {}", self.stop_deg, self.start_deg),
            ));
        }
        Ok(())
    }

    /// The grid points, endpoint included up to rounding slack.
    pub fn angles_deg(&self) -> Vec<f64> {
        let span = self.stop_deg - self.start_deg;
        let steps = (span / self.step_deg + 1e-9).floor() as usize;
        (0..=steps)
            .map(|k| self.start_deg + k as f64 * self.step_deg)
            .collect()
    }
}

/// Everything one invocation needs; serializes back to the same JSON shape
/// it was read from, so reports can embed a re-runnable copy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    pub circuit: CircuitConfig,
    pub source: SourceConfig,
    pub detector: DetectorConfig,
    pub acquisition: AcquisitionConfig,
    pub scan: ScanConfig,
    pub seed: u64,
}

impl RunSpec {
    pub fn validate(&self) -> prwcs_core::Result<()> {
        self.circuit.validate()?;
        self.source.validate()?;
        self.detector.validate()?;
        self.acquisition.validate()?;
        self.scan.validate()
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let spec: RunSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spec_validates() {
        RunSpec::default().validate().unwrap();
    }

    #[test]
    fn default_scan_covers_one_fringe_period() {
        let angles = ScanConfig::default().angles_deg();
        assert_eq!(angles.len(), 9);
        assert_eq!(angles[0], 0.0);
        assert_eq!(*angles.last().unwrap(), 180.0);
    }

    #[test]
    fn grid_includes_endpoint_despite_rounding() {
        let scan = ScanConfig {
            start_deg: 0.0,
            stop_deg: 90.0,
            step_deg: 30.0,
        };
        assert_eq!(scan.angles_deg(), vec![0.0, 30.0, 60.0, 90.0]);
    }

    #[test]
    fn json_round_trip_preserves_the_spec() {
        let spec = RunSpec {
            seed: 99,
            ..RunSpec::default()
        };
        let text = serde_json::to_string_pretty(&spec).unwrap();
        let back = RunSpec::from_json(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = RunSpec::from_json(r#"{"sourze": {"mu_a": 0.01}}"#).unwrap_err();
        assert!(err.to_string().contains("sourze"));
    }

    #[test]
    fn invalid_values_name_the_field() {
        let err = RunSpec::from_json(r#"{"scan": {"step_deg": -1.0}}"#).unwrap_err();
        assert!(err.to_string().contains("scan.step_deg"), "{err}");
    }
}
