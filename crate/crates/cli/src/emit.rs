//! Output writers and readers: fixed-schema CSV and JSON reports.

use anyhow::Context;
use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::Path;

use crate::scan::{RatePoint, ScanReport};

/// Column order of the fringe-scan CSV; [`read_fringe_csv`] accepts any file
/// carrying at least `phi_deg`, `absolute_cc` and `stderr`.
pub const SCAN_CSV_HEADER: [&str; 7] = [
    "phi_deg",
    "raw_cc",
    "arm_a_cc",
    "arm_b_cc",
    "absolute_cc",
    "stderr",
    "normalized",
];

fn float_field(value: f64) -> String {
    format!("{value}")
}

/// Renders a fringe-scan report as CSV with the documented column order.
pub fn scan_csv_string(report: &ScanReport) -> anyhow::Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(SCAN_CSV_HEADER)?;
    for point in &report.points {
        writer.write_record([
            float_field(point.phi_deg),
            float_field(point.raw_cc),
            float_field(point.arm_a_cc),
            float_field(point.arm_b_cc),
            float_field(point.absolute_cc),
            float_field(point.stderr),
            float_field(point.normalized),
        ])?;
    }
    let bytes = writer.into_inner().context("flushing csv")?;
    Ok(String::from_utf8(bytes)?)
}

/// Renders a rate-curve as CSV.
pub fn rate_csv_string(rows: &[RatePoint]) -> anyhow::Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "singles_hz",
        "mu_a",
        "mu_b",
        "raw_hz",
        "arm_a_hz",
        "arm_b_hz",
        "absolute_hz",
        "accidental_hz",
    ])?;
    for row in rows {
        writer.write_record([
            float_field(row.singles_hz),
            float_field(row.mu_a),
            float_field(row.mu_b),
            float_field(row.raw_hz),
            float_field(row.arm_a_hz),
            float_field(row.arm_b_hz),
            float_field(row.absolute_hz),
            float_field(row.accidental_hz),
        ])?;
    }
    let bytes = writer.into_inner().context("flushing csv")?;
    Ok(String::from_utf8(bytes)?)
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// One measured fringe point as read back from a scan CSV.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct FringeRow {
    pub phi_deg: f64,
    pub absolute_cc: f64,
    pub stderr: f64,
}

/// Reads fringe points from CSV; extra columns are ignored.
pub fn read_fringe_csv<R: Read>(reader: R) -> anyhow::Result<Vec<FringeRow>> {
    let mut rows = Vec::new();
    for (index, record) in csv::Reader::from_reader(reader).deserialize().enumerate() {
        let row: FringeRow = record.with_context(|| format!("csv record {}", index + 1))?;
        rows.push(row);
    }
    anyhow::ensure!(!rows.is_empty(), "the fringe csv holds no data rows");
    Ok(rows)
}

/// Writes `content` to `path`, or to stdout when no path was given.
pub fn write_output(path: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match path {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunSpec;
    use crate::scan::{scan_phi, ScanMode};

    fn sample_report() -> ScanReport {
        scan_phi(&RunSpec::default(), ScanMode::Analytic).unwrap()
    }

    #[test]
    fn scan_csv_starts_with_the_documented_header() {
        let text = scan_csv_string(&sample_report()).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(first, SCAN_CSV_HEADER.join(","));
        assert_eq!(text.lines().count(), 10);
    }

    #[test]
    fn fringe_rows_round_trip_through_csv() {
        let report = sample_report();
        let text = scan_csv_string(&report).unwrap();
        let rows = read_fringe_csv(text.as_bytes()).unwrap();
        assert_eq!(rows.len(), report.points.len());
        for (row, point) in rows.iter().zip(&report.points) {
            assert_eq!(row.phi_deg, point.phi_deg);
            assert_eq!(row.absolute_cc, point.absolute_cc);
            assert_eq!(row.stderr, point.stderr);
        }
    }

    #[test]
    fn empty_csv_is_rejected() {
        assert!(read_fringe_csv("phi_deg,absolute_cc,stderr\n".as_bytes()).is_err());
    }

    #[test]
    fn json_report_embeds_a_reusable_spec() {
        let text = to_json_string(&sample_report()).unwrap();
        assert!(text.ends_with('\n'));
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let embedded = serde_json::to_string(&value["spec"]).unwrap();
        let spec = RunSpec::from_json(&embedded).unwrap();
        assert_eq!(spec, RunSpec::default());
    }

    #[test]
    fn rate_csv_lists_each_point() {
        let spec = RunSpec::default();
        let rows = crate::scan::scan_rate(&spec, 1e5, 1e6, 3).unwrap();
        let text = rate_csv_string(&rows).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("singles_hz,"));
    }
}
