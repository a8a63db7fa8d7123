//! Experiment reports and their JSON/CSV forms.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, OutputFormat};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Mean and standard error of per-trajectory samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityStats {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl FidelityStats {
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: f64::NAN, stderr: f64::NAN, samples: 0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr, samples: n }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EventCounts {
    pub trajectories: u64,
    pub jumps: u64,
    pub detected: u64,
    pub undetected: u64,
    pub misidentified: u64,
    pub recoveries: u64,
    pub restarts: u64,
}

impl EventCounts {
    pub fn merge(&mut self, other: &EventCounts) {
        self.trajectories += other.trajectories;
        self.jumps += other.jumps;
        self.detected += other.detected;
        self.undetected += other.undetected;
        self.misidentified += other.misidentified;
        self.recoveries += other.recoveries;
        self.restarts += other.restarts;
    }

    /// `detected + undetected = jumps`.
    pub fn is_consistent(&self) -> bool {
        self.detected + self.undetected == self.jumps && self.misidentified <= self.detected
    }
}

/// First-order purity-loss slopes for one initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSlope {
    pub beta_sq: f64,
    pub beta_phase: f64,
    pub free_measured: f64,
    /// `2|β|⁴`
    pub free_derived: f64,
    /// `|β|²`, the coefficient printed in the source literature.
    pub free_printed: f64,
    pub pulsed_measured: f64,
    /// `|α|⁴ + |β|⁴`
    pub pulsed_derived: f64,
    pub free_relative_error: f64,
    pub pulsed_relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceSummary {
    pub gamma: f64,
    pub haar_samples: usize,
    pub states: Vec<StateSlope>,
    /// Largest relative deviation of a measured slope from its derived value.
    pub max_relative_error: f64,
    /// Haar average of both derived slopes, `2/3`.
    pub derived_average_slope: f64,
    pub measured_average_free_slope: f64,
    pub measured_average_pulsed_slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSummary {
    /// Least-squares slope of `ln P_fail` against `ln(γ·t_detect)`.
    pub slope: f64,
    pub intercept: f64,
    pub points_used: usize,
    pub failure_threshold: f64,
}

/// One sweep point; `values` keys are the scenario's columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub point: usize,
    pub label: String,
    pub values: BTreeMap<String, f64>,
}

impl ReportRow {
    pub fn new(point: usize, label: impl Into<String>) -> Self {
        Self { point, label: label.into(), values: BTreeMap::new() }
    }

    pub fn set(&mut self, key: &str, value: f64) -> &mut Self {
        if value.is_finite() {
            self.values.insert(key.to_string(), value);
        }
        self
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.set(key, value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub scenario: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    /// Value columns of `rows`, in CSV order.
    pub columns: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub fidelity: Option<FidelityStats>,
    pub counts: Option<EventCounts>,
    pub separation_sigma: Option<f64>,
    pub coherence: Option<CoherenceSummary>,
    pub double_jump_probability: Option<f64>,
    pub scaling: Option<ScalingSummary>,
    pub checks_passed: Option<bool>,
    /// Seconds since the Unix epoch; not covered by the determinism contract.
    pub timestamp: u64,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig, columns: &[&str]) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            scenario: config.scenario.clone(),
            seed: config.base_seed,
            config: config.clone(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            fidelity: None,
            counts: None,
            separation_sigma: None,
            coherence: None,
            double_jump_probability: None,
            scaling: None,
            checks_passed: None,
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// CSV with a `#` prelude (schema version, scenario, seed, config echo),
    /// then `point,label,<columns…>`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# schema_version={}", self.schema_version)?;
        writeln!(out, "# tool_version={}", self.tool_version)?;
        writeln!(out, "# scenario={}", self.scenario)?;
        writeln!(out, "# seed={}", self.seed)?;
        writeln!(out, "# config={}", serde_json::to_string(&self.config).map_err(io::Error::other)?)?;
        let mut writer = csv::Writer::from_writer(out);
        let mut header = vec!["point".to_string(), "label".to_string()];
        header.extend(self.columns.iter().cloned());
        writer.write_record(&header)?;
        for row in &self.rows {
            let mut record = vec![row.point.to_string(), row.label.clone()];
            record.extend(self.columns.iter().map(|c| row.values.get(c).map(|v| v.to_string()).unwrap_or_default()));
            writer.write_record(&record)?;
        }
        writer.flush()
    }

    pub fn to_csv_string(&self) -> io::Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(io::Error::other)
    }
}

/// Writes `<stem>.json` and/or `<stem>.csv` into `dir`.
pub fn emit_report(report: &ExperimentReport, dir: &Path, stem: &str, format: OutputFormat) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if format.json() {
        let path = dir.join(format!("{stem}.json"));
        std::fs::write(&path, report.to_json().map_err(io::Error::other)?)?;
        written.push(path);
    }
    if format.csv() {
        let path = dir.join(format!("{stem}.csv"));
        report.write_csv(std::fs::File::create(&path)?)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_use_sample_variance() {
        let s = FidelityStats::from_samples(&[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(s.mean, 0.5);
        assert!((s.stderr - (1.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(FidelityStats::from_samples(&[0.3]).stderr, 0.0);
    }

    #[test]
    fn counts_consistency() {
        let mut c = EventCounts { trajectories: 1, jumps: 3, detected: 2, undetected: 1, ..Default::default() };
        assert!(c.is_consistent());
        c.merge(&EventCounts { trajectories: 1, jumps: 1, detected: 0, undetected: 0, ..Default::default() });
        assert!(!c.is_consistent());
    }
}
