//! Experiment configuration, read from TOML.

use std::fmt;
use std::path::{Path, PathBuf};

use bbjump::circuit::{Gate, GateRecord, TermKind};
use bbjump::decoupling::PulseSchedule;
use bbjump::quantum::{DenseOperator, StateVector, MAX_QUBITS};
use bbjump::trajectory::{DetectorModel, NoiseModel, MAX_STEP_PROBABILITY};
use bbjump::Complex64;
use serde::{Deserialize, Serialize};

use crate::scenarios::Scenario;

/// A configuration problem, located by its field path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Both,
}

impl OutputFormat {
    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Common emission rate; exclusive with `rates`.
    #[serde(default)]
    pub gamma: Option<f64>,
    /// One rate per physical qubit.
    #[serde(default)]
    pub rates: Option<Vec<f64>>,
    #[serde(default)]
    pub p_undetected: f64,
    #[serde(default)]
    pub p_misidentify: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    #[serde(default = "yes")]
    pub bb_enabled: bool,
    #[serde(default = "yes")]
    pub qecc_enabled: bool,
    #[serde(default)]
    pub parity_check_enabled: bool,
    #[serde(default)]
    pub parity_check_interval: Option<f64>,
    /// In units of `1/max κ`.
    #[serde(default)]
    pub recovery_delay: f64,
}

fn yes() -> bool {
    true
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            bb_enabled: true,
            qecc_enabled: true,
            parity_check_enabled: false,
            parity_check_interval: None,
            recovery_delay: 0.0,
        }
    }
}

/// A timed gate in the program; the gate fields follow the circuit JSON format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgramStep {
    pub time: f64,
    pub gate: String,
    pub qubits: Vec<usize>,
    #[serde(default)]
    pub angle: Option<f64>,
}

impl ProgramStep {
    pub fn to_gate(&self) -> bbjump::Result<Gate> {
        Gate::try_from(GateRecord { gate: self.gate.clone(), qubits: self.qubits.clone(), angle: self.angle })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// `[p_undetected, p_misidentify]` pairs for `detector_sweep`.
    #[serde(default)]
    pub detector: Vec<[f64; 2]>,
    /// Observation windows `γ·t_detect` for `double_jump_scaling`.
    #[serde(default)]
    pub gamma_t: Vec<f64>,
    /// Values of `γ·T_c` for `coherence_compare`.
    #[serde(default)]
    pub gamma_tc: Vec<f64>,
    #[serde(default)]
    pub haar_samples: Option<usize>,
    /// Logical fidelity below which a `double_jump_scaling` window failed.
    #[serde(default)]
    pub failure_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub stem: Option<String>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub base_seed: u64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_trajectories")]
    pub num_trajectories: usize,
    #[serde(default)]
    pub duration: f64,
    #[serde(default)]
    pub t_c: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    /// Logical amplitudes as `[re, im]` pairs; uniform superposition if absent.
    #[serde(default)]
    pub initial_state: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub program: Vec<ProgramStep>,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_n() -> usize {
    2
}

fn default_trajectories() -> usize {
    1000
}

pub const DEFAULT_GAMMA: f64 = 1.0;
pub const DEFAULT_FAILURE_THRESHOLD: f64 = 0.9;
pub const DEFAULT_HAAR_SAMPLES: usize = 10_000;

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(|e| ConfigError::new("", e.to_string().trim().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        self.scenario
            .parse()
            .map_err(|_| ConfigError::new("scenario", format!("unknown scenario '{}'", self.scenario)))
    }

    pub fn num_physical(&self) -> usize {
        self.n + 1
    }

    /// Emission rates, one per physical qubit.
    pub fn rates(&self) -> Vec<f64> {
        match &self.noise.rates {
            Some(r) => r.clone(),
            None => vec![self.noise.gamma.unwrap_or(DEFAULT_GAMMA); self.num_physical()],
        }
    }

    pub fn max_rate(&self) -> f64 {
        self.rates().into_iter().fold(0.0, f64::max)
    }

    pub fn detector(&self) -> DetectorModel {
        DetectorModel { p_undetected: self.noise.p_undetected, p_misidentify: self.noise.p_misidentify }
    }

    pub fn noise_model(&self) -> bbjump::Result<NoiseModel> {
        NoiseModel::new(self.rates(), self.detector())
    }

    pub fn pulse_schedule(&self) -> PulseSchedule {
        match (self.protocol.bb_enabled, self.t_c) {
            (true, Some(tc)) => PulseSchedule { period: tc, enabled: true },
            _ => PulseSchedule::disabled(),
        }
    }

    /// Trajectory step: the configured value, or the largest of
    /// `T_c/10`, `0.002/max κ` and `duration/1000` that respects both other
    /// bounds.
    pub fn effective_dt(&self) -> f64 {
        if let Some(dt) = self.dt {
            return dt;
        }
        let mut dt = f64::INFINITY;
        if let (true, Some(tc)) = (self.protocol.bb_enabled, self.t_c) {
            dt = dt.min(tc / 10.0);
        }
        let kmax = self.max_rate();
        if kmax > 0.0 {
            dt = dt.min(0.002 / kmax);
        }
        if !dt.is_finite() {
            dt = if self.duration > 0.0 { self.duration / 1000.0 } else { 1e-3 };
        }
        dt
    }

    /// Recovery delay in time units.
    pub fn recovery_delay_time(&self) -> f64 {
        let kmax = self.max_rate();
        if self.protocol.recovery_delay == 0.0 || kmax == 0.0 {
            0.0
        } else {
            self.protocol.recovery_delay / kmax
        }
    }

    /// Logical initial state.
    pub fn logical_state(&self) -> bbjump::Result<StateVector> {
        match &self.initial_state {
            Some(amps) => {
                let amps: Vec<Complex64> = amps.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                StateVector::new(self.n, amps)?.normalized()
            }
            None => {
                let dim = 1usize << self.n;
                StateVector::new(self.n, vec![Complex64::new(1.0, 0.0); dim])?.normalized()
            }
        }
    }

    pub fn failure_threshold(&self) -> f64 {
        self.sweep.failure_threshold.unwrap_or(DEFAULT_FAILURE_THRESHOLD)
    }

    pub fn haar_samples(&self) -> usize {
        self.sweep.haar_samples.unwrap_or(DEFAULT_HAAR_SAMPLES)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let scenario = self.scenario()?;
        if self.n == 0 || self.n + 2 > MAX_QUBITS {
            return Err(ConfigError::new("n", format!("must lie in 1..={}", MAX_QUBITS - 2)));
        }
        if self.num_trajectories == 0 {
            return Err(ConfigError::new("num_trajectories", "must be at least 1"));
        }
        non_negative("duration", self.duration)?;
        if scenario.uses_trajectories() && scenario != Scenario::DoubleJumpScaling && self.duration <= 0.0 {
            return Err(ConfigError::new("duration", format!("must be positive for scenario {}", self.scenario)));
        }
        if let Some(tc) = self.t_c {
            positive("t_c", tc)?;
        } else if self.protocol.bb_enabled && scenario.uses_trajectories() {
            return Err(ConfigError::new("t_c", "required when protocol.bb_enabled is true"));
        }
        self.validate_noise()?;
        if let Some(dt) = self.dt {
            positive("dt", dt)?;
        }
        let step_prob = self.effective_dt() * self.rates().iter().sum::<f64>();
        if scenario.uses_trajectories() && step_prob > MAX_STEP_PROBABILITY {
            return Err(ConfigError::new(
                "dt",
                format!("per-step jump probability bound {step_prob:.3} exceeds {MAX_STEP_PROBABILITY}"),
            ));
        }
        if self.protocol.parity_check_enabled {
            match self.protocol.parity_check_interval {
                Some(v) => positive("protocol.parity_check_interval", v)?,
                None => {
                    return Err(ConfigError::new(
                        "protocol.parity_check_interval",
                        "required when protocol.parity_check_enabled is true",
                    ))
                }
            }
        }
        non_negative("protocol.recovery_delay", self.protocol.recovery_delay)?;
        if let Some(amps) = &self.initial_state {
            if amps.len() != 1 << self.n {
                return Err(ConfigError::new("initial_state", format!("expected {} amplitudes", 1usize << self.n)));
            }
            if amps.iter().flatten().any(|v| !v.is_finite()) || amps.iter().all(|[re, im]| *re == 0.0 && *im == 0.0) {
                return Err(ConfigError::new("initial_state", "amplitudes must be finite and not all zero"));
            }
        }
        self.validate_program()?;
        self.validate_sweep()?;
        Ok(())
    }

    fn validate_noise(&self) -> Result<(), ConfigError> {
        if self.noise.gamma.is_some() && self.noise.rates.is_some() {
            return Err(ConfigError::new("noise", "set either gamma or rates, not both"));
        }
        if let Some(g) = self.noise.gamma {
            non_negative("noise.gamma", g)?;
        }
        if let Some(rates) = &self.noise.rates {
            if rates.len() != self.num_physical() {
                return Err(ConfigError::new(
                    "noise.rates",
                    format!("expected {} rates (one per physical qubit), got {}", self.num_physical(), rates.len()),
                ));
            }
            for (k, &r) in rates.iter().enumerate() {
                non_negative(&format!("noise.rates[{k}]"), r)?;
            }
        }
        probability("noise.p_undetected", self.noise.p_undetected)?;
        probability("noise.p_misidentify", self.noise.p_misidentify)?;
        if self.noise.p_undetected + self.noise.p_misidentify > 1.0 {
            return Err(ConfigError::new("noise", "p_undetected + p_misidentify must not exceed 1"));
        }
        Ok(())
    }

    fn validate_program(&self) -> Result<(), ConfigError> {
        let pulses = self.pulse_schedule().pulse_times(self.duration);
        let np = self.num_physical();
        for (k, step) in self.program.iter().enumerate() {
            let path = format!("program[{k}]");
            non_negative(&format!("{path}.time"), step.time)?;
            if step.time > self.duration {
                return Err(ConfigError::new(format!("{path}.time"), "must not exceed duration"));
            }
            let gate = step.to_gate().map_err(|e| ConfigError::new(format!("{path}.gate"), e.to_string()))?;
            if let Some(q) = gate.qubits().into_iter().find(|&q| q == 0 || q > np) {
                return Err(ConfigError::new(format!("{path}.qubits"), format!("qubit {q} outside 1..={np}")));
            }
            if let Some(a) = step.angle {
                if !a.is_finite() {
                    return Err(ConfigError::new(format!("{path}.angle"), "must be finite"));
                }
            }
            let single_z = matches!(gate, Gate::Z(_) | Gate::Evolve { kind: TermKind::Z, .. });
            // pulses at the same instant run before program steps
            let before = pulses.iter().filter(|&&t| t <= step.time + 1e-12).count();
            if single_z && before % 2 == 1 {
                return Err(ConfigError::new(
                    path,
                    format!("single-qubit Z at t={} follows an odd number ({before}) of collective pulses", step.time),
                ));
            }
        }
        Ok(())
    }

    fn validate_sweep(&self) -> Result<(), ConfigError> {
        for (k, [pu, pm]) in self.sweep.detector.iter().enumerate() {
            probability(&format!("sweep.detector[{k}][0]"), *pu)?;
            probability(&format!("sweep.detector[{k}][1]"), *pm)?;
            if pu + pm > 1.0 {
                return Err(ConfigError::new(format!("sweep.detector[{k}]"), "probabilities sum above 1"));
            }
            if self.num_physical() < 2 && *pm > 0.0 {
                return Err(ConfigError::new(format!("sweep.detector[{k}][1]"), "misidentification needs two qubits"));
            }
        }
        for (k, &v) in self.sweep.gamma_t.iter().enumerate() {
            positive(&format!("sweep.gamma_t[{k}]"), v)?;
        }
        for (k, &v) in self.sweep.gamma_tc.iter().enumerate() {
            positive(&format!("sweep.gamma_tc[{k}]"), v)?;
        }
        if let Some(s) = self.sweep.haar_samples {
            if s < 100 {
                return Err(ConfigError::new("sweep.haar_samples", "must be at least 100"));
            }
        }
        if let Some(f) = self.sweep.failure_threshold {
            if !(f > 0.0 && f < 1.0) {
                return Err(ConfigError::new("sweep.failure_threshold", "must lie in (0, 1)"));
            }
        }
        if matches!(self.scenario(), Ok(Scenario::DoubleJumpScaling)) && self.max_rate() <= 0.0 {
            return Err(ConfigError::new("noise", "double_jump_scaling needs a positive emission rate"));
        }
        Ok(())
    }

    /// Program unitaries in time order, on the physical register.
    pub fn program_unitaries(&self) -> bbjump::Result<Vec<(f64, DenseOperator, String)>> {
        let mut steps: Vec<&ProgramStep> = self.program.iter().collect();
        steps.sort_by(|a, b| a.time.total_cmp(&b.time));
        steps
            .into_iter()
            .map(|s| {
                let gate = s.to_gate()?;
                Ok((s.time, gate.unitary(self.num_physical())?, gate.to_string()))
            })
            .collect()
    }
}

fn non_negative(path: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("must be finite and ≥ 0, got {v}")))
    }
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("must be finite and > 0, got {v}")))
    }
}

fn probability(path: &str, v: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("must lie in [0, 1], got {v}")))
    }
}
