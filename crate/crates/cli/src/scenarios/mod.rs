//! Named experiments runnable from a config file.

use std::fmt;
use std::str::FromStr;

use crate::config::ExperimentConfig;
use crate::report::ExperimentReport;
use crate::RunError;

mod coherence;
pub mod identities;
mod memory;
mod scaling;

pub use memory::{MemoryOutcome, MemoryRun};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    MemoryFidelity,
    CoherenceCompare,
    GateIdentities,
    DetectorSweep,
    DoubleJumpScaling,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::MemoryFidelity,
        Scenario::CoherenceCompare,
        Scenario::GateIdentities,
        Scenario::DetectorSweep,
        Scenario::DoubleJumpScaling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::MemoryFidelity => "memory_fidelity",
            Scenario::CoherenceCompare => "coherence_compare",
            Scenario::GateIdentities => "gate_identities",
            Scenario::DetectorSweep => "detector_sweep",
            Scenario::DoubleJumpScaling => "double_jump_scaling",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::MemoryFidelity => "logical fidelity of a stored register, protected vs unprotected",
            Scenario::CoherenceCompare => "single-qubit purity with and without pulses, Haar-averaged and per state",
            Scenario::GateIdentities => "operator identities behind the protocol, checked to tolerance",
            Scenario::DetectorSweep => "protected memory over imperfect detector settings",
            Scenario::DoubleJumpScaling => "failure probability against the detection window",
        }
    }

    /// Whether the scenario samples trajectories.
    pub fn uses_trajectories(self) -> bool {
        matches!(self, Scenario::MemoryFidelity | Scenario::DetectorSweep | Scenario::DoubleJumpScaling)
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Scenario::MemoryFidelity | Scenario::DetectorSweep => memory::COLUMNS,
            Scenario::CoherenceCompare => coherence::COLUMNS,
            Scenario::GateIdentities => identities::COLUMNS,
            Scenario::DoubleJumpScaling => scaling::COLUMNS,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownScenario(pub String);

impl fmt::Display for UnknownScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown scenario '{}'", self.0)
    }
}

impl std::error::Error for UnknownScenario {}

impl FromStr for Scenario {
    type Err = UnknownScenario;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL.into_iter().find(|sc| sc.name() == s).ok_or_else(|| UnknownScenario(s.to_string()))
    }
}

/// Runs the scenario named in `config`.
pub fn run_scenario(config: &ExperimentConfig) -> Result<ExperimentReport, RunError> {
    config.validate()?;
    let scenario = config.scenario()?;
    let mut report = ExperimentReport::new(config, scenario.columns());
    match scenario {
        Scenario::MemoryFidelity => memory::memory_fidelity(config, &mut report)?,
        Scenario::DetectorSweep => memory::detector_sweep(config, &mut report)?,
        Scenario::CoherenceCompare => coherence::coherence_compare(config, &mut report)?,
        Scenario::GateIdentities => identities::gate_identities(config.base_seed, &mut report)?,
        Scenario::DoubleJumpScaling => scaling::double_jump_scaling(config, &mut report)?,
    }
    Ok(report)
}
