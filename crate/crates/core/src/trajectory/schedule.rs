use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jump_code::JumpCode;
use crate::quantum::DenseOperator;

#[derive(Debug, Clone)]
pub enum ScheduledAction {
    /// Collective `X` bang-bang pulse.
    CollectivePulse,
    /// Arbitrary instantaneous unitary.
    Unitary { operator: Arc<DenseOperator>, label: String },
    /// Ancilla-based measurement of the code stabilizer.
    ParityCheck,
}

impl ScheduledAction {
    // Pulses go first at coinciding times, parity checks last.
    fn priority(&self) -> u8 {
        match self {
            ScheduledAction::CollectivePulse => 0,
            ScheduledAction::Unitary { .. } => 1,
            ScheduledAction::ParityCheck => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TimedAction {
    pub time: f64,
    pub action: ScheduledAction,
}

/// Feedback on reported emissions: apply the code's recovery unitary for the
/// reported position `delay` time units after the emission.
#[derive(Debug, Clone)]
pub struct RecoveryPolicy {
    pub code: Arc<JumpCode>,
    pub delay: f64,
}

/// Everything that happens to a register apart from emission: pulses, gates,
/// recoveries and parity checks. All actions are instantaneous.
#[derive(Debug, Clone)]
pub struct ProtocolSchedule {
    num_qubits: usize,
    actions: Vec<TimedAction>,
    recovery: Option<RecoveryPolicy>,
    parity_code: Option<Arc<JumpCode>>,
}

impl ProtocolSchedule {
    pub fn new(num_qubits: usize) -> Self {
        Self { num_qubits, actions: Vec::new(), recovery: None, parity_code: None }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn actions(&self) -> &[TimedAction] {
        &self.actions
    }

    pub fn recovery(&self) -> Option<&RecoveryPolicy> {
        self.recovery.as_ref()
    }

    pub(crate) fn parity_code(&self) -> Option<&Arc<JumpCode>> {
        self.parity_code.as_ref()
    }

    fn insert(&mut self, time: f64, action: ScheduledAction) -> Result<()> {
        if !(time.is_finite() && time >= 0.0) {
            return Err(Error::InvalidParameter(format!("action time must be finite and ≥ 0, got {time}")));
        }
        let key = (time, action.priority());
        let at = self.actions.partition_point(|a| (a.time, a.action.priority()) <= key);
        self.actions.insert(at, TimedAction { time, action });
        Ok(())
    }

    pub fn add_pulse(&mut self, time: f64) -> Result<()> {
        self.insert(time, ScheduledAction::CollectivePulse)
    }

    pub fn add_unitary(&mut self, time: f64, operator: DenseOperator, label: impl Into<String>) -> Result<()> {
        if operator.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch { expected: 1 << self.num_qubits, found: operator.dim() });
        }
        operator.ensure_unitary()?;
        self.insert(time, ScheduledAction::Unitary { operator: Arc::new(operator), label: label.into() })
    }

    pub fn add_parity_check(&mut self, time: f64, code: Arc<JumpCode>) -> Result<()> {
        self.check_code(&code)?;
        self.parity_code = Some(code);
        self.insert(time, ScheduledAction::ParityCheck)
    }

    pub fn set_recovery(&mut self, code: Arc<JumpCode>, delay: f64) -> Result<()> {
        self.check_code(&code)?;
        if !(delay.is_finite() && delay >= 0.0) {
            return Err(Error::InvalidParameter(format!("recovery delay must be ≥ 0, got {delay}")));
        }
        self.recovery = Some(RecoveryPolicy { code, delay });
        Ok(())
    }

    fn check_code(&self, code: &JumpCode) -> Result<()> {
        if code.num_physical() != self.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.num_qubits, found: code.num_physical() });
        }
        Ok(())
    }

    /// Number of collective pulses applied at or before `time`.
    pub fn pulses_through(&self, time: f64) -> usize {
        self.actions
            .iter()
            .filter(|a| matches!(a.action, ScheduledAction::CollectivePulse) && a.time <= time)
            .count()
    }

    pub fn has_parity_checks(&self) -> bool {
        self.actions.iter().any(|a| matches!(a.action, ScheduledAction::ParityCheck))
    }
}
