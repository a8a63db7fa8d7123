//! Gate lists shared by the code circuits and the encoded-gate toolkit.
//!
//! Sequences are stored in chronological order: the first element acts first.
//! On the wire every element is a flat `{gate, qubits, angle}` record.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{
    check_distinct, check_qubit, cnot, embed_product, embed_single_qubit, evolution, hadamard,
    pauli_x, pauli_y, pauli_z, DenseOperator,
};

/// Shape of a Hamiltonian term with unit coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    /// `Z_i`
    Z,
    /// `X_i`
    X,
    /// `Z_i Z_j`
    Zz,
    /// `X_i X_j`
    Xx,
    /// `X_i X_j + Y_i Y_j`
    Xy,
    /// `X_i X_j + Y_i Y_j + Z_i Z_j`
    Heisenberg,
}

impl TermKind {
    pub fn arity(self) -> usize {
        match self {
            TermKind::Z | TermKind::X => 1,
            _ => 2,
        }
    }

    fn record_name(self) -> &'static str {
        match self {
            TermKind::Z => "exp_z",
            TermKind::X => "exp_x",
            TermKind::Zz => "exp_zz",
            TermKind::Xx => "exp_xx",
            TermKind::Xy => "exp_xy",
            TermKind::Heisenberg => "exp_heis",
        }
    }

    /// Unit-coupling generator on the given qubits.
    pub fn generator(self, qubits: &[usize], num_qubits: usize) -> Result<DenseOperator> {
        if qubits.len() != self.arity() {
            return Err(Error::InvalidParameter(format!(
                "{self:?} acts on {} qubit(s), got {:?}",
                self.arity(),
                qubits
            )));
        }
        for &q in qubits {
            check_qubit(q, num_qubits)?;
        }
        check_distinct(qubits)?;
        let pair = |p: fn() -> nalgebra::Matrix2<Complex64>| {
            embed_product(&[(p(), qubits[0]), (p(), qubits[1])], num_qubits)
        };
        match self {
            TermKind::Z => embed_single_qubit(&pauli_z(), qubits[0], num_qubits),
            TermKind::X => embed_single_qubit(&pauli_x(), qubits[0], num_qubits),
            TermKind::Zz => pair(pauli_z),
            TermKind::Xx => pair(pauli_x),
            TermKind::Xy => pair(pauli_x)?.add(&pair(pauli_y)?),
            TermKind::Heisenberg => pair(pauli_x)?.add(&pair(pauli_y)?)?.add(&pair(pauli_z)?),
        }
    }
}

/// A single term `coupling · G` of a control Hamiltonian (`ħ = 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianTerm {
    pub kind: TermKind,
    pub qubits: Vec<usize>,
    pub coupling: f64,
}

impl HamiltonianTerm {
    pub fn new(kind: TermKind, qubits: &[usize], coupling: f64) -> Result<Self> {
        if qubits.len() != kind.arity() {
            return Err(Error::InvalidParameter(format!("{kind:?} needs {} qubit(s)", kind.arity())));
        }
        check_distinct(qubits)?;
        if qubits.contains(&0) {
            return Err(Error::QubitOutOfRange { index: 0, num_qubits: qubits.len() });
        }
        Ok(Self { kind, qubits: qubits.to_vec(), coupling })
    }

    pub fn z(i: usize) -> Self {
        Self { kind: TermKind::Z, qubits: vec![i], coupling: 1.0 }
    }

    pub fn x(i: usize) -> Self {
        Self { kind: TermKind::X, qubits: vec![i], coupling: 1.0 }
    }

    pub fn zz(i: usize, j: usize) -> Self {
        Self { kind: TermKind::Zz, qubits: vec![i, j], coupling: 1.0 }
    }

    pub fn xx(i: usize, j: usize) -> Self {
        Self { kind: TermKind::Xx, qubits: vec![i, j], coupling: 1.0 }
    }

    /// `J (X_i X_j + Y_i Y_j)`.
    pub fn xy(i: usize, j: usize, coupling: f64) -> Self {
        Self { kind: TermKind::Xy, qubits: vec![i, j], coupling }
    }

    /// `T_ij = ½ (X_i X_j + Y_i Y_j)`.
    pub fn hopping(i: usize, j: usize) -> Self {
        Self::xy(i, j, 0.5)
    }

    pub fn heisenberg(i: usize, j: usize, coupling: f64) -> Self {
        Self { kind: TermKind::Heisenberg, qubits: vec![i, j], coupling }
    }

    pub fn matrix(&self, num_qubits: usize) -> Result<DenseOperator> {
        Ok(self.kind.generator(&self.qubits, num_qubits)?.scaled(Complex64::new(self.coupling, 0.0)))
    }

    /// Gate for evolving under this term for time `t`.
    pub fn evolve(&self, t: f64) -> Gate {
        Gate::Evolve { kind: self.kind, qubits: self.qubits.clone(), angle: self.coupling * t }
    }
}

/// An instantaneous operation on a register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GateRecord", into = "GateRecord")]
pub enum Gate {
    H(usize),
    X(usize),
    Z(usize),
    Cnot { control: usize, target: usize },
    /// Zero-duration pulse applying `X` to every listed qubit.
    XPulse(Vec<usize>),
    /// `exp(−i · angle · G)` for the unit-coupling generator `G` of `kind`.
    Evolve { kind: TermKind, qubits: Vec<usize>, angle: f64 },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::X(q) | Gate::Z(q) => vec![*q],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::XPulse(qs) => qs.clone(),
            Gate::Evolve { qubits, .. } => qubits.clone(),
        }
    }

    pub fn unitary(&self, num_qubits: usize) -> Result<DenseOperator> {
        match self {
            Gate::H(q) => embed_single_qubit(&hadamard(), *q, num_qubits),
            Gate::X(q) => embed_single_qubit(&pauli_x(), *q, num_qubits),
            Gate::Z(q) => embed_single_qubit(&pauli_z(), *q, num_qubits),
            Gate::Cnot { control, target } => cnot(*control, *target, num_qubits),
            Gate::XPulse(qs) => {
                for &q in qs {
                    check_qubit(q, num_qubits)?;
                }
                let factors: Vec<_> = qs.iter().map(|&q| (pauli_x(), q)).collect();
                embed_product(&factors, num_qubits)
            }
            Gate::Evolve { kind, qubits, angle } => evolution(&kind.generator(qubits, num_qubits)?, *angle),
        }
    }

    /// Hamiltonian term this gate evolves under, if any.
    pub fn term(&self) -> Option<HamiltonianTerm> {
        match self {
            Gate::Evolve { kind, qubits, .. } => {
                Some(HamiltonianTerm { kind: *kind, qubits: qubits.clone(), coupling: 1.0 })
            }
            _ => None,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let record = GateRecord::from(self.clone());
        write!(f, "{}{:?}", record.gate, record.qubits)?;
        if let Some(angle) = record.angle {
            write!(f, "({angle})")?;
        }
        Ok(())
    }
}

/// Wire form of a [`Gate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateRecord {
    pub gate: String,
    pub qubits: Vec<usize>,
    pub angle: Option<f64>,
}

impl From<Gate> for GateRecord {
    fn from(gate: Gate) -> Self {
        let qubits = gate.qubits();
        let (name, angle) = match gate {
            Gate::H(_) => ("h", None),
            Gate::X(_) => ("x", None),
            Gate::Z(_) => ("z", None),
            Gate::Cnot { .. } => ("cnot", None),
            Gate::XPulse(_) => ("x_pulse", None),
            Gate::Evolve { kind, angle, .. } => (kind.record_name(), Some(angle)),
        };
        GateRecord { gate: name.to_string(), qubits, angle }
    }
}

impl TryFrom<GateRecord> for Gate {
    type Error = Error;

    fn try_from(record: GateRecord) -> Result<Self> {
        let GateRecord { gate, qubits, angle } = record;
        let arity = |n: usize| {
            if qubits.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("gate '{gate}' takes {n} qubit(s), got {qubits:?}")))
            }
        };
        let evolve = |kind: TermKind| -> Result<Gate> {
            arity(kind.arity())?;
            check_distinct(&qubits)?;
            let angle = angle.ok_or_else(|| Error::InvalidParameter(format!("gate '{gate}' needs an angle")))?;
            Ok(Gate::Evolve { kind, qubits: qubits.clone(), angle })
        };
        match gate.as_str() {
            "h" => arity(1).map(|_| Gate::H(qubits[0])),
            "x" => arity(1).map(|_| Gate::X(qubits[0])),
            "z" => arity(1).map(|_| Gate::Z(qubits[0])),
            "cnot" => {
                arity(2)?;
                check_distinct(&qubits)?;
                Ok(Gate::Cnot { control: qubits[0], target: qubits[1] })
            }
            "x_pulse" => {
                check_distinct(&qubits)?;
                Ok(Gate::XPulse(qubits.clone()))
            }
            "exp_z" => evolve(TermKind::Z),
            "exp_x" => evolve(TermKind::X),
            "exp_zz" => evolve(TermKind::Zz),
            "exp_xx" => evolve(TermKind::Xx),
            "exp_xy" => evolve(TermKind::Xy),
            "exp_heis" => evolve(TermKind::Heisenberg),
            other => Err(Error::InvalidParameter(format!("unknown gate '{other}'"))),
        }
    }
}

/// Chronologically ordered gate list.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GateSequence {
    pub steps: Vec<Gate>,
}

impl GateSequence {
    pub fn new(steps: Vec<Gate>) -> Self {
        Self { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn push(&mut self, gate: Gate) {
        self.steps.push(gate);
    }

    pub fn then(mut self, other: GateSequence) -> Self {
        self.steps.extend(other.steps);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = &Gate> {
        self.steps.iter()
    }

    /// Composed unitary, later steps multiplying on the left.
    pub fn unitary(&self, num_qubits: usize) -> Result<DenseOperator> {
        self.steps.iter().try_fold(DenseOperator::identity(num_qubits), |acc, gate| {
            gate.unitary(num_qubits)?.compose(&acc)
        })
    }

    pub fn records(&self) -> Vec<GateRecord> {
        self.steps.iter().cloned().map(GateRecord::from).collect()
    }

    pub fn max_qubit(&self) -> usize {
        self.steps.iter().flat_map(|g| g.qubits()).max().unwrap_or(0)
    }
}

impl FromIterator<Gate> for GateSequence {
    fn from_iter<T: IntoIterator<Item = Gate>>(iter: T) -> Self {
        Self { steps: iter.into_iter().collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_json_shape() {
        let seq = GateSequence::new(vec![
            Gate::H(1),
            Gate::Cnot { control: 1, target: 3 },
            HamiltonianTerm::zz(1, 2).evolve(0.25),
        ]);
        let json = serde_json::to_string(&seq).unwrap();
        assert_eq!(
            json,
            r#"[{"gate":"h","qubits":[1],"angle":null},{"gate":"cnot","qubits":[1,3],"angle":null},{"gate":"exp_zz","qubits":[1,2],"angle":0.25}]"#
        );
        let back: GateSequence = serde_json::from_str(&json).unwrap();
        assert_eq!(back, seq);
    }

    #[test]
    fn bad_records_are_rejected() {
        let missing_angle = r#"[{"gate":"exp_x","qubits":[1],"angle":null}]"#;
        assert!(serde_json::from_str::<GateSequence>(missing_angle).is_err());
        let unknown = r#"[{"gate":"toffoli","qubits":[1,2,3],"angle":null}]"#;
        assert!(serde_json::from_str::<GateSequence>(unknown).is_err());
        let repeated = r#"[{"gate":"cnot","qubits":[2,2],"angle":null}]"#;
        assert!(serde_json::from_str::<GateSequence>(repeated).is_err());
    }

    #[test]
    fn sequence_order_is_chronological() {
        // H then X on |0⟩ gives X|+⟩ = |+⟩; X then H gives |−⟩.
        let hx = GateSequence::new(vec![Gate::H(1), Gate::X(1)]).unitary(1).unwrap();
        let xh = GateSequence::new(vec![Gate::X(1), Gate::H(1)]).unitary(1).unwrap();
        let expected_hx = Gate::X(1).unitary(1).unwrap().compose(&Gate::H(1).unitary(1).unwrap()).unwrap();
        assert!(hx.max_abs_diff(&expected_hx) < 1e-15);
        assert!(hx.max_abs_diff(&xh) > 0.5);
    }

    #[test]
    fn xy_generator_matches_definition() {
        let t = HamiltonianTerm::hopping(1, 2).matrix(2).unwrap();
        // T|01⟩ = |10⟩, T|00⟩ = 0.
        assert!((t.entry(2, 1).re - 1.0).abs() < 1e-15);
        assert!(t.entry(0, 0).norm() < 1e-15);
        assert!(t.entry(3, 3).norm() < 1e-15);
    }
}
