//! The `(n+1)`-qubit detected-jump code.
//!
//! Codewords are `|x⟩_L = (|x, 0⟩ + |x̄, 1⟩)/√2` where `x̄` is the bitwise
//! complement of the `n`-bit string `x`. The code is the `+1` eigenspace of
//! the single stabilizer `X_1 ⋯ X_{n+1}`. An emission on qubit `i` keeps
//! exactly one branch of every codeword, so with the position known the error
//! is undone by a fixed unitary.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateSequence};
use crate::error::{Error, Result};
use crate::quantum::{
    apply, bit, check_qubit, inner_product, parse_bits, DenseOperator, StateVector, MAX_QUBITS, ZERO,
};

/// Recovery circuit after a detected emission at `position`:
/// `H_i`, then `CNOT_{i→k}` and finally `X_k` for every `k ≠ i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryCircuit {
    pub position: usize,
    pub gates: GateSequence,
}

impl RecoveryCircuit {
    pub fn new(position: usize, num_physical: usize) -> Result<Self> {
        check_qubit(position, num_physical)?;
        let others: Vec<usize> = (1..=num_physical).filter(|&k| k != position).collect();
        let mut gates = GateSequence::new(vec![Gate::H(position)]);
        for &k in &others {
            gates.push(Gate::Cnot { control: position, target: k });
        }
        for &k in &others {
            gates.push(Gate::X(k));
        }
        Ok(Self { position, gates })
    }
}

/// State preparation: `H_{n+1}` followed by `CNOT_{n+1→k}` for `k = 1..n`.
pub fn preparation_circuit(n: usize) -> GateSequence {
    let mut seq = GateSequence::new(vec![Gate::H(n + 1)]);
    seq.steps.extend(collective_cnot(n).steps);
    seq
}

/// `CNOT_{n+1→k}` for `k = 1..n`. Readout applies this before measuring
/// qubits `1..n`.
pub fn collective_cnot(n: usize) -> GateSequence {
    (1..=n).map(|k| Gate::Cnot { control: n + 1, target: k }).collect()
}

/// Syndrome circuit on `n+1` data qubits plus an ancilla `a = n+2`:
/// `H_i CNOT_{i→a} H_i` for every data qubit. The ancilla ends in `|0⟩` on the
/// `+1` eigenspace of `X_1 ⋯ X_{n+1}` and in `|1⟩` on the `−1` eigenspace.
pub fn syndrome_circuit(n: usize) -> GateSequence {
    let ancilla = n + 2;
    let mut seq = GateSequence::default();
    for i in 1..=n + 1 {
        seq.push(Gate::H(i));
        seq.push(Gate::Cnot { control: i, target: ancilla });
        seq.push(Gate::H(i));
    }
    seq
}

#[derive(Debug, Clone)]
pub struct JumpCode {
    n: usize,
    codewords: Vec<StateVector>,
    stabilizer: DenseOperator,
    projector: DenseOperator,
    preparation: DenseOperator,
    readout: DenseOperator,
    recoveries: Vec<DenseOperator>,
    syndrome: DenseOperator,
}

impl JumpCode {
    /// Code with `n` logical qubits on `n + 1` physical qubits.
    pub fn new(n: usize) -> Result<Self> {
        // one extra qubit for the syndrome ancilla
        if n == 0 || n + 2 > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!("logical qubit count {n} outside 1..={}", MAX_QUBITS - 2)));
        }
        let num_physical = n + 1;
        let codewords = (0..1usize << n).map(|x| codeword_state(n, x)).collect::<Result<Vec<_>>>()?;
        let stabilizer = Gate::XPulse((1..=num_physical).collect()).unitary(num_physical)?;

        let dim = 1 << num_physical;
        let mut projector = DMatrix::from_element(dim, dim, ZERO);
        for cw in &codewords {
            projector += cw.amplitudes() * cw.amplitudes().adjoint();
        }
        let projector = DenseOperator::from_matrix(num_physical, projector)?;

        let recoveries = (1..=num_physical)
            .map(|i| RecoveryCircuit::new(i, num_physical)?.gates.unitary(num_physical))
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            n,
            codewords,
            stabilizer,
            projector,
            preparation: preparation_circuit(n).unitary(num_physical)?,
            readout: collective_cnot(n).unitary(num_physical)?,
            recoveries,
            syndrome: syndrome_circuit(n).unitary(num_physical + 1)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_physical(&self) -> usize {
        self.n + 1
    }

    /// Codeword for the logical basis index `x` (qubit 1 most significant).
    pub fn codeword(&self, x: usize) -> &StateVector {
        &self.codewords[x]
    }

    pub fn codewords(&self) -> &[StateVector] {
        &self.codewords
    }

    pub fn stabilizer(&self) -> &DenseOperator {
        &self.stabilizer
    }

    /// Orthogonal projector onto the code space.
    pub fn code_projector(&self) -> &DenseOperator {
        &self.projector
    }

    pub fn recovery_circuit(&self, position: usize) -> Result<RecoveryCircuit> {
        RecoveryCircuit::new(position, self.num_physical())
    }

    pub fn recovery_unitary(&self, position: usize) -> Result<&DenseOperator> {
        check_qubit(position, self.num_physical())?;
        Ok(&self.recoveries[position - 1])
    }

    fn check_logical(&self, logical: &StateVector) -> Result<()> {
        if logical.num_qubits() != self.n {
            return Err(Error::DimensionMismatch { expected: 1 << self.n, found: logical.dim() });
        }
        Ok(())
    }

    fn check_physical(&self, physical: &StateVector) -> Result<()> {
        if physical.num_qubits() != self.num_physical() {
            return Err(Error::DimensionMismatch { expected: 1 << self.num_physical(), found: physical.dim() });
        }
        Ok(())
    }

    /// Runs the preparation circuit on `logical ⊗ |0⟩`.
    pub fn encode(&self, logical: &StateVector) -> Result<StateVector> {
        self.check_logical(logical)?;
        logical.ensure_normalized()?;
        let padded = logical.tensor(&StateVector::basis(1, 0)?)?;
        apply(&self.preparation, &padded)
    }

    /// `Σ_x c_x |x⟩_L` built directly from the codewords.
    pub fn encode_direct(&self, logical: &StateVector) -> Result<StateVector> {
        self.check_logical(logical)?;
        let mut amplitudes = self.codewords[0].amplitudes() * ZERO;
        for (x, cw) in self.codewords.iter().enumerate() {
            amplitudes += cw.amplitudes() * logical.amplitude(x);
        }
        Ok(StateVector::from_dvector(self.num_physical(), amplitudes))
    }

    /// Born probabilities of the first `n` qubits after the collective CNOT,
    /// indexed by the `n`-bit outcome.
    pub fn readout(&self, physical: &StateVector) -> Result<Vec<f64>> {
        self.check_physical(physical)?;
        physical.ensure_normalized()?;
        let rotated = apply(&self.readout, physical)?;
        let mut probs = vec![0.0; 1 << self.n];
        for (k, p) in rotated.probabilities().into_iter().enumerate() {
            probs[k >> 1] += p;
        }
        Ok(probs)
    }

    /// Applies the recovery unitary for a reported emission at `position`.
    pub fn recover(&self, state: &StateVector, position: usize) -> Result<StateVector> {
        self.check_physical(state)?;
        apply(self.recovery_unitary(position)?, state)
    }

    /// Projective measurement of `X_1 ⋯ X_{n+1}` through an ancilla.
    ///
    /// Returns `+1` or `−1` and the normalized post-measurement data state; the
    /// ancilla is discarded, i.e. reset to `|0⟩`.
    pub fn measure_stabilizer<R: Rng + ?Sized>(&self, state: &StateVector, rng: &mut R) -> Result<(i8, StateVector)> {
        self.check_physical(state)?;
        let state = state.normalized()?;
        let extended = apply(&self.syndrome, &state.tensor(&StateVector::basis(1, 0)?)?)?;
        let amps = extended.amplitudes();
        let p_plus: f64 = amps.iter().step_by(2).map(|a| a.norm_sqr()).sum();
        let outcome: usize = if rng.random::<f64>() < p_plus { 0 } else { 1 };
        let branch: Vec<Complex64> = amps.iter().skip(outcome).step_by(2).copied().collect();
        let post = StateVector::new(self.num_physical(), branch)?.normalized()?;
        Ok((if outcome == 0 { 1 } else { -1 }, post))
    }

    /// `|⟨encode(reference)|state⟩|²`.
    pub fn logical_fidelity(&self, state: &StateVector, reference: &StateVector) -> Result<f64> {
        self.check_physical(state)?;
        let encoded = self.encode_direct(reference)?;
        Ok(inner_product(&encoded, state)?.norm_sqr())
    }

    /// Matrix of `op` in the codeword basis, `M[y][x] = ⟨y|_L op |x⟩_L`.
    pub fn logical_matrix(&self, op: &DenseOperator) -> Result<DMatrix<Complex64>> {
        let dim = 1 << self.n;
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for (x, cx) in self.codewords.iter().enumerate() {
            let image = apply(op, cx)?;
            for (y, cy) in self.codewords.iter().enumerate() {
                m[(y, x)] = inner_product(cy, &image)?;
            }
        }
        Ok(m)
    }

    /// `max(‖P·op·(1−P)‖, ‖(1−P)·op·P‖)` over matrix entries.
    pub fn leakage(&self, op: &DenseOperator) -> Result<f64> {
        let p = self.projector.matrix();
        let q = DenseOperator::identity(self.num_physical()).sub(&self.projector)?;
        let q = q.matrix();
        let m = op.matrix();
        let a = p * m * q;
        let b = q * m * p;
        Ok(a.iter().chain(b.iter()).fold(0.0, |acc, z| acc.max(z.norm())))
    }

    pub fn export(&self) -> CodeExport {
        let num_physical = self.num_physical();
        CodeExport {
            n: self.n,
            num_physical,
            codewords: self
                .codewords
                .iter()
                .enumerate()
                .map(|(x, cw)| CodewordExport {
                    logical: format!("{:0width$b}", x, width = self.n),
                    amplitudes: cw
                        .amplitudes()
                        .iter()
                        .enumerate()
                        .filter(|(_, a)| a.norm() > 0.0)
                        .map(|(index, a)| AmplitudeEntry { index, re: a.re, im: a.im })
                        .collect(),
                })
                .collect(),
            stabilizer: GateSequence::new(vec![Gate::XPulse((1..=num_physical).collect())]),
            preparation: preparation_circuit(self.n),
            readout: collective_cnot(self.n),
            recovery: (1..=num_physical)
                .map(|i| RecoveryCircuit::new(i, num_physical).expect("position in range"))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeEntry {
    pub index: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodewordExport {
    pub logical: String,
    pub amplitudes: Vec<AmplitudeEntry>,
}

/// JSON-serializable description of a code instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeExport {
    pub n: usize,
    pub num_physical: usize,
    pub codewords: Vec<CodewordExport>,
    pub stabilizer: GateSequence,
    pub preparation: GateSequence,
    pub readout: GateSequence,
    pub recovery: Vec<RecoveryCircuit>,
}

fn codeword_state(n: usize, x: usize) -> Result<StateVector> {
    let mask = (1usize << n) - 1;
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let first = x << 1;
    let second = ((!x & mask) << 1) | 1;
    let mut amps = vec![ZERO; 1 << (n + 1)];
    amps[first] = h;
    amps[second] = h;
    StateVector::new(n + 1, amps)
}

/// Codeword `|x⟩_L` for an `n`-bit string such as `"01"`.
pub fn codeword(n: usize, x: &str) -> Result<StateVector> {
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    if n == 0 || n + 1 > MAX_QUBITS {
        return Err(Error::InvalidParameter(format!("logical qubit count {n}")));
    }
    codeword_state(n, parse_bits(x)?)
}

/// `⟨y|_L σ_i⁺σ_i⁻ |x⟩_L` for logical indices `x`, `y` and physical position `i`.
pub fn qecc_matrix_element(code: &JumpCode, x: usize, y: usize, i: usize) -> Result<Complex64> {
    let ex = code.codeword(x).lowered(i)?;
    let ey = code.codeword(y).lowered(i)?;
    inner_product(&ey, &ex)
}

/// Value the jump-error QECC condition requires for `(x, y, i)`: `δ_xy/2`
/// when the strings agree at position `i`, zero otherwise. The parity qubit
/// `n+1` sits in the same branch for every codeword, so only `δ_xy/2` applies.
pub fn qecc_expected(n: usize, x: usize, y: usize, i: usize) -> f64 {
    let agree = i > n || bit(x, i, n) == bit(y, i, n);
    if agree && x == y {
        0.5
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QeccReport {
    pub n: usize,
    pub elements_checked: usize,
    pub max_deviation: f64,
}

/// Exhaustive check of the QECC condition over all codeword pairs and positions.
pub fn verify_qecc_condition(n: usize) -> Result<QeccReport> {
    if n > 6 {
        return Err(Error::InvalidParameter(format!("exhaustive QECC check limited to n ≤ 6, got {n}")));
    }
    let code = JumpCode::new(n)?;
    let mut max_deviation: f64 = 0.0;
    let mut elements_checked = 0;
    for i in 1..=n + 1 {
        let lowered: Vec<StateVector> =
            code.codewords().iter().map(|c| c.lowered(i)).collect::<Result<_>>()?;
        for x in 0..1 << n {
            for y in 0..1 << n {
                let value = inner_product(&lowered[y], &lowered[x])?;
                let expected = qecc_expected(n, x, y, i);
                max_deviation = max_deviation.max((value - Complex64::new(expected, 0.0)).norm());
                elements_checked += 1;
            }
        }
    }
    Ok(QeccReport { n, elements_checked, max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::ONE;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn codeword_examples() {
        let cw = codeword(2, "00").unwrap();
        let expected = StateVector::superposition(3, &[(0b000, ONE), (0b111, ONE)]).unwrap();
        assert!((inner_product(&cw, &expected).unwrap().norm() - 1.0).abs() < 1e-15);

        let cw = codeword(2, "01").unwrap();
        let expected = StateVector::superposition(3, &[(0b010, ONE), (0b101, ONE)]).unwrap();
        assert!((inner_product(&cw, &expected).unwrap().norm() - 1.0).abs() < 1e-15);

        let bell = codeword(1, "0").unwrap();
        let expected = StateVector::superposition(2, &[(0b00, ONE), (0b11, ONE)]).unwrap();
        assert!((inner_product(&bell, &expected).unwrap().norm() - 1.0).abs() < 1e-15);

        assert!(matches!(codeword(2, "0"), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn encode_examples() {
        let code = JumpCode::new(2).unwrap();
        let enc = code.encode(&StateVector::from_bits("00").unwrap()).unwrap();
        assert!(enc.amplitudes().metric_distance(code.codeword(0).amplitudes()) < 1e-12);

        let logical = StateVector::new(2, vec![c(0.1, 0.2), c(-0.4, 0.0), c(0.3, -0.5), c(0.0, 0.6708203932499369)])
            .unwrap()
            .normalized()
            .unwrap();
        let via_circuit = code.encode(&logical).unwrap();
        let direct = code.encode_direct(&logical).unwrap();
        assert!(via_circuit.amplitudes().metric_distance(direct.amplitudes()) < 1e-12);
    }

    #[test]
    fn readout_examples() {
        let code = JumpCode::new(2).unwrap();
        let probs = code.readout(&code.encode(&StateVector::from_bits("01").unwrap()).unwrap()).unwrap();
        assert!((probs[0b01] - 1.0).abs() < 1e-12);

        let bell = StateVector::superposition(2, &[(0b00, ONE), (0b11, ONE)]).unwrap();
        let probs = code.readout(&code.encode(&bell).unwrap()).unwrap();
        assert!((probs[0b00] - 0.5).abs() < 1e-12);
        assert!((probs[0b11] - 0.5).abs() < 1e-12);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qecc_elements() {
        let code = JumpCode::new(2).unwrap();
        let diag = qecc_matrix_element(&code, 0b00, 0b00, 1).unwrap();
        assert!((diag - c(0.5, 0.0)).norm() < 1e-15);
        assert!(qecc_matrix_element(&code, 0b00, 0b01, 2).unwrap().norm() < 1e-15);
        assert!(qecc_matrix_element(&code, 0b00, 0b01, 1).unwrap().norm() < 1e-15);
        let report = verify_qecc_condition(2).unwrap();
        assert_eq!(report.elements_checked, 3 * 16);
        assert!(report.max_deviation < 1e-15);
    }

    #[test]
    fn recovery_worked_example() {
        // a|011⟩ + b|001⟩ + c|000⟩ + d|010⟩ is what an emission on qubit 1 leaves.
        let (a, b, cc, d) = (c(0.5, 0.1), c(-0.3, 0.2), c(0.1, -0.6), c(0.4, 0.0));
        let err = StateVector::superposition(3, &[(0b011, a), (0b001, b), (0b000, cc), (0b010, d)]).unwrap();
        let code = JumpCode::new(2).unwrap();
        let out = code.recover(&err, 1).unwrap();
        let logical = StateVector::new(2, vec![a, b, cc, d]).unwrap().normalized().unwrap();
        let expected = code.encode_direct(&logical).unwrap();
        assert!((inner_product(&expected, &out).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn recovery_on_parity_qubit() {
        let code = JumpCode::new(2).unwrap();
        let hit = code.codeword(0).lowered(3).unwrap().normalized().unwrap();
        assert_eq!(hit, StateVector::from_bits("110").unwrap());
        let out = code.recover(&hit, 3).unwrap();
        assert!((inner_product(code.codeword(0), &out).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spurious_recovery_leaves_code_space() {
        let code = JumpCode::new(2).unwrap();
        let out = code.recover(code.codeword(0), 1).unwrap();
        let stab = inner_product(&out, &apply(code.stabilizer(), &out).unwrap()).unwrap();
        assert!((stab.re - 1.0).abs() > 0.5);
    }

    #[test]
    fn stabilizer_measurement() {
        let code = JumpCode::new(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for x in 0..4 {
            let (outcome, post) = code.measure_stabilizer(code.codeword(x), &mut rng).unwrap();
            assert_eq!(outcome, 1);
            assert!(post.amplitudes().metric_distance(code.codeword(x).amplitudes()) < 1e-12);
        }
        let hit = StateVector::from_bits("011").unwrap();
        let trials = 4000;
        let minus = (0..trials).filter(|_| code.measure_stabilizer(&hit, &mut rng).unwrap().0 == -1).count();
        let frac = minus as f64 / trials as f64;
        // 3σ binomial
        assert!((frac - 0.5).abs() < 3.0 * (0.25 / trials as f64).sqrt(), "{frac}");
    }

    #[test]
    fn syndrome_circuit_matches_phase_kickback_form() {
        // Standard form: H_a, CNOT_{a→i} for all data qubits, H_a.
        let n = 2;
        let a = n + 2;
        let mut kickback = GateSequence::new(vec![Gate::H(a)]);
        for i in 1..=n + 1 {
            kickback.push(Gate::Cnot { control: a, target: i });
        }
        kickback.push(Gate::H(a));
        let u1 = syndrome_circuit(n).unitary(n + 2).unwrap();
        let u2 = kickback.unitary(n + 2).unwrap();
        assert!(u1.max_abs_diff(&u2) < 1e-12);
    }

    #[test]
    fn leakage_of_bare_z() {
        let code = JumpCode::new(2).unwrap();
        let z1 = Gate::Z(1).unitary(3).unwrap();
        assert!(code.leakage(&z1).unwrap() > 0.1);
        assert!(code.leakage(code.stabilizer()).unwrap() < 1e-15);
    }

    #[test]
    fn export_json_contains_codewords() {
        let code = JumpCode::new(1).unwrap();
        let json = serde_json::to_value(code.export()).unwrap();
        assert_eq!(json["codewords"][0]["logical"], "0");
        assert_eq!(json["codewords"][0]["amplitudes"][1]["index"], 3);
        assert_eq!(json["recovery"][0]["gates"][0]["gate"], "h");
    }
}
