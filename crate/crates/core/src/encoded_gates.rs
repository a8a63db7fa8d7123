//! Logical gates on the jump code built from physically natural Hamiltonians.
//!
//! On the code the encoded Paulis are `Z̄_i = Z_i Z_{n+1}` and `X̄_i = X_i`, and
//! `Z̄_i Z̄_j = Z_i Z_j`. Three families of control are covered: Ising-type
//! `{Z_i, X_i, X_iX_j}`, XY exchange plus single-qubit terms, and Heisenberg
//! exchange plus single-qubit terms. The last two reach the first through
//! short pulse-conjugated sequences.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateSequence, HamiltonianTerm, TermKind};
use crate::decoupling::collective_x;
use crate::error::{Error, Result};
use crate::jump_code::JumpCode;
use crate::quantum::{check_distinct, check_qubit, embed_product, expm, pauli_x, pauli_y, pauli_z, DenseOperator};

/// Entry-wise tolerance for code preservation.
pub const PRESERVATION_TOLERANCE: f64 = 1e-10;
/// Entry-wise tolerance for commuting with the collective pulse.
pub const COMMUTATION_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodedPauli {
    Z(usize),
    X(usize),
}

/// Physical operator of `Z̄_i = Z_i Z_{n+1}` or `X̄_i = X_i` on `n + 1` qubits.
pub fn encoded_pauli(n: usize, which: EncodedPauli) -> Result<DenseOperator> {
    let num_physical = n + 1;
    match which {
        EncodedPauli::Z(i) => {
            check_qubit(i, n)?;
            embed_product(&[(pauli_z(), i), (pauli_z(), num_physical)], num_physical)
        }
        EncodedPauli::X(i) => {
            check_qubit(i, n)?;
            embed_product(&[(pauli_x(), i)], num_physical)
        }
    }
}

/// `e^{−iφB} A e^{iφB}`.
pub fn conjugate_generator(a: &DenseOperator, b: &DenseOperator, phi: f64) -> Result<DenseOperator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let u = expm(&b.scaled(Complex64::new(0.0, -phi)))?;
    u.compose(a)?.compose(&u.adjoint())
}

/// Angles of `e^{−iβZ} e^{−iθX} e^{−iαZ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub alpha: f64,
    pub theta: f64,
    pub beta: f64,
}

impl EulerAngles {
    /// Chronological sequence `α` about `z_axis`, `θ` about `x_axis`, `β` about
    /// `z_axis`, for any pair of generators obeying the Pauli algebra.
    pub fn sequence(
        &self,
        z_axis: impl Fn(f64) -> GateSequence,
        x_axis: impl Fn(f64) -> GateSequence,
    ) -> GateSequence {
        z_axis(self.alpha).then(x_axis(self.theta)).then(z_axis(self.beta))
    }

    /// `e^{−iβZ} e^{−iθX} e^{−iαZ}` as a 2×2 matrix.
    pub fn matrix(&self) -> Matrix2<Complex64> {
        let rz = |a: f64| Matrix2::new(Complex64::from_polar(1.0, -a), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, a));
        let (s, c) = self.theta.sin_cos();
        let rx = Matrix2::new(Complex64::new(c, 0.0), Complex64::new(0.0, -s), Complex64::new(0.0, -s), Complex64::new(c, 0.0));
        rz(self.beta) * rx * rz(self.alpha)
    }
}

/// `e^{−iω n̂·σ}` as a 2×2 matrix.
pub fn axis_rotation(axis: [f64; 3], omega: f64) -> Matrix2<Complex64> {
    let (s, c) = omega.sin_cos();
    let n_sigma = pauli_x() * Complex64::new(axis[0], 0.0)
        + pauli_y() * Complex64::new(axis[1], 0.0)
        + pauli_z() * Complex64::new(axis[2], 0.0);
    Matrix2::identity() * Complex64::new(c, 0.0) - n_sigma * Complex64::new(0.0, s)
}

/// Euler angles of `e^{−iω n̂·σ}`, exact up to a global phase.
pub fn euler_rotation(axis: [f64; 3], omega: f64) -> Result<EulerAngles> {
    let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !omega.is_finite() || axis.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFinite);
    }
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("rotation axis must be a unit vector, norm is {norm}")));
    }
    euler_from_unitary(&axis_rotation(axis, omega))
}

/// Euler angles of an arbitrary 2×2 unitary, up to a global phase.
///
/// `θ ∈ [0, π/2]`; when `θ` is 0 or `π/2` only `α ± β` is determined and
/// `α = 0` is chosen.
pub fn euler_from_unitary(u: &Matrix2<Complex64>) -> Result<EulerAngles> {
    let dev = (u.adjoint() * u - Matrix2::identity()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if dev > 1e-10 {
        return Err(Error::InvalidParameter(format!("matrix is not unitary (deviation {dev:.3e})")));
    }
    // Remove the determinant phase so u ∈ SU(2).
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let v = u * Complex64::from_polar(1.0, -0.5 * det.arg());
    let (a, b) = (v[(0, 0)], v[(0, 1)]);
    let theta = b.norm().atan2(a.norm());
    const EPS: f64 = 1e-14;
    let (alpha, beta) = if b.norm() < EPS {
        (0.0, -a.arg())
    } else if a.norm() < EPS {
        (0.0, -(Complex64::i() * b).arg())
    } else {
        let sum = -a.arg();
        let diff = (Complex64::i() * b).arg();
        (0.5 * (sum + diff), 0.5 * (sum - diff))
    };
    Ok(EulerAngles { alpha, theta, beta })
}

/// Native control families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlCase {
    /// `{Z_i, X_i, X_i X_j}`
    Case1,
    /// `{Z_i, X_i, XY exchange}` plus `X_i X_j` pulses
    Case2,
    /// `{Z_i, X_i, Heisenberg exchange}` plus `X_i X_j` pulses
    Case3,
}

impl ControlCase {
    pub const ALL: [ControlCase; 3] = [ControlCase::Case1, ControlCase::Case2, ControlCase::Case3];

    /// Whether a sequence element is directly available in this case.
    pub fn is_native(self, gate: &Gate) -> bool {
        match gate {
            Gate::XPulse(qs) => qs.len() == 2 && self != ControlCase::Case1,
            Gate::Evolve { kind, .. } => match kind {
                TermKind::Z | TermKind::X => true,
                TermKind::Xx => self == ControlCase::Case1,
                TermKind::Xy => self == ControlCase::Case2,
                TermKind::Heisenberg => self == ControlCase::Case3,
                TermKind::Zz => false,
            },
            _ => false,
        }
    }

    /// Checks that every element of `seq` is native to this case.
    pub fn ensure_native(self, seq: &GateSequence) -> Result<()> {
        match seq.iter().find(|g| !self.is_native(g)) {
            Some(g) => Err(Error::InvalidParameter(format!("{g} is not native to {self:?}"))),
            None => Ok(()),
        }
    }
}

fn evolve(kind: TermKind, qubits: &[usize], angle: f64) -> Gate {
    Gate::Evolve { kind, qubits: qubits.to_vec(), angle }
}

/// `e^{−iφY_q}` from `Z_q` and `X_q` rotations: `e^{−iπ/4 Z} e^{−iφX} e^{iπ/4 Z}`.
fn y_rotation(q: usize, phi: f64) -> GateSequence {
    GateSequence::new(vec![
        evolve(TermKind::Z, &[q], -FRAC_PI_4),
        evolve(TermKind::X, &[q], phi),
        evolve(TermKind::Z, &[q], FRAC_PI_4),
    ])
}

/// `e^{−iθZ_iZ_j} = V e^{−iθX_iX_j} V†` with `V = e^{iπ/4 Y_i} e^{iπ/4 Y_j}`,
/// the `XX` evolution supplied by `xx`.
fn zz_from_xx(i: usize, j: usize, xx: GateSequence) -> GateSequence {
    y_rotation(i, FRAC_PI_4)
        .then(y_rotation(j, FRAC_PI_4))
        .then(xx)
        .then(y_rotation(i, -FRAC_PI_4))
        .then(y_rotation(j, -FRAC_PI_4))
}

fn auxiliary_qubit(i: usize, j: usize, num_qubits: usize) -> Result<usize> {
    (1..=num_qubits).find(|&k| k != i && k != j).ok_or_else(|| {
        Error::InvalidParameter(format!("exchange-based XX on ({i},{j}) needs a third qubit, register has {num_qubits}"))
    })
}

fn check_pair(i: usize, j: usize, num_qubits: usize) -> Result<()> {
    check_qubit(i, num_qubits)?;
    check_qubit(j, num_qubits)?;
    check_distinct(&[i, j])
}

/// `X_i X_j e^{−iθT_jk} X_i X_j e^{−iθT_jk} = e^{−iθX_jX_k}` with
/// `T_jk = ½(X_jX_k + Y_jY_k)`.
pub fn xy_to_xx(i: usize, j: usize, k: usize, theta: f64) -> Result<GateSequence> {
    check_distinct(&[i, j, k])?;
    let t = HamiltonianTerm::hopping(j, k).evolve(theta);
    Ok(GateSequence::new(vec![t.clone(), Gate::XPulse(vec![i, j]), t, Gate::XPulse(vec![i, j])]))
}

/// `X_i X_j e^{−itH_jk} X_i X_j e^{−itH_jk} = e^{−2itJ X_jX_k}` for the
/// Heisenberg coupling `H_jk = J(XX + YY + ZZ)`.
pub fn heisenberg_to_xx(i: usize, j: usize, k: usize, t: f64, coupling: f64) -> Result<GateSequence> {
    check_distinct(&[i, j, k])?;
    let h = HamiltonianTerm::heisenberg(j, k, coupling).evolve(t);
    Ok(GateSequence::new(vec![h.clone(), Gate::XPulse(vec![i, j]), h, Gate::XPulse(vec![i, j])]))
}

/// `e^{−itH} e^{−iπ/2 Z_i} e^{−itH} e^{−iπ/2 Z_i} = −e^{−2itJ Z_iZ_j}`.
pub fn heisenberg_to_zz(i: usize, j: usize, t: f64, coupling: f64) -> Result<GateSequence> {
    check_distinct(&[i, j])?;
    let h = HamiltonianTerm::heisenberg(i, j, coupling).evolve(t);
    let z = evolve(TermKind::Z, &[i], FRAC_PI_2);
    Ok(GateSequence::new(vec![z.clone(), h.clone(), z, h]))
}

/// `e^{−i(π/4)(Z_i+Z_j)} e^{−i(3π/4)Z_iZ_j} = e^{i3π/4} · diag(1, 1, 1, −1)`,
/// written with an explicit `ZZ` evolution.
pub fn controlled_phase_sequence(i: usize, j: usize) -> Result<GateSequence> {
    check_distinct(&[i, j])?;
    Ok(GateSequence::new(vec![
        evolve(TermKind::Zz, &[i, j], 3.0 * FRAC_PI_4),
        evolve(TermKind::Z, &[i], FRAC_PI_4),
        evolve(TermKind::Z, &[j], FRAC_PI_4),
    ]))
}

/// `e^{−iθX_iX_j}` from the native set of `case` on a `num_qubits` register.
pub fn xx_sequence(case: ControlCase, i: usize, j: usize, theta: f64, num_qubits: usize) -> Result<GateSequence> {
    check_pair(i, j, num_qubits)?;
    match case {
        ControlCase::Case1 => Ok(GateSequence::new(vec![evolve(TermKind::Xx, &[i, j], theta)])),
        ControlCase::Case2 => xy_to_xx(auxiliary_qubit(i, j, num_qubits)?, i, j, theta),
        ControlCase::Case3 => heisenberg_to_xx(auxiliary_qubit(i, j, num_qubits)?, i, j, 0.5 * theta, 1.0),
    }
}

/// `e^{−iθZ_iZ_j}` up to global phase from the native set of `case`.
pub fn zz_sequence(case: ControlCase, i: usize, j: usize, theta: f64, num_qubits: usize) -> Result<GateSequence> {
    check_pair(i, j, num_qubits)?;
    match case {
        ControlCase::Case1 | ControlCase::Case2 => {
            Ok(zz_from_xx(i, j, xx_sequence(case, i, j, theta, num_qubits)?))
        }
        ControlCase::Case3 => heisenberg_to_zz(i, j, 0.5 * theta, 1.0),
    }
}

/// Logical `CP` between logical qubits `i` and `j` of the `n`-qubit code,
/// generated by `Z̄_i = Z_iZ_{n+1}`, `Z̄_j` and `Z̄_iZ̄_j = Z_iZ_j`.
pub fn encoded_controlled_phase(n: usize, i: usize, j: usize, case: ControlCase) -> Result<GateSequence> {
    check_pair(i, j, n)?;
    let np = n + 1;
    Ok(zz_sequence(case, i, j, 3.0 * FRAC_PI_4, np)?
        .then(zz_sequence(case, i, np, FRAC_PI_4, np)?)
        .then(zz_sequence(case, j, np, FRAC_PI_4, np)?))
}

/// Logical single-qubit rotation `e^{−iω n̂·σ̄}` on logical qubit `i`.
pub fn encoded_rotation(n: usize, i: usize, axis: [f64; 3], omega: f64, case: ControlCase) -> Result<GateSequence> {
    check_qubit(i, n)?;
    let angles = euler_rotation(axis, omega)?;
    encoded_euler(n, i, &angles, case)
}

fn encoded_euler(n: usize, i: usize, angles: &EulerAngles, case: ControlCase) -> Result<GateSequence> {
    let np = n + 1;
    // validate once so the closures below cannot fail
    zz_sequence(case, i, np, 0.0, np)?;
    let z = |a: f64| zz_sequence(case, i, np, a, np).expect("validated above");
    let x = |a: f64| GateSequence::new(vec![evolve(TermKind::X, &[i], a)]);
    Ok(angles.sequence(z, x))
}

/// Logical Hadamard on logical qubit `i`, as `e^{−i(π/2)(X̄+Z̄)/√2}`.
pub fn encoded_hadamard(n: usize, i: usize, case: ControlCase) -> Result<GateSequence> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    encoded_rotation(n, i, [s, 0.0, s], FRAC_PI_2, case)
}

/// Logical CNOT with control `i` and target `j` on the `n`-qubit code:
/// `H̄_j · CP̄_ij · H̄_j`.
pub fn logical_cnot_sequence(n: usize, i: usize, j: usize, case: ControlCase) -> Result<GateSequence> {
    check_pair(i, j, n)?;
    Ok(encoded_hadamard(n, j, case)?
        .then(encoded_controlled_phase(n, i, j, case)?)
        .then(encoded_hadamard(n, j, case)?))
}

/// Whether `op` maps the code space of the `n`-qubit code into itself and
/// its complement into itself.
pub fn check_code_preservation(op: &DenseOperator, n: usize) -> Result<bool> {
    Ok(code_leakage(op, n)? <= PRESERVATION_TOLERANCE)
}

/// Largest entry of the off-diagonal blocks of `op` relative to the code space.
pub fn code_leakage(op: &DenseOperator, n: usize) -> Result<f64> {
    let code = JumpCode::new(n)?;
    if op.num_qubits() != code.num_physical() {
        return Err(Error::DimensionMismatch { expected: 1 << code.num_physical(), found: op.dim() });
    }
    code.leakage(op)
}

/// Whether `term` commutes with the collective `X` pulse on `num_qubits`.
pub fn bb_compatibility_check(term: &HamiltonianTerm, num_qubits: usize) -> Result<bool> {
    Ok(pulse_commutator_norm(term, num_qubits)? <= COMMUTATION_TOLERANCE)
}

/// `‖[term, X⊗⋯⊗X]‖_max`.
pub fn pulse_commutator_norm(term: &HamiltonianTerm, num_qubits: usize) -> Result<f64> {
    let h = term.matrix(num_qubits)?;
    Ok(h.commutator(&collective_x(num_qubits)?)?.max_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::TermKind;
    use crate::quantum::{apply, evolution, inner_product, StateVector};
    use nalgebra::DMatrix;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn generator(kind: TermKind, qubits: &[usize], n: usize) -> DenseOperator {
        kind.generator(qubits, n).unwrap()
    }

    #[test]
    fn encoded_paulis_act_on_codewords() {
        let code = JumpCode::new(2).unwrap();
        let zbar = encoded_pauli(2, EncodedPauli::Z(1)).unwrap();
        let xbar = encoded_pauli(2, EncodedPauli::X(1)).unwrap();
        let out = apply(&zbar, code.codeword(0b00)).unwrap();
        assert!((inner_product(code.codeword(0b00), &out).unwrap() - c(1.0)).norm() < 1e-14);
        let out = apply(&zbar, code.codeword(0b10)).unwrap();
        assert!((inner_product(code.codeword(0b10), &out).unwrap() + c(1.0)).norm() < 1e-14);
        let out = apply(&xbar, code.codeword(0b00)).unwrap();
        assert!((inner_product(code.codeword(0b10), &out).unwrap() - c(1.0)).norm() < 1e-14);

        // [Z̄, X̄] = 2i Ȳ on the code space
        let comm = code.logical_matrix(&zbar.commutator(&xbar).unwrap()).unwrap();
        let y = pauli_y();
        let expected = DMatrix::from_fn(4, 4, |r, col| {
            if (r & 1) == (col & 1) {
                y[(r >> 1, col >> 1)] * Complex64::new(0.0, 2.0)
            } else {
                c(0.0)
            }
        });
        assert!((comm - expected).camax() < 1e-13);
        assert!(encoded_pauli(2, EncodedPauli::Z(3)).is_err());
    }

    #[test]
    fn conjugation_follows_rotation_convention() {
        let x = generator(TermKind::X, &[1], 1);
        let z = generator(TermKind::Z, &[1], 1);
        let y = DenseOperator::from_matrix(1, DMatrix::from_iterator(2, 2, pauli_y().iter().copied())).unwrap();
        assert!(conjugate_generator(&x, &z, 0.0).unwrap().max_abs_diff(&x) < 1e-15);
        // spin operators J = σ/2 rotate by the full angle
        let half = c(0.5);
        let jy = conjugate_generator(&x.scaled(half), &z.scaled(half), FRAC_PI_2).unwrap();
        assert!(jy.max_abs_diff(&y.scaled(half)) < 1e-12);
        // Pauli operators rotate by twice the angle
        assert!(conjugate_generator(&x, &z, FRAC_PI_4).unwrap().max_abs_diff(&y) < 1e-12);
        let phi: f64 = 0.37;
        let rotated = conjugate_generator(&x.scaled(half), &z.scaled(half), phi).unwrap();
        let expected = x.scaled(c(0.5 * phi.cos())).add(&y.scaled(c(0.5 * phi.sin()))).unwrap();
        assert!(rotated.max_abs_diff(&expected) < 1e-12);
        assert!(conjugate_generator(&x, &DenseOperator::identity(2), 0.1).is_err());
    }

    #[test]
    fn euler_examples() {
        let z = euler_rotation([0.0, 0.0, 1.0], 0.8).unwrap();
        assert!(z.theta.abs() < 1e-14);
        assert!(((z.alpha + z.beta) - 0.8).abs() < 1e-12);
        let x = euler_rotation([1.0, 0.0, 0.0], FRAC_PI_2).unwrap();
        let target = axis_rotation([1.0, 0.0, 0.0], FRAC_PI_2);
        assert!(phase_distance(&x.matrix(), &target) < 1e-12);
        assert!(euler_rotation([1.0, 1.0, 0.0], 0.3).is_err());
    }

    fn phase_distance(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> f64 {
        let da = DenseOperator::from_matrix(1, DMatrix::from_iterator(2, 2, a.iter().copied())).unwrap();
        let db = DenseOperator::from_matrix(1, DMatrix::from_iterator(2, 2, b.iter().copied())).unwrap();
        da.phase_insensitive_distance(&db)
    }

    #[test]
    fn controlled_phase_examples() {
        let cp = controlled_phase_sequence(1, 2).unwrap().unitary(2).unwrap();
        let target = DenseOperator::from_diagonal(2, &[c(1.0), c(1.0), c(1.0), c(-1.0)]).unwrap();
        assert!(cp.phase_insensitive_distance(&target) < 1e-12);
        let phase = Complex64::from_polar(1.0, 3.0 * FRAC_PI_4);
        assert!(cp.max_abs_diff(&target.scaled(phase)) < 1e-12);
        assert!(cp.compose(&cp).unwrap().phase_insensitive_distance(&DenseOperator::identity(2)) < 1e-12);
    }

    #[test]
    fn exchange_conversions() {
        let xx = xy_to_xx(1, 2, 3, FRAC_PI_2).unwrap().unitary(3).unwrap();
        let target = evolution(&generator(TermKind::Xx, &[2, 3], 3), FRAC_PI_2).unwrap();
        assert!(xx.max_abs_diff(&target) < 1e-12);
        assert!(xy_to_xx(1, 2, 3, 0.0).unwrap().unitary(3).unwrap().max_abs_diff(&DenseOperator::identity(3)) < 1e-15);
        assert!(xy_to_xx(1, 2, 2, 0.1).is_err());

        // conjugated hopping term commutes with the original
        let t = HamiltonianTerm::hopping(2, 3).matrix(3).unwrap();
        let p = Gate::XPulse(vec![1, 2]).unitary(3).unwrap();
        let conj = p.compose(&t).unwrap().compose(&p).unwrap();
        assert_eq!(conj.commutator(&t).unwrap().max_norm(), 0.0);

        let j = 1.3;
        let seq = heisenberg_to_xx(1, 2, 3, std::f64::consts::PI / (4.0 * j), j).unwrap();
        assert!(seq.unitary(3).unwrap().max_abs_diff(&target) < 1e-12);
        let h = HamiltonianTerm::heisenberg(2, 3, j).matrix(3).unwrap();
        let conj = p.compose(&h).unwrap().compose(&p).unwrap();
        assert!(conj.commutator(&h).unwrap().max_norm() < 1e-13);

        let zz0 = heisenberg_to_zz(1, 2, 0.0, j).unwrap().unitary(2).unwrap();
        assert!(zz0.phase_insensitive_distance(&DenseOperator::identity(2)) < 1e-12);
        let zi = generator(TermKind::Z, &[1], 2);
        let h = HamiltonianTerm::heisenberg(1, 2, j).matrix(2).unwrap();
        let flipped = zi.compose(&h).unwrap().compose(&zi).unwrap();
        let expected = generator(TermKind::Zz, &[1, 2], 2)
            .sub(&generator(TermKind::Xy, &[1, 2], 2))
            .unwrap()
            .scaled(c(j));
        assert!(flipped.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn interaction_terms_commute_with_pulses() {
        assert!(bb_compatibility_check(&HamiltonianTerm::xx(1, 2), 3).unwrap());
        assert!(bb_compatibility_check(&HamiltonianTerm::heisenberg(1, 3, 0.7), 3).unwrap());
        assert!(bb_compatibility_check(&HamiltonianTerm::xy(2, 3, 0.7), 3).unwrap());
        assert!(bb_compatibility_check(&HamiltonianTerm::zz(2, 3), 3).unwrap());
        assert!(!bb_compatibility_check(&HamiltonianTerm::z(2), 3).unwrap());
    }

    #[test]
    fn preservation_examples() {
        let x1 = evolution(&generator(TermKind::X, &[1], 3), 0.4).unwrap();
        assert!(check_code_preservation(&x1, 2).unwrap());
        let zbar = evolution(&generator(TermKind::Zz, &[1, 3], 3), 0.4).unwrap();
        assert!(check_code_preservation(&zbar, 2).unwrap());
        let z1 = evolution(&generator(TermKind::Z, &[1], 3), 0.4).unwrap();
        assert!(!check_code_preservation(&z1, 2).unwrap());
    }

    #[test]
    fn zz_constructions_per_case() {
        for case in ControlCase::ALL {
            let seq = zz_sequence(case, 1, 3, 0.61, 3).unwrap();
            case.ensure_native(&seq).unwrap();
            let target = evolution(&generator(TermKind::Zz, &[1, 3], 3), 0.61).unwrap();
            assert!(seq.unitary(3).unwrap().phase_insensitive_distance(&target) < 1e-12, "{case:?}");
        }
        assert!(zz_sequence(ControlCase::Case2, 1, 2, 0.3, 2).is_err());
        assert!(zz_sequence(ControlCase::Case1, 1, 2, 0.3, 2).is_ok());
    }

    #[test]
    fn logical_cnot_on_codewords() {
        let code = JumpCode::new(2).unwrap();
        for case in ControlCase::ALL {
            let seq = logical_cnot_sequence(2, 1, 2, case).unwrap();
            case.ensure_native(&seq).unwrap();
            let u = seq.unitary(3).unwrap();
            assert!(check_code_preservation(&u, 2).unwrap());
            let m = code.logical_matrix(&u).unwrap();
            // logical CNOT up to a global phase
            let phase = m[(0, 0)];
            assert!((phase.norm() - 1.0).abs() < 1e-10);
            let expected = [0b00, 0b01, 0b11, 0b10];
            for (x, &y) in expected.iter().enumerate() {
                for r in 0..4 {
                    let want = if r == y { phase } else { c(0.0) };
                    assert!((m[(r, x)] - want).norm() < 1e-10, "{case:?} column {x}");
                }
            }
            let ten = apply(&u, code.codeword(0b10)).unwrap();
            assert!(code.logical_fidelity(&ten, &StateVector::from_bits("11").unwrap()).unwrap() > 1.0 - 1e-10);
        }
    }

    #[test]
    fn exchange_terms_conserve_excitation_number() {
        for kind in [TermKind::Xy, TermKind::Heisenberg] {
            let h = generator(kind, &[1, 3], 3);
            for r in 0..8usize {
                for col in 0..8usize {
                    if r.count_ones() != col.count_ones() {
                        assert_eq!(h.entry(r, col), c(0.0));
                    }
                }
            }
        }
        // [T12, T13] = −Z1Z2 T23, and all three keep the weight
        let t12 = HamiltonianTerm::hopping(1, 2).matrix(3).unwrap();
        let t13 = HamiltonianTerm::hopping(1, 3).matrix(3).unwrap();
        let t23 = HamiltonianTerm::hopping(2, 3).matrix(3).unwrap();
        let z1z2 = generator(TermKind::Zz, &[1, 2], 3);
        let third = z1z2.compose(&t23).unwrap().scaled(c(-1.0));
        let comm = t12.commutator(&t13).unwrap();
        assert!(comm.max_abs_diff(&third) < 1e-14);
        for op in [&t12, &t13, &third] {
            for r in 0..8usize {
                for col in 0..8usize {
                    if r.count_ones() != col.count_ones() {
                        assert_eq!(op.entry(r, col), c(0.0));
                    }
                }
            }
        }
    }
}
