//! Identity suite behind `gate_identities` and `bbjump verify`.

use std::f64::consts::TAU;

use bbjump::circuit::{HamiltonianTerm, TermKind};
use bbjump::decoupling::bb_period_operator;
use bbjump::encoded_gates::{
    axis_rotation, code_leakage, controlled_phase_sequence, encoded_controlled_phase, encoded_rotation, euler_rotation,
    heisenberg_to_xx, heisenberg_to_zz, logical_cnot_sequence, pulse_commutator_norm, xx_sequence, xy_to_xx,
    zz_sequence, ControlCase, COMMUTATION_TOLERANCE, PRESERVATION_TOLERANCE,
};
use bbjump::jump_code::{verify_qecc_condition, JumpCode};
use bbjump::quantum::{evolution, inner_product, DenseOperator, StateVector};
use bbjump::trajectory::{lindblad_integrate, DetectorModel, NoiseModel, ProtocolSchedule};
use bbjump::Complex64;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::report::{ExperimentReport, ReportRow};

pub const COLUMNS: &[&str] = &["draws", "max_deviation", "tolerance", "passed"];

const OPERATOR_TOLERANCE: f64 = 1e-12;
const RANDOM_DRAWS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub draws: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(name: &str, deviations: &[f64], tolerance: f64) -> Self {
        let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
        let finite = deviations.iter().all(|d| d.is_finite());
        Self {
            name: name.to_string(),
            draws: deviations.len(),
            max_deviation,
            tolerance,
            passed: finite && !deviations.is_empty() && max_deviation <= tolerance,
        }
    }
}

fn random_state(num_qubits: usize, rng: &mut ChaCha8Rng) -> bbjump::Result<StateVector> {
    let amps = (0..1usize << num_qubits)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    StateVector::new(num_qubits, amps)?.normalized()
}

fn random_axis(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..TAU);
    let r = (1.0 - z * z).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

fn distinct_triple(num_qubits: usize, rng: &mut ChaCha8Rng) -> (usize, usize, usize) {
    loop {
        let (i, j, k) = (
            rng.random_range(1..=num_qubits),
            rng.random_range(1..=num_qubits),
            rng.random_range(1..=num_qubits),
        );
        if i != j && j != k && i != k {
            return (i, j, k);
        }
    }
}

fn one_qubit(m: nalgebra::Matrix2<Complex64>) -> bbjump::Result<DenseOperator> {
    DenseOperator::from_matrix(1, DMatrix::from_iterator(2, 2, m.iter().copied()))
}

fn logical_distance(code: &JumpCode, op: &DenseOperator, target: &DenseOperator) -> bbjump::Result<f64> {
    let m = DenseOperator::from_matrix(code.n(), code.logical_matrix(op)?)?;
    Ok(m.phase_insensitive_distance(target))
}

/// `CP` on qubits `i`, `j` of an `n`-qubit register.
fn controlled_phase_target(n: usize, i: usize, j: usize) -> bbjump::Result<DenseOperator> {
    let diag: Vec<Complex64> = (0..1usize << n)
        .map(|x| {
            let on = |q: usize| (x >> (n - q)) & 1 == 1;
            Complex64::new(if on(i) && on(j) { -1.0 } else { 1.0 }, 0.0)
        })
        .collect();
    DenseOperator::from_diagonal(n, &diag)
}

fn cnot_target(n: usize, i: usize, j: usize) -> DenseOperator {
    DenseOperator::from_basis_map(n, |x| if (x >> (n - i)) & 1 == 1 { x ^ (1 << (n - j)) } else { x })
}

/// Runs every identity check with draws seeded from `seed`.
pub fn run_identity_suite(seed: u64) -> bbjump::Result<Vec<IdentityCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    // period operator is a scalar
    let mut dev = Vec::new();
    for n in 1..=4 {
        for _ in 0..20 {
            let rates: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
            let tc: f64 = rng.random_range(0.01..0.5);
            let total: f64 = rates.iter().sum();
            let noise = NoiseModel::new(rates, DetectorModel::perfect())?;
            let u = bb_period_operator(&noise, tc)?;
            let scalar = DenseOperator::identity(n).scaled(Complex64::new((-tc * total / 4.0).exp(), 0.0));
            dev.push(u.max_abs_diff(&scalar));
        }
    }
    checks.push(IdentityCheck::new("bb_period_scalar", &dev, OPERATOR_TOLERANCE));

    let dev = (1..=4).map(|n| verify_qecc_condition(n).map(|r| r.max_deviation)).collect::<bbjump::Result<Vec<_>>>()?;
    checks.push(IdentityCheck::new("qecc_condition", &dev, OPERATOR_TOLERANCE));

    let mut dev = Vec::new();
    for n in 1..=4 {
        let code = JumpCode::new(n)?;
        for _ in 0..10 {
            let encoded = code.encode(&random_state(n, &mut rng)?)?;
            for pos in 1..=n + 1 {
                let jumped = encoded.lowered(pos)?.normalized()?;
                let restored = code.recover(&jumped, pos)?;
                dev.push(1.0 - inner_product(&encoded, &restored)?.norm_sqr());
            }
        }
    }
    checks.push(IdentityCheck::new("recovery_exact", &dev, OPERATOR_TOLERANCE));

    let mut dev = Vec::new();
    for _ in 0..RANDOM_DRAWS {
        let (i, j, _) = distinct_triple(4, &mut rng);
        let u = controlled_phase_sequence(i, j)?.unitary(4)?;
        dev.push(u.phase_insensitive_distance(&controlled_phase_target(4, i, j)?));
    }
    checks.push(IdentityCheck::new("controlled_phase", &dev, OPERATOR_TOLERANCE));

    let mut xy = Vec::new();
    let mut hx = Vec::new();
    let mut hz = Vec::new();
    for _ in 0..RANDOM_DRAWS {
        let (i, j, k) = distinct_triple(4, &mut rng);
        let theta: f64 = rng.random_range(-3.0..3.0);
        let t: f64 = rng.random_range(-2.0..2.0);
        let coupling: f64 = rng.random_range(0.1..2.0);
        let xx = |angle: f64| evolution(&TermKind::Xx.generator(&[j, k], 4)?, angle);
        xy.push(xy_to_xx(i, j, k, theta)?.unitary(4)?.phase_insensitive_distance(&xx(theta)?));
        hx.push(heisenberg_to_xx(i, j, k, t, coupling)?.unitary(4)?.phase_insensitive_distance(&xx(2.0 * t * coupling)?));
        let zz = evolution(&TermKind::Zz.generator(&[i, j], 4)?, 2.0 * t * coupling)?;
        hz.push(heisenberg_to_zz(i, j, t, coupling)?.unitary(4)?.phase_insensitive_distance(&zz));
    }
    checks.push(IdentityCheck::new("xy_to_xx", &xy, OPERATOR_TOLERANCE));
    checks.push(IdentityCheck::new("heisenberg_to_xx", &hx, OPERATOR_TOLERANCE));
    checks.push(IdentityCheck::new("heisenberg_to_zz", &hz, OPERATOR_TOLERANCE));

    let mut dev = Vec::new();
    for _ in 0..RANDOM_DRAWS {
        let axis = random_axis(&mut rng);
        let omega: f64 = rng.random_range(-6.0..6.0);
        let angles = euler_rotation(axis, omega)?;
        dev.push(one_qubit(angles.matrix())?.phase_insensitive_distance(&one_qubit(axis_rotation(axis, omega))?));
    }
    checks.push(IdentityCheck::new("euler_reconstruction", &dev, 1e-10));

    // encoded gates: leakage and logical action
    let mut leak = Vec::new();
    let mut cp_dev = Vec::new();
    let mut cnot_dev = Vec::new();
    let mut rot_dev = Vec::new();
    for case in ControlCase::ALL {
        for n in 2..=3 {
            let np = n + 1;
            let code = JumpCode::new(n)?;
            for (i, j) in [(1, 2), (2, 1), (n, 1)] {
                if i == j {
                    continue;
                }
                let u = encoded_controlled_phase(n, i, j, case)?.unitary(np)?;
                leak.push(code_leakage(&u, n)?);
                cp_dev.push(logical_distance(&code, &u, &controlled_phase_target(n, i, j)?)?);
                let u = logical_cnot_sequence(n, i, j, case)?.unitary(np)?;
                leak.push(code_leakage(&u, n)?);
                cnot_dev.push(logical_distance(&code, &u, &cnot_target(n, i, j))?);
            }
            for _ in 0..4 {
                let q = rng.random_range(1..=n);
                let axis = random_axis(&mut rng);
                let omega: f64 = rng.random_range(-3.0..3.0);
                let u = encoded_rotation(n, q, axis, omega, case)?.unitary(np)?;
                leak.push(code_leakage(&u, n)?);
                let target = embed_logical(n, q, &axis_rotation(axis, omega))?;
                rot_dev.push(logical_distance(&code, &u, &target)?);
                let (a, b) = (rng.random_range(1..=np), rng.random_range(1..=np));
                if a != b {
                    let theta: f64 = rng.random_range(-3.0..3.0);
                    leak.push(code_leakage(&zz_sequence(case, a, b, theta, np)?.unitary(np)?, n)?);
                    leak.push(code_leakage(&xx_sequence(case, a, b, theta, np)?.unitary(np)?, n)?);
                }
            }
        }
    }
    checks.push(IdentityCheck::new("code_preservation", &leak, PRESERVATION_TOLERANCE));
    checks.push(IdentityCheck::new("encoded_controlled_phase", &cp_dev, 1e-10));
    checks.push(IdentityCheck::new("logical_cnot", &cnot_dev, 1e-10));
    checks.push(IdentityCheck::new("encoded_rotation", &rot_dev, 1e-10));

    let mut dev = Vec::new();
    for n in 2..=4 {
        for i in 1..=n {
            for j in i + 1..=n {
                let c: f64 = rng.random_range(0.1..2.0);
                for term in [HamiltonianTerm::xx(i, j), HamiltonianTerm::xy(i, j, c), HamiltonianTerm::heisenberg(i, j, c)] {
                    dev.push(pulse_commutator_norm(&term, n)?);
                }
            }
        }
    }
    checks.push(IdentityCheck::new("pulse_commutes_with_couplings", &dev, COMMUTATION_TOLERANCE));

    // single-body Z must be flagged
    let dev = (1..=4)
        .map(|n| pulse_commutator_norm(&HamiltonianTerm::z(1), n).map(|v| if v > 1.0 { 0.0 } else { 1.0 }))
        .collect::<bbjump::Result<Vec<_>>>()?;
    checks.push(IdentityCheck::new("single_z_anticommutes", &dev, 0.0));

    let noise = NoiseModel::uniform(1, 1.0)?;
    let rho = lindblad_integrate(&StateVector::basis(1, 1)?.projector(), 1.0, &noise, &ProtocolSchedule::new(1), 1e-3)?;
    let dev = [(rho.element(1, 1).re - (-1.0f64).exp()).abs()];
    checks.push(IdentityCheck::new("master_equation_decay", &dev, 1e-6));

    Ok(checks)
}

/// Single-qubit `u` on logical qubit `q` of `n`.
fn embed_logical(n: usize, q: usize, u: &nalgebra::Matrix2<Complex64>) -> bbjump::Result<DenseOperator> {
    bbjump::quantum::embed_single_qubit(u, q, n)
}

pub fn gate_identities(seed: u64, report: &mut ExperimentReport) -> bbjump::Result<()> {
    let checks = run_identity_suite(seed)?;
    report.checks_passed = Some(checks.iter().all(|c| c.passed));
    report.rows = checks.iter().enumerate().map(|(k, c)| check_row(k, c)).collect();
    Ok(())
}

pub fn check_row(point: usize, c: &IdentityCheck) -> ReportRow {
    ReportRow::new(point, c.name.clone())
        .with("draws", c.draws as f64)
        .with("max_deviation", c.max_deviation)
        .with("tolerance", c.tolerance)
        .with("passed", if c.passed { 1.0 } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let checks = run_identity_suite(11).unwrap();
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(checks.iter().any(|c| c.name == "xy_to_xx" && c.draws >= 50));
    }
}
