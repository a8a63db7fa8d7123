//! Ensemble averages of trajectories against the master-equation integrator.

use std::sync::Arc;

use bbjump::decoupling::PulseSchedule;
use bbjump::jump_code::JumpCode;
use bbjump::quantum::StateVector;
use bbjump::trajectory::{ensemble_density, lindblad_integrate, DetectorModel, NoiseModel, ProtocolSchedule, RunSettings};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TRAJECTORIES: usize = 10_000;

fn random_state(num_qubits: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amps: Vec<Complex64> = (0..1 << num_qubits)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    StateVector::new(num_qubits, amps).unwrap().normalized().unwrap()
}

fn compare(initial: &StateVector, noise: &NoiseModel, schedule: &ProtocolSchedule, duration: f64, seed: u64) -> f64 {
    let settings = RunSettings { schedule, noise, duration, dt: 2e-3 };
    let mc = ensemble_density(initial, settings, TRAJECTORIES, seed).unwrap();
    let me = lindblad_integrate(&initial.projector(), duration, noise, schedule, 1e-3).unwrap();
    mc.trace_distance(&me).unwrap()
}

#[test]
fn single_qubit_decay() {
    let noise = NoiseModel::uniform(1, 1.0).unwrap();
    let schedule = ProtocolSchedule::new(1);
    let one = StateVector::basis(1, 1).unwrap();
    assert!(compare(&one, &noise, &schedule, 1.0, 1) <= 0.03);
}

#[test]
fn pulsed_registers_with_unequal_rates() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (n, rates, tc, duration) in [(2, vec![1.0, 0.4], 0.3, 1.5), (3, vec![0.5, 1.0, 0.8], 0.25, 2.0)] {
        let noise = NoiseModel::new(rates, DetectorModel::perfect()).unwrap();
        let mut schedule = ProtocolSchedule::new(n);
        PulseSchedule::new(tc).unwrap().apply_to(&mut schedule, duration).unwrap();
        let psi = random_state(n, &mut rng);
        let d = compare(&psi, &noise, &schedule, duration, 10 + n as u64);
        assert!(d <= 0.03, "n={n}: trace distance {d}");
    }
}

#[test]
fn immediate_feedback_with_imperfect_detector() {
    let n = 3;
    let code = Arc::new(JumpCode::new(2).unwrap());
    let noise = NoiseModel::new(vec![1.0, 0.7, 0.5], DetectorModel::new(0.1, 0.15).unwrap()).unwrap();
    let mut schedule = ProtocolSchedule::new(n);
    PulseSchedule::new(0.1).unwrap().apply_to(&mut schedule, 1.0).unwrap();
    schedule.set_recovery(code.clone(), 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let psi = code.encode(&random_state(2, &mut rng)).unwrap();
    let d = compare(&psi, &noise, &schedule, 1.0, 5);
    assert!(d <= 0.03, "trace distance {d}");
}
