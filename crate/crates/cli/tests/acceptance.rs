//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::time::{Duration, Instant};

use bbjump::decoupling::bb_period_operator;
use bbjump::jump_code::{verify_qecc_condition, JumpCode};
use bbjump::quantum::{inner_product, DenseOperator, StateVector};
use bbjump::trajectory::{ensemble_density, lindblad_integrate, DetectorModel, NoiseModel, ProtocolSchedule, RunSettings};
use bbjump::Complex64;
use bbjump_cli::scenarios::identities::run_identity_suite;
use bbjump_cli::scenarios::MemoryRun;
use bbjump_cli::{run_scenario, ExperimentConfig, ExperimentReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_state(num_qubits: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amps = (0..1usize << num_qubits).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    StateVector::new(num_qubits, amps).unwrap().normalized().unwrap()
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn bb_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        for _ in 0..20 {
            let rates: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
            let tc: f64 = rng.random_range(0.01..0.5);
            let total: f64 = rates.iter().sum();
            let noise = NoiseModel::new(rates, DetectorModel::perfect()).unwrap();
            let u = bb_period_operator(&noise, tc).unwrap();
            let expected = DenseOperator::identity(n).scaled(c((-tc * total / 4.0).exp(), 0.0));
            worst = worst.max(u.max_abs_diff(&expected));
        }
    }
    let t = start.elapsed();
    outcome(worst <= 1e-12 && within(t, 1.0), format!("max deviation {worst:.2e} over 80 draws, {t:.2?}"))
}

fn qecc_condition() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut elements = 0;
    for n in 1..=4 {
        let r = verify_qecc_condition(n).unwrap();
        worst = worst.max(r.max_deviation);
        elements += r.elements_checked;
    }
    let t = start.elapsed();
    outcome(worst <= 1e-12 && within(t, 10.0), format!("{elements} elements, max deviation {worst:.2e}, {t:.2?}"))
}

fn recovery_exactness() -> Outcome {
    let code = JumpCode::new(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let encoded = code.encode(&random_state(2, &mut rng)).unwrap();
        for pos in 1..=3 {
            let jumped = encoded.lowered(pos).unwrap().normalized().unwrap();
            let restored = code.recover(&jumped, pos).unwrap();
            worst = worst.max(1.0 - inner_product(&encoded, &restored).unwrap().norm_sqr());
        }
    }
    // a|011⟩ + b|001⟩ + c|000⟩ + d|010⟩ after an emission on qubit 1
    let (a, b, cc, d) = (c(0.5, 0.1), c(-0.3, 0.2), c(0.1, -0.6), c(0.4, 0.0));
    let err = StateVector::superposition(3, &[(0b011, a), (0b001, b), (0b000, cc), (0b010, d)]).unwrap();
    let logical = StateVector::new(2, vec![a, b, cc, d]).unwrap().normalized().unwrap();
    let example = 1.0
        - inner_product(&code.encode_direct(&logical).unwrap(), &code.recover(&err, 1).unwrap())
            .unwrap()
            .norm_sqr();
    outcome(
        worst <= 1e-12 && example <= 1e-12,
        format!("worst infidelity {worst:.2e} over 300 jumps, worked example {example:.2e}"),
    )
}

fn trajectory_oracle() -> Outcome {
    let start = Instant::now();
    let noise = NoiseModel::uniform(1, 1.0).unwrap();
    let schedule = ProtocolSchedule::new(1);
    let settings = RunSettings { schedule: &schedule, noise: &noise, duration: 1.0, dt: 1e-3 };
    let one = StateVector::basis(1, 1).unwrap();
    let plus = StateVector::new(1, vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
    let mut worst: f64 = 0.0;
    let mut rho11 = f64::NAN;
    for (k, psi) in [&one, &plus].into_iter().enumerate() {
        let mc = ensemble_density(psi, settings, 10_000, 40 + k as u64).unwrap();
        let me = lindblad_integrate(&psi.projector(), 1.0, &noise, &schedule, 1e-3).unwrap();
        worst = worst.max(mc.trace_distance(&me).unwrap());
        if k == 0 {
            rho11 = mc.element(1, 1).re;
        }
    }
    let t = start.elapsed();
    let expected = (-1.0f64).exp();
    outcome(
        worst <= 0.03 && (rho11 - expected).abs() <= 0.02 && within(t, 30.0),
        format!("trace distance {worst:.4}, rho11 {rho11:.4} vs {expected:.4}, {t:.2?}"),
    )
}

fn gate_identities() -> Outcome {
    let start = Instant::now();
    let checks = run_identity_suite(5).unwrap();
    let names = ["controlled_phase", "xy_to_xx", "heisenberg_to_xx", "heisenberg_to_zz", "euler_reconstruction"];
    let mut ok = true;
    let mut parts = Vec::new();
    for name in names {
        let check = checks.iter().find(|c| c.name == name).expect("check present");
        ok &= check.max_deviation <= 1e-10 && check.draws >= 50;
        parts.push(format!("{name} {:.1e}/{}", check.max_deviation, check.draws));
    }
    let t = start.elapsed();
    outcome(ok && within(t, 30.0), format!("{}, {t:.2?}", parts.join(", ")))
}

fn preservation_and_compatibility() -> Outcome {
    let checks = run_identity_suite(6).unwrap();
    let get = |name: &str| checks.iter().find(|c| c.name == name).expect("check present");
    let preservation = get("code_preservation");
    let encoded_ok = ["encoded_controlled_phase", "logical_cnot", "encoded_rotation"].iter().all(|n| get(n).passed);
    let commutator = get("pulse_commutes_with_couplings");
    outcome(
        preservation.passed && encoded_ok && commutator.max_deviation == 0.0,
        format!(
            "leakage {:.1e} over {} sequences, couplings commutator {} over {} terms",
            preservation.max_deviation, preservation.draws, commutator.max_deviation, commutator.draws
        ),
    )
}

fn protection_benefit() -> Outcome {
    let start = Instant::now();
    let config = ExperimentConfig::from_toml_str(
        "scenario = \"memory_fidelity\"\nbase_seed = 2024\nn = 2\nnum_trajectories = 10000\nduration = 0.5\nt_c = 0.02\n[noise]\ngamma = 1.0\n",
    )
    .unwrap();
    let p = MemoryRun::from_config(&config, true).unwrap().simulate(10_000, 2024).unwrap();
    let u = MemoryRun::from_config(&config, false).unwrap().simulate(10_000, 2024).unwrap();
    let sigma = (p.fidelity.mean - u.fidelity.mean) / (p.fidelity.stderr.powi(2) + u.fidelity.stderr.powi(2)).sqrt();

    let scaling = ExperimentConfig::from_toml_str(
        "scenario = \"double_jump_scaling\"\nbase_seed = 77\nn = 2\nnum_trajectories = 200000\nt_c = 0.01\n[noise]\ngamma = 1.0\n[sweep]\ngamma_t = [0.02, 0.0356, 0.0632, 0.1125, 0.2]\n",
    )
    .unwrap();
    let report = run_scenario(&scaling).unwrap();
    let slope = report.scaling.as_ref().map(|s| s.slope).unwrap_or(f64::NAN);
    let t = start.elapsed();
    outcome(
        sigma >= 5.0 && (slope - 2.0).abs() <= 0.3 && within(t, 300.0),
        format!(
            "protected {:.5} vs unprotected {:.4} ({sigma:.1} sigma), failure slope {slope:.3}, {t:.2?}",
            p.fidelity.mean, u.fidelity.mean
        ),
    )
}

fn strip_timestamp(mut r: ExperimentReport) -> String {
    r.timestamp = 0;
    r.to_json().unwrap()
}

fn coherence_study() -> Outcome {
    let config = ExperimentConfig::from_toml_str("scenario = \"coherence_compare\"\nbase_seed = 8\n").unwrap();
    let first = run_scenario(&config).unwrap();
    let second = run_scenario(&config).unwrap();
    let summary = first.coherence.clone().expect("coherence summary");
    let gaps: Vec<String> = first
        .rows
        .iter()
        .map(|r| format!("{:.0e}:{:.3e}", r.values["gamma_tc"], r.values["gap_over_gamma_tc"]))
        .collect();
    let deterministic = strip_timestamp(first) == strip_timestamp(second);
    outcome(
        deterministic && summary.max_relative_error <= 0.01,
        format!(
            "deterministic {deterministic}, slope error {:.2e}, averaged slopes {:.4}/{:.4}, gap/γT_c {}",
            summary.max_relative_error,
            summary.measured_average_free_slope,
            summary.measured_average_pulsed_slope,
            gaps.join(" ")
        ),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("bb elimination identity", bb_identity),
        ("qecc condition", qecc_condition),
        ("recovery exactness", recovery_exactness),
        ("trajectory/oracle equivalence", trajectory_oracle),
        ("gate-identity suite", gate_identities),
        ("code preservation and bb compatibility", preservation_and_compatibility),
        ("protection benefit", protection_benefit),
        ("coherence study", coherence_study),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failures += !o.passed as usize;
        println!("criterion {} {:<40} {}  {}", k + 1, name, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
