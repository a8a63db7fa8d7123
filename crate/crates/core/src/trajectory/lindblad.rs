//! Fixed-step RK4 integration of the amplitude-damping master equation
//!
//! ```text
//! dρ/dt = Σ_i κ_i ( σ_i⁻ ρ σ_i⁺ − ½ {σ_i⁺σ_i⁻, ρ} )
//! ```
//!
//! with scheduled unitaries applied as instantaneous conjugations. When the
//! schedule carries an immediate recovery policy, each jump term becomes the
//! mixture over detector outcomes of `U_o σ_i⁻ ρ σ_i⁺ U_o†`, which is the
//! ensemble average of the feedback protocol.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{NoiseModel, ProtocolSchedule, ScheduledAction};
use crate::decoupling::collective_x;
use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, DenseOperator};

const MAX_RATE_STEP: f64 = 0.01;

struct Dissipator {
    /// `(weight, K)` pairs for the `K ρ K†` terms.
    jumps: Vec<(f64, DMatrix<Complex64>)>,
    /// Diagonal of `Σ κ_i σ_i⁺σ_i⁻`.
    decay: Vec<f64>,
}

impl Dissipator {
    fn new(noise: &NoiseModel, schedule: &ProtocolSchedule) -> Result<Self> {
        let n = schedule.num_qubits();
        let recovery = match schedule.recovery() {
            Some(policy) if policy.delay > 0.0 => {
                return Err(Error::InvalidParameter(
                    "the master-equation oracle only models immediate recovery".into(),
                ))
            }
            Some(policy) => Some(&policy.code),
            None => None,
        };
        let det = noise.detector;
        let mut jumps = Vec::new();
        for (idx, &kappa) in noise.rates.iter().enumerate() {
            if kappa == 0.0 {
                continue;
            }
            let i = idx + 1;
            let lower = crate::quantum::embed_single_qubit(&crate::quantum::lowering(), i, n)?;
            let lower = lower.matrix().clone();
            match recovery {
                None => jumps.push((kappa, lower)),
                Some(code) => {
                    let p_correct = 1.0 - det.p_undetected - det.p_misidentify;
                    if det.p_undetected > 0.0 {
                        jumps.push((kappa * det.p_undetected, lower.clone()));
                    }
                    if p_correct > 0.0 {
                        jumps.push((kappa * p_correct, code.recovery_unitary(i)?.matrix() * &lower));
                    }
                    if det.p_misidentify > 0.0 {
                        let share = det.p_misidentify / (n - 1) as f64;
                        for j in (1..=n).filter(|&j| j != i) {
                            jumps.push((kappa * share, code.recovery_unitary(j)?.matrix() * &lower));
                        }
                    }
                }
            }
        }
        Ok(Self { jumps, decay: noise.basis_decay_rates() })
    }

    fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let dim = rho.nrows();
        let mut out = DMatrix::from_fn(dim, dim, |r, c| rho[(r, c)] * (-0.5 * (self.decay[r] + self.decay[c])));
        for (w, k) in &self.jumps {
            out += (k * rho * k.adjoint()) * Complex64::new(*w, 0.0);
        }
        out
    }

    fn rk4(&self, rho: &DMatrix<Complex64>, h: f64) -> DMatrix<Complex64> {
        let hc = Complex64::new(h, 0.0);
        let half = Complex64::new(0.5 * h, 0.0);
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + &k1 * half));
        let k3 = self.apply(&(rho + &k2 * half));
        let k4 = self.apply(&(rho + &k3 * hc));
        rho + (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * (hc / 6.0)
    }
}

/// Integrates the master equation from `initial` over `[0, duration]` with
/// steps no longer than `dt`, landing exactly on every scheduled action.
pub fn lindblad_integrate(
    initial: &DensityMatrix,
    duration: f64,
    noise: &NoiseModel,
    schedule: &ProtocolSchedule,
    dt: f64,
) -> Result<DensityMatrix> {
    let n = initial.num_qubits();
    noise.validate()?;
    noise.check_register(n)?;
    if schedule.num_qubits() != n {
        return Err(Error::DimensionMismatch { expected: n, found: schedule.num_qubits() });
    }
    if !(dt > 0.0) || dt * noise.max_rate() > MAX_RATE_STEP {
        return Err(Error::InvalidParameter(format!(
            "step {dt} violates dt·max(κ) ≤ {MAX_RATE_STEP} (max κ = {})",
            noise.max_rate()
        )));
    }
    if schedule.has_parity_checks() {
        return Err(Error::InvalidParameter("parity checks have no master-equation counterpart here".into()));
    }
    let dissipator = Dissipator::new(noise, schedule)?;
    let pulse: DenseOperator = collective_x(n)?;
    let eps = 1e-12 * duration.max(1.0);
    let actions = schedule.actions();

    let mut rho = initial.matrix().clone();
    let mut t = 0.0;
    let mut next = 0;
    loop {
        while next < actions.len() && actions[next].time <= t + eps {
            let u = match &actions[next].action {
                ScheduledAction::CollectivePulse => pulse.matrix(),
                ScheduledAction::Unitary { operator, .. } => operator.matrix(),
                ScheduledAction::ParityCheck => unreachable!("rejected above"),
            };
            rho = u * &rho * u.adjoint();
            next += 1;
        }
        if t >= duration - eps {
            break;
        }
        let horizon = actions.get(next).map_or(duration, |a| a.time.min(duration));
        let (h, t_next) = if horizon - t <= dt { (horizon - t, horizon) } else { (dt, t + dt) };
        if noise.max_rate() > 0.0 {
            rho = dissipator.rk4(&rho, h);
        }
        t = t_next;
    }
    // RK4 keeps the trace; only symmetrize away round-off.
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix::new(n, rho)
}
