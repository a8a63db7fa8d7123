//! Monte-Carlo wavefunction unravelling of spontaneous emission.
//!
//! Between jumps a state evolves under the diagonal conditional Hamiltonian
//! `H_c`; in every step of length `dt` qubit `i` emits with probability
//! `κ_i ⟨σ_i⁺σ_i⁻⟩ dt`. Averaging the final projectors over trajectories
//! reproduces the amplitude-damping master equation, which is integrated
//! independently in [`lindblad`] as an oracle.

mod lindblad;
mod noise;
mod schedule;

use std::collections::VecDeque;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{apply, qubit_mask, DensityMatrix, StateVector};

pub use lindblad::lindblad_integrate;
pub use noise::{conditional_hamiltonian, DetectorModel, NoiseModel};
pub use schedule::{ProtocolSchedule, RecoveryPolicy, ScheduledAction, TimedAction};

/// Cap on the total jump probability within a single step.
pub const MAX_STEP_PROBABILITY: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionEvent {
    pub time: f64,
    pub true_qubit: usize,
    /// `None` when the detector missed the photon.
    pub reported_qubit: Option<usize>,
}

impl EmissionEvent {
    pub fn is_detected(&self) -> bool {
        self.reported_qubit.is_some()
    }

    pub fn is_misidentified(&self) -> bool {
        matches!(self.reported_qubit, Some(q) if q != self.true_qubit)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppliedRecovery {
    pub time: f64,
    pub qubit: usize,
}

/// One unravelled history.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub events: Vec<EmissionEvent>,
    pub final_state: StateVector,
    pub applied_recoveries: Vec<AppliedRecovery>,
    /// Parity checks that flagged an error with no reported position.
    pub restarts: u32,
}

/// `exp(−i dt H_c) · state`, computed exactly from the diagonal of `H_c`.
pub fn conditional_step(state: &StateVector, dt: f64, noise: &NoiseModel) -> Result<StateVector> {
    noise.check_register(state.num_qubits())?;
    let rates = noise.basis_decay_rates();
    let mut out = state.clone();
    for (a, g) in out.amplitudes_mut().iter_mut().zip(rates) {
        *a *= (-0.5 * dt * g).exp();
    }
    Ok(out)
}

/// One first-order jump step over `[time, time + dt]`.
///
/// Returns the renormalized state and the emission, if one occurred.
pub fn sample_and_apply_jump<R: Rng + ?Sized>(
    state: &StateVector,
    time: f64,
    dt: f64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<(StateVector, Option<EmissionEvent>)> {
    noise.check_register(state.num_qubits())?;
    state.ensure_normalized()?;
    let mut stepper = Stepper::new(noise);
    let mut out = state.clone();
    let event = stepper.step(&mut out, time, dt, rng)?;
    Ok((out, event))
}

/// Step kernel with the per-basis damping factors cached for the last `dt`.
struct Stepper<'a> {
    noise: &'a NoiseModel,
    num_qubits: usize,
    basis_rates: Vec<f64>,
    cached_dt: f64,
    factors: Vec<f64>,
    jump_probs: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(noise: &'a NoiseModel) -> Self {
        let num_qubits = noise.num_qubits();
        Self {
            noise,
            num_qubits,
            basis_rates: noise.basis_decay_rates(),
            cached_dt: f64::NAN,
            factors: Vec::new(),
            jump_probs: vec![0.0; num_qubits],
        }
    }

    fn step<R: Rng + ?Sized>(
        &mut self,
        state: &mut StateVector,
        time: f64,
        dt: f64,
        rng: &mut R,
    ) -> Result<Option<EmissionEvent>> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        let n = self.num_qubits;
        self.jump_probs.iter_mut().for_each(|p| *p = 0.0);
        for (k, a) in state.amplitudes().iter().enumerate() {
            let w = a.norm_sqr();
            if w == 0.0 {
                continue;
            }
            for (i, p) in self.jump_probs.iter_mut().enumerate() {
                if k & qubit_mask(i + 1, n) != 0 {
                    *p += w;
                }
            }
        }
        let mut total = 0.0;
        for (p, kappa) in self.jump_probs.iter_mut().zip(&self.noise.rates) {
            *p *= kappa * dt;
            total += *p;
        }
        if total > MAX_STEP_PROBABILITY {
            return Err(Error::StepTooLarge { probability: total, cap: MAX_STEP_PROBABILITY });
        }

        let u: f64 = rng.random();
        if u < total {
            let mut acc = 0.0;
            let mut qubit = n;
            for (i, p) in self.jump_probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    qubit = i + 1;
                    break;
                }
            }
            *state = state.lowered(qubit)?.normalized()?;
            let reported_qubit = self.noise.detector.report(qubit, n, rng);
            return Ok(Some(EmissionEvent { time: time + dt, true_qubit: qubit, reported_qubit }));
        }

        if dt != self.cached_dt {
            self.factors = self.basis_rates.iter().map(|g| (-0.5 * dt * g).exp()).collect();
            self.cached_dt = dt;
        }
        let amps = state.amplitudes_mut();
        let mut norm_sqr = 0.0;
        for (a, f) in amps.iter_mut().zip(&self.factors) {
            *a *= *f;
            norm_sqr += a.norm_sqr();
        }
        *amps /= Complex64::new(norm_sqr.sqrt(), 0.0);
        Ok(None)
    }
}

/// Seed of trajectory `index` in an ensemble with `base_seed` (SplitMix64 mix).
pub fn derive_seed(base_seed: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(base_seed ^ mix(index))
}

struct PendingRecovery {
    due: f64,
    qubit: usize,
    pulses_at_event: usize,
}

/// Time-independent inputs of a trajectory run.
#[derive(Debug, Clone, Copy)]
pub struct RunSettings<'a> {
    pub schedule: &'a ProtocolSchedule,
    pub noise: &'a NoiseModel,
    pub duration: f64,
    pub dt: f64,
}

impl RunSettings<'_> {
    fn validate(&self, initial: &StateVector) -> Result<()> {
        let n = initial.num_qubits();
        self.noise.validate()?;
        self.noise.check_register(n)?;
        if self.schedule.num_qubits() != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.schedule.num_qubits() });
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(Error::InvalidParameter(format!("duration must be ≥ 0, got {}", self.duration)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {}", self.dt)));
        }
        initial.ensure_normalized()
    }
}

/// Simulates one trajectory. Deterministic in all inputs and `seed`.
///
/// Actions scheduled at the same instant run pulses first, then gates, then
/// parity checks; a jump landing on an action time is followed by those
/// actions before its recovery. Recoveries still pending when the run ends
/// are applied before the final state is recorded.
pub fn run_trajectory(initial: &StateVector, settings: RunSettings<'_>, seed: u64) -> Result<TrajectoryRecord> {
    settings.validate(initial)?;
    let RunSettings { schedule, noise, duration, dt } = settings;
    let n = initial.num_qubits();
    let eps = 1e-12 * duration.max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stepper = Stepper::new(noise);
    let collective_x = crate::decoupling::collective_x(n)?;

    let actions = schedule.actions();
    let mut state = initial.clone();
    let mut t = 0.0;
    let mut next_action = 0;
    let mut pulses = 0usize;
    let mut pending: VecDeque<PendingRecovery> = VecDeque::new();
    let mut events = Vec::new();
    let mut applied_recoveries = Vec::new();
    let mut restarts = 0u32;

    let recover = |state: &mut StateVector, p: &PendingRecovery, pulses: usize| -> Result<()> {
        let code = &schedule.recovery().expect("pending recovery without policy").code;
        let r = code.recovery_unitary(p.qubit)?;
        // An odd number of pulses since the emission turns σ⁻ into σ⁺ in the
        // lab frame; undo the frame flip around the recovery.
        if (pulses - p.pulses_at_event) % 2 == 1 {
            *state = apply(&collective_x, &apply(r, &apply(&collective_x, state)?)?)?;
        } else {
            *state = apply(r, state)?;
        }
        Ok(())
    };

    loop {
        while next_action < actions.len() && actions[next_action].time <= t + eps {
            match &actions[next_action].action {
                ScheduledAction::CollectivePulse => {
                    state = apply(&collective_x, &state)?;
                    pulses += 1;
                }
                ScheduledAction::Unitary { operator, .. } => {
                    state = apply(operator, &state)?;
                }
                ScheduledAction::ParityCheck => {
                    // A reported emission already flags the error; measuring
                    // now would scramble the branch the recovery expects.
                    if pending.is_empty() {
                        let code = schedule.parity_code().expect("parity check without code");
                        let (outcome, post) = code.measure_stabilizer(&state, &mut rng)?;
                        state = post;
                        if outcome == -1 {
                            restarts += 1;
                            state = initial.clone();
                        }
                    }
                }
            }
            next_action += 1;
        }
        while pending.front().is_some_and(|p| p.due <= t + eps) {
            let p = pending.pop_front().expect("checked non-empty");
            recover(&mut state, &p, pulses)?;
            applied_recoveries.push(AppliedRecovery { time: t, qubit: p.qubit });
        }
        if t >= duration - eps {
            break;
        }

        let mut horizon = duration;
        if let Some(a) = actions.get(next_action) {
            horizon = horizon.min(a.time);
        }
        if let Some(p) = pending.front() {
            horizon = horizon.min(p.due);
        }
        let (h, t_next) = if horizon - t <= dt { (horizon - t, horizon) } else { (dt, t + dt) };
        let event = stepper.step(&mut state, t, h, &mut rng)?;
        t = t_next;

        if let Some(mut event) = event {
            event.time = t;
            if let (Some(policy), Some(qubit)) = (schedule.recovery(), event.reported_qubit) {
                pending.push_back(PendingRecovery { due: t + policy.delay, qubit, pulses_at_event: pulses });
            }
            events.push(event);
        }
    }

    while let Some(p) = pending.pop_front() {
        recover(&mut state, &p, pulses)?;
        applied_recoveries.push(AppliedRecovery { time: duration, qubit: p.qubit });
    }

    Ok(TrajectoryRecord { seed, events, final_state: state.normalized()?, applied_recoveries, restarts })
}

/// Runs `num_trajectories` trajectories in parallel and maps each record
/// through `summarize`; results are returned in trajectory-index order.
pub fn run_ensemble<T, F>(
    initial: &StateVector,
    settings: RunSettings<'_>,
    num_trajectories: usize,
    base_seed: u64,
    summarize: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(TrajectoryRecord) -> T + Sync,
{
    if num_trajectories == 0 {
        return Err(Error::InvalidParameter("need at least one trajectory".into()));
    }
    settings.validate(initial)?;
    (0..num_trajectories as u64)
        .into_par_iter()
        .map(|k| run_trajectory(initial, settings, derive_seed(base_seed, k)).map(&summarize))
        .collect()
}

/// Average of final-state projectors over the ensemble.
pub fn ensemble_density(
    initial: &StateVector,
    settings: RunSettings<'_>,
    num_trajectories: usize,
    base_seed: u64,
) -> Result<DensityMatrix> {
    let finals = run_ensemble(initial, settings, num_trajectories, base_seed, |r| r.final_state)?;
    let dim = initial.dim();
    let mut sum = nalgebra::DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for psi in &finals {
        let a = psi.amplitudes();
        sum += a * a.adjoint();
    }
    sum /= Complex64::new(num_trajectories as f64, 0.0);
    DensityMatrix::new(initial.num_qubits(), sum)
}
