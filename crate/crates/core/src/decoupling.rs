//! Collective bang-bang `X` pulses.
//!
//! Flipping every qubit at intervals `T_c/2` exchanges the roles of `|0⟩` and
//! `|1⟩` halfway through each period, so the diagonal conditional Hamiltonian
//! acts on every basis state with the same total weight and its net effect is a
//! uniform norm factor.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Gate;
use crate::error::{Error, Result};
use crate::quantum::{evolution, purity, DenseOperator, StateVector};
use crate::trajectory::{conditional_hamiltonian, lindblad_integrate, NoiseModel, ProtocolSchedule};

/// Above this value of `T_c · max κ` the pulses are too slow to be useful.
pub const PERIOD_ADVISORY_LIMIT: f64 = 0.2;

/// `X ⊗ X ⊗ ⋯ ⊗ X` on `num_qubits` qubits.
pub fn collective_x(num_qubits: usize) -> Result<DenseOperator> {
    if num_qubits == 0 {
        return Err(Error::InvalidParameter("collective pulse needs at least one qubit".into()));
    }
    Gate::XPulse((1..=num_qubits).collect()).unitary(num_qubits)
}

/// Collective `X` pulses at every multiple of `T_c/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub period: f64,
    pub enabled: bool,
}

impl PulseSchedule {
    pub fn new(period: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidParameter(format!("pulse period must be positive, got {period}")));
        }
        Ok(Self { period, enabled: true })
    }

    pub fn disabled() -> Self {
        Self { period: f64::INFINITY, enabled: false }
    }

    /// Pulse instants in `(0, duration]`.
    pub fn pulse_times(&self, duration: f64) -> Vec<f64> {
        if !self.enabled {
            return Vec::new();
        }
        let half = 0.5 * self.period;
        let count = (duration / half + 1e-9).floor() as usize;
        (1..=count).map(|k| k as f64 * half).collect()
    }

    /// Adds the pulses up to `duration` to `schedule`.
    pub fn apply_to(&self, schedule: &mut ProtocolSchedule, duration: f64) -> Result<usize> {
        let times = self.pulse_times(duration);
        for &t in &times {
            schedule.add_pulse(t)?;
        }
        Ok(times.len())
    }

    /// Warning text when `T_c · max κ` exceeds [`PERIOD_ADVISORY_LIMIT`].
    pub fn advisory(&self, noise: &NoiseModel) -> Option<String> {
        let product = self.period * noise.max_rate();
        (self.enabled && product > PERIOD_ADVISORY_LIMIT).then(|| {
            format!("pulse period is slow compared to the emission rate: T_c·max κ = {product:.3} > {PERIOD_ADVISORY_LIMIT}")
        })
    }
}

/// One full decoupling period of no-jump evolution,
/// `e^{−i(T_c/2)H_c} X e^{−i(T_c/2)H_c} X`.
pub fn bb_period_operator(noise: &NoiseModel, period: f64) -> Result<DenseOperator> {
    noise.validate()?;
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::InvalidParameter(format!("pulse period must be positive, got {period}")));
    }
    let n = noise.num_qubits();
    let half = evolution(&conditional_hamiltonian(noise, n)?, 0.5 * period)?;
    let x = collective_x(n)?;
    half.compose(&x)?.compose(&half)?.compose(&x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherenceMode {
    Free,
    Pulsed,
}

impl CoherenceMode {
    pub const ALL: [CoherenceMode; 2] = [CoherenceMode::Free, CoherenceMode::Pulsed];
}

fn single_qubit_state(alpha: Complex64, beta: Complex64) -> Result<StateVector> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized { norm: norm.sqrt() });
    }
    StateVector::new(1, vec![alpha, beta])
}

/// Purity `Tr ρ²` after one period `T_c` of amplitude damping starting from
/// `α|0⟩ + β|1⟩`, with pulses at `T_c/2` and `T_c` in pulsed mode.
pub fn coherence_comparison(
    alpha: Complex64,
    beta: Complex64,
    gamma: f64,
    period: f64,
    mode: CoherenceMode,
) -> Result<f64> {
    let psi = single_qubit_state(alpha, beta)?;
    let noise = NoiseModel::uniform(1, gamma)?;
    let mut schedule = ProtocolSchedule::new(1);
    if mode == CoherenceMode::Pulsed {
        PulseSchedule::new(period)?.apply_to(&mut schedule, period)?;
    }
    let dt = period / 200.0;
    let rho = lindblad_integrate(&psi.projector(), period, &noise, &schedule, dt)?;
    Ok(purity(&rho))
}

/// Values of `γT_c` used for slope extrapolation.
pub const SLOPE_POINTS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// First-order purity-loss coefficient `s` in `C = 1 − s·γT_c + O(γ²T_c²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeEstimate {
    /// `(1 − C)/(γT_c)` at each entry of [`SLOPE_POINTS`].
    pub raw: [f64; 3],
    /// Quadratic extrapolation of `raw` to `γT_c → 0`.
    pub extrapolated: f64,
}

/// Evaluates `(1 − C)/(γT_c)` at [`SLOPE_POINTS`] and extrapolates to zero.
pub fn purity_loss_slope(alpha: Complex64, beta: Complex64, mode: CoherenceMode) -> Result<SlopeEstimate> {
    let mut raw = [0.0; 3];
    for (r, &x) in raw.iter_mut().zip(&SLOPE_POINTS) {
        *r = (1.0 - coherence_comparison(alpha, beta, 1.0, x, mode)?) / x;
    }
    Ok(SlopeEstimate { raw, extrapolated: extrapolate_to_zero(&SLOPE_POINTS, &raw) })
}

/// Value at zero of the polynomial through the points `(h_k, s_k)`.
pub fn extrapolate_to_zero(h: &[f64], s: &[f64]) -> f64 {
    let mut total = 0.0;
    for k in 0..h.len() {
        let mut weight = 1.0;
        for m in 0..h.len() {
            if m != k {
                weight *= h[m] / (h[m] - h[k]);
            }
        }
        total += weight * s[k];
    }
    total
}

/// Haar-random single-qubit state: `|β|²` uniform on `[0, 1]`, relative
/// phase uniform on `[0, 2π)`.
pub fn haar_qubit_state<R: Rng + ?Sized>(rng: &mut R) -> (Complex64, Complex64) {
    let p: f64 = rng.random();
    let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    (Complex64::new((1.0 - p).sqrt(), 0.0), Complex64::from_polar(p.sqrt(), phase))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragedCoherence {
    pub free: f64,
    pub pulsed: f64,
    /// `|⟨C₁⟩ − ⟨C₂⟩|`
    pub gap: f64,
}

/// Mean purity for free and pulsed evolution over Haar-random initial
/// states, both modes evaluated on the same states.
pub fn averaged_coherence_gap(gamma: f64, period: f64, num_samples: usize, seed: u64) -> Result<AveragedCoherence> {
    if num_samples < 100 {
        return Err(Error::InvalidParameter(format!("need at least 100 samples, got {num_samples}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states: Vec<_> = (0..num_samples).map(|_| haar_qubit_state(&mut rng)).collect();
    let values = states
        .par_iter()
        .map(|&(a, b)| {
            Ok((
                coherence_comparison(a, b, gamma, period, CoherenceMode::Free)?,
                coherence_comparison(a, b, gamma, period, CoherenceMode::Pulsed)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut free, mut pulsed) = (0.0, 0.0);
    for (f, p) in values {
        free += f;
        pulsed += p;
    }
    free /= num_samples as f64;
    pulsed /= num_samples as f64;
    Ok(AveragedCoherence { free, pulsed, gap: (free - pulsed).abs() })
}
