use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{qubit_mask, DenseOperator};

/// Imperfections of the emission detector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DetectorModel {
    /// Probability that an emission is not seen at all.
    pub p_undetected: f64,
    /// Probability that an emission is attributed to another qubit, drawn
    /// uniformly from the remaining ones.
    pub p_misidentify: f64,
}

impl DetectorModel {
    pub fn perfect() -> Self {
        Self::default()
    }

    pub fn new(p_undetected: f64, p_misidentify: f64) -> Result<Self> {
        let detector = Self { p_undetected, p_misidentify };
        detector.validate()?;
        Ok(detector)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |p: f64| (0.0..=1.0).contains(&p);
        if !ok(self.p_undetected) || !ok(self.p_misidentify) || self.p_undetected + self.p_misidentify > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "detector probabilities must lie in [0,1] and sum to at most 1, got {} and {}",
                self.p_undetected, self.p_misidentify
            )));
        }
        Ok(())
    }

    pub fn is_perfect(&self) -> bool {
        self.p_undetected == 0.0 && self.p_misidentify == 0.0
    }

    /// Qubit the detector reports for an emission from `true_qubit`.
    pub fn report<R: Rng + ?Sized>(&self, true_qubit: usize, num_qubits: usize, rng: &mut R) -> Option<usize> {
        let u: f64 = rng.random();
        if u < self.p_undetected {
            None
        } else if u < self.p_undetected + self.p_misidentify {
            let k = rng.random_range(1..num_qubits);
            Some(if k < true_qubit { k } else { k + 1 })
        } else {
            Some(true_qubit)
        }
    }
}

/// Spontaneous-emission rates `κ_i` plus the detector attached to them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub rates: Vec<f64>,
    #[serde(default)]
    pub detector: DetectorModel,
}

impl NoiseModel {
    pub fn new(rates: Vec<f64>, detector: DetectorModel) -> Result<Self> {
        let noise = Self { rates, detector };
        noise.validate()?;
        Ok(noise)
    }

    /// Common rate `γ` on every qubit with a perfect detector.
    pub fn uniform(num_qubits: usize, gamma: f64) -> Result<Self> {
        Self::new(vec![gamma; num_qubits], DetectorModel::perfect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.rates.is_empty() {
            return Err(Error::InvalidParameter("noise model needs at least one rate".into()));
        }
        if let Some(bad) = self.rates.iter().find(|k| !(k.is_finite() && **k >= 0.0)) {
            return Err(Error::InvalidParameter(format!("emission rates must be finite and ≥ 0, got {bad}")));
        }
        self.detector.validate()?;
        if self.rates.len() == 1 && self.detector.p_misidentify > 0.0 {
            return Err(Error::InvalidParameter("misidentification needs at least two qubits".into()));
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.rates.len()
    }

    pub(crate) fn check_register(&self, num_qubits: usize) -> Result<()> {
        if self.rates.len() != num_qubits {
            return Err(Error::DimensionMismatch { expected: num_qubits, found: self.rates.len() });
        }
        Ok(())
    }

    pub fn max_rate(&self) -> f64 {
        self.rates.iter().copied().fold(0.0, f64::max)
    }

    pub fn total_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    /// `Σ_{i: b_i = 1} κ_i` for every basis index `b`.
    pub fn basis_decay_rates(&self) -> Vec<f64> {
        let n = self.rates.len();
        (0..1usize << n)
            .map(|b| {
                self.rates
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| b & qubit_mask(i + 1, n) != 0)
                    .map(|(_, k)| k)
                    .sum()
            })
            .collect()
    }
}

/// `H_c = −(i/2) Σ κ_i σ_i⁺σ_i⁻`, diagonal in the computational basis.
pub fn conditional_hamiltonian(noise: &NoiseModel, num_qubits: usize) -> Result<DenseOperator> {
    noise.check_register(num_qubits)?;
    let diagonal: Vec<Complex64> =
        noise.basis_decay_rates().into_iter().map(|g| Complex64::new(0.0, -0.5 * g)).collect();
    DenseOperator::from_matrix(num_qubits, DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diagonal)))
}
