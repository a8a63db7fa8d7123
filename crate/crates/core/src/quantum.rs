//! Dense complex linear algebra for few-qubit registers.
//!
//! Basis convention: qubit 1 is the most significant bit of a basis index, so
//! the string `"001"` names the state whose third qubit is excited. All public
//! qubit indices are 1-based.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the dense representation is meant for.
pub const MAX_QUBITS: usize = 12;

const UNITARITY_TOL: f64 = 1e-10;
const NORMALIZED_TOL: f64 = 1e-10;
const NORMALITY_TOL: f64 = 1e-12;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn pauli_x() -> Matrix2<Complex64> {
    Matrix2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> Matrix2<Complex64> {
    Matrix2::new(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> Matrix2<Complex64> {
    Matrix2::new(ONE, ZERO, ZERO, -ONE)
}

pub fn hadamard() -> Matrix2<Complex64> {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Matrix2::new(h, h, h, -h)
}

/// `σ⁻ = |0⟩⟨1|`, the emission operator.
pub fn lowering() -> Matrix2<Complex64> {
    Matrix2::new(ZERO, ONE, ZERO, ZERO)
}

/// `σ⁺σ⁻ = |1⟩⟨1|`.
pub fn excited_projector() -> Matrix2<Complex64> {
    Matrix2::new(ZERO, ZERO, ZERO, ONE)
}

/// Value (0 or 1) of `qubit` in basis index `index`.
#[inline]
pub fn bit(index: usize, qubit: usize, num_qubits: usize) -> usize {
    (index >> (num_qubits - qubit)) & 1
}

/// Mask selecting `qubit` in a basis index.
#[inline]
pub fn qubit_mask(qubit: usize, num_qubits: usize) -> usize {
    1 << (num_qubits - qubit)
}

pub(crate) fn check_qubit(qubit: usize, num_qubits: usize) -> Result<()> {
    if qubit == 0 || qubit > num_qubits {
        return Err(Error::QubitOutOfRange { index: qubit, num_qubits });
    }
    Ok(())
}

pub(crate) fn check_distinct(qubits: &[usize]) -> Result<()> {
    for (k, q) in qubits.iter().enumerate() {
        if qubits[..k].contains(q) {
            return Err(Error::DuplicateQubits(qubits.to_vec()));
        }
    }
    Ok(())
}

fn check_register(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::InvalidParameter(format!(
            "register size {num_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Pure state of an `num_qubits` register. Not necessarily normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    pub fn new(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_register(num_qubits)?;
        let dim = 1 << num_qubits;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: amplitudes.len() });
        }
        Ok(Self { num_qubits, amplitudes: DVector::from_vec(amplitudes) })
    }

    pub(crate) fn from_dvector(num_qubits: usize, amplitudes: DVector<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << num_qubits);
        Self { num_qubits, amplitudes }
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_register(num_qubits)?;
        let dim = 1 << num_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: index });
        }
        let mut amplitudes = DVector::from_element(dim, ZERO);
        amplitudes[index] = ONE;
        Ok(Self { num_qubits, amplitudes })
    }

    /// Computational basis state from a bit string such as `"010"`.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let index = parse_bits(bits)?;
        Self::basis(bits.len(), index)
    }

    /// Normalized combination `Σ c_k |index_k⟩`.
    pub fn superposition(num_qubits: usize, terms: &[(usize, Complex64)]) -> Result<Self> {
        let mut state = Self::basis(num_qubits, 0)?;
        state.amplitudes[0] = ZERO;
        for &(index, c) in terms {
            if index >= state.dim() {
                return Err(Error::DimensionMismatch { expected: state.dim(), found: index });
            }
            state.amplitudes[index] += c;
        }
        state.normalized()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORMALIZED_TOL
    }

    pub(crate) fn ensure_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm: self.norm() })
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { num_qubits: self.num_qubits, amplitudes: &self.amplitudes * factor }
    }

    /// `|self⟩ ⊗ |other⟩`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let amplitudes = self.amplitudes.kronecker(&other.amplitudes);
        let num_qubits = self.num_qubits + other.num_qubits;
        check_register(num_qubits)?;
        Ok(Self { num_qubits, amplitudes })
    }

    /// Expectation of `|1⟩⟨1|` on `qubit`, divided by the squared norm.
    pub fn excitation(&self, qubit: usize) -> f64 {
        let mask = qubit_mask(qubit, self.num_qubits);
        let excited: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(k, _)| k & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        excited / self.amplitudes.norm_squared()
    }

    /// `σ⁻` applied to `qubit`, not renormalized.
    pub fn lowered(&self, qubit: usize) -> Result<Self> {
        check_qubit(qubit, self.num_qubits)?;
        let mask = qubit_mask(qubit, self.num_qubits);
        let mut out = DVector::from_element(self.dim(), ZERO);
        for k in (0..self.dim()).filter(|k| k & mask == 0) {
            out[k] = self.amplitudes[k | mask];
        }
        Ok(Self { num_qubits: self.num_qubits, amplitudes: out })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn projector(&self) -> DensityMatrix {
        let psi = &self.amplitudes / Complex64::new(self.norm(), 0.0);
        DensityMatrix { num_qubits: self.num_qubits, matrix: &psi * psi.adjoint() }
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut DVector<Complex64> {
        &mut self.amplitudes
    }
}

pub(crate) fn parse_bits(bits: &str) -> Result<usize> {
    if bits.is_empty() {
        return Err(Error::InvalidParameter("empty bit string".into()));
    }
    bits.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        other => Err(Error::InvalidParameter(format!("invalid bit '{other}'"))),
    })
}

/// Square complex matrix acting on a `num_qubits` register.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    num_qubits: usize,
    matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn identity(num_qubits: usize) -> Self {
        let dim = 1 << num_qubits;
        Self { num_qubits, matrix: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(num_qubits: usize) -> Self {
        let dim = 1 << num_qubits;
        Self { num_qubits, matrix: DMatrix::from_element(dim, dim, ZERO) }
    }

    pub fn from_matrix(num_qubits: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        check_register(num_qubits)?;
        let dim = 1 << num_qubits;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { num_qubits, matrix })
    }

    pub fn from_diagonal(num_qubits: usize, diagonal: &[Complex64]) -> Result<Self> {
        let dim = 1 << num_qubits;
        if diagonal.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: diagonal.len() });
        }
        Self::from_matrix(num_qubits, DMatrix::from_diagonal(&DVector::from_row_slice(diagonal)))
    }

    /// Operator defined by a map on basis indices, `|k⟩ ↦ |f(k)⟩`.
    pub fn from_basis_map(num_qubits: usize, f: impl Fn(usize) -> usize) -> Self {
        let mut op = Self::zeros(num_qubits);
        for k in 0..op.dim() {
            op.matrix[(f(k), k)] = ONE;
        }
        op
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self { num_qubits: self.num_qubits, matrix: self.matrix.adjoint() }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { num_qubits: self.num_qubits, matrix: &self.matrix * factor }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }

    /// `self · other` (so `other` acts first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { num_qubits: self.num_qubits, matrix: &self.matrix * &other.matrix })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { num_qubits: self.num_qubits, matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { num_qubits: self.num_qubits, matrix: &self.matrix - &other.matrix })
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let m = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        Ok(Self { num_qubits: self.num_qubits, matrix: m })
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        let num_qubits = self.num_qubits + other.num_qubits;
        check_register(num_qubits)?;
        Ok(Self { num_qubits, matrix: self.matrix.kronecker(&other.matrix) })
    }

    /// Largest entry magnitude.
    pub fn max_norm(&self) -> f64 {
        max_abs(&self.matrix)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.num_qubits != other.num_qubits {
            return f64::INFINITY;
        }
        max_abs(&(&self.matrix - &other.matrix))
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_deviation(&self) -> f64 {
        let dim = self.dim();
        max_abs(&(self.matrix.adjoint() * &self.matrix - DMatrix::identity(dim, dim)))
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_deviation() <= UNITARITY_TOL
    }

    pub fn ensure_unitary(&self) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation <= UNITARITY_TOL {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("operator is not unitary (deviation {deviation:e})")))
        }
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// `‖AA† − A†A‖_max`.
    pub fn normality_deviation(&self) -> f64 {
        let adj = self.matrix.adjoint();
        max_abs(&(&self.matrix * &adj - &adj * &self.matrix))
    }

    pub fn is_diagonal(&self) -> bool {
        let dim = self.dim();
        (0..dim).all(|r| (0..dim).all(|c| r == c || self.matrix[(r, c)] == ZERO))
    }

    /// `min_φ ‖self − e^{iφ} other‖_max`, with `φ` fixed by the
    /// largest-magnitude entry of `other`.
    pub fn phase_insensitive_distance(&self, other: &Self) -> f64 {
        if self.num_qubits != other.num_qubits {
            return f64::INFINITY;
        }
        let (k, pivot) = other
            .matrix
            .iter()
            .enumerate()
            .fold((0, 0.0), |best, (k, z)| if z.norm() > best.1 { (k, z.norm()) } else { best });
        if pivot == 0.0 {
            return self.max_norm();
        }
        let target = self.matrix.as_slice()[k];
        let ratio = target / other.matrix.as_slice()[k];
        let phase = if ratio.norm() > 0.0 { ratio / ratio.norm() } else { ONE };
        max_abs(&(&self.matrix - &other.matrix * phase))
    }
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` on `qubit` (1-based).
pub fn embed_single_qubit(op: &Matrix2<Complex64>, qubit: usize, num_qubits: usize) -> Result<DenseOperator> {
    check_register(num_qubits)?;
    check_qubit(qubit, num_qubits)?;
    let left = DMatrix::<Complex64>::identity(1 << (qubit - 1), 1 << (qubit - 1));
    let right = DMatrix::<Complex64>::identity(1 << (num_qubits - qubit), 1 << (num_qubits - qubit));
    let op = DMatrix::from_iterator(2, 2, op.iter().copied());
    let matrix = left.kronecker(&op).kronecker(&right);
    Ok(DenseOperator { num_qubits, matrix })
}

/// Product of single-qubit operators on distinct qubits.
pub fn embed_product(factors: &[(Matrix2<Complex64>, usize)], num_qubits: usize) -> Result<DenseOperator> {
    let qubits: Vec<usize> = factors.iter().map(|(_, q)| *q).collect();
    check_distinct(&qubits)?;
    let mut out = DenseOperator::identity(num_qubits);
    for (op, q) in factors {
        out = out.compose(&embed_single_qubit(op, *q, num_qubits)?)?;
    }
    Ok(out)
}

/// `CNOT` with the given control and target.
pub fn cnot(control: usize, target: usize, num_qubits: usize) -> Result<DenseOperator> {
    check_register(num_qubits)?;
    check_qubit(control, num_qubits)?;
    check_qubit(target, num_qubits)?;
    check_distinct(&[control, target])?;
    let cmask = qubit_mask(control, num_qubits);
    let tmask = qubit_mask(target, num_qubits);
    Ok(DenseOperator::from_basis_map(num_qubits, |k| if k & cmask != 0 { k ^ tmask } else { k }))
}

/// `op · state`, without renormalization.
pub fn apply(op: &DenseOperator, state: &StateVector) -> Result<StateVector> {
    if op.num_qubits != state.num_qubits {
        return Err(Error::DimensionMismatch { expected: op.dim(), found: state.dim() });
    }
    Ok(StateVector { num_qubits: state.num_qubits, amplitudes: &op.matrix * &state.amplitudes })
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.num_qubits != b.num_qubits {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(a.amplitudes.dotc(&b.amplitudes))
}

/// Matrix exponential.
///
/// Normal matrices are split into commuting Hermitian and anti-Hermitian parts,
/// each exponentiated through its eigendecomposition. Anything else goes
/// through scaling-and-squaring with a Padé approximant.
pub fn expm(a: &DenseOperator) -> Result<DenseOperator> {
    if a.matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if a.is_diagonal() {
        let matrix = DMatrix::from_diagonal(&a.matrix.diagonal().map(|z| z.exp()));
        return Ok(DenseOperator { num_qubits: a.num_qubits, matrix });
    }
    let scale = a.max_norm().max(1.0);
    let matrix = if a.normality_deviation() <= NORMALITY_TOL * scale * scale {
        let adj = a.matrix.adjoint();
        let half = Complex64::new(0.5, 0.0);
        let hermitian = (&a.matrix + &adj) * half;
        let skew = (&a.matrix - &adj) * Complex64::new(0.0, -0.5);
        hermitian_exp(hermitian, ONE) * hermitian_exp(skew, I)
    } else {
        a.matrix.clone().exp()
    };
    Ok(DenseOperator { num_qubits: a.num_qubits, matrix })
}

/// `exp(factor · H)` for Hermitian `H`.
fn hermitian_exp(h: DMatrix<Complex64>, factor: Complex64) -> DMatrix<Complex64> {
    let dim = h.nrows();
    if max_abs(&h) == 0.0 {
        return DMatrix::identity(dim, dim);
    }
    let eig = SymmetricEigen::new(h);
    let phases = eig.eigenvalues.map(|lambda| (factor * lambda).exp());
    let mut scaled = eig.eigenvectors.clone();
    for (c, p) in phases.iter().enumerate() {
        let mut col = scaled.column_mut(c);
        col *= *p;
    }
    scaled * eig.eigenvectors.adjoint()
}

/// `exp(−i θ G)` for a Hermitian generator.
pub fn evolution(generator: &DenseOperator, theta: f64) -> Result<DenseOperator> {
    expm(&generator.scaled(Complex64::new(0.0, -theta)))
}

/// Density operator of a register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates trace, hermiticity and positivity.
    pub fn new(num_qubits: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        check_register(num_qubits)?;
        let dim = 1 << num_qubits;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows() });
        }
        let rho = Self { num_qubits, matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub fn validate(&self) -> Result<()> {
        let trace = self.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::InvalidDensityMatrix(format!("trace {trace}")));
        }
        let herm = max_abs(&(&self.matrix - self.matrix.adjoint()));
        if herm > 1e-10 {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian ({herm:e})")));
        }
        let min_eig = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -1e-9 {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(())
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1 << num_qubits;
        let matrix = DMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        Self { num_qubits, matrix }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
    }

    /// `U ρ U†`.
    pub fn conjugated(&self, u: &DenseOperator) -> Result<Self> {
        if u.num_qubits != self.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.dim() });
        }
        let matrix = &u.matrix * &self.matrix * u.matrix.adjoint();
        Ok(Self { num_qubits: self.num_qubits, matrix })
    }

    /// `⟨ψ|ρ|ψ⟩` for normalized `ψ`.
    pub fn expectation_in(&self, psi: &StateVector) -> Result<f64> {
        if psi.num_qubits != self.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: psi.dim() });
        }
        let v = &self.matrix * &psi.amplitudes;
        Ok(psi.amplitudes.dotc(&v).re)
    }

    /// `½ ‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if other.num_qubits != self.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let diff = &self.matrix - &other.matrix;
        let h = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        Ok(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
    }
}

/// `Tr(ρ²)`, clamped to `[1/d, 1]`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    let raw: f64 = rho.matrix.iter().map(|z| z.norm_sqr()).sum();
    raw.clamp(1.0 / rho.dim() as f64, 1.0)
}
