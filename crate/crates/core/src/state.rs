//! One- and two-qubit density matrices in the Pauli basis.
//!
//! A state on `n` qubits is stored as the `4^n` real numbers `Tr(σ^α ρ)`,
//! with `α` running over Pauli strings in lexicographic order of the
//! alphabet `I < X < Y < Z`. For two qubits the index of `σ^a ⊗ σ^b` is
//! `4a + b`, so the order is `II, IX, IY, IZ, XI, ..., ZZ`. The matrix is
//! `ρ = 2^{-n} Σ_α coeffs[α] σ^α`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default lower bound on the eigenvalues of a reconstructed state.
pub const DEFAULT_POSITIVITY_TOL: f64 = 1e-9;

const PURITY_SLACK: f64 = 1e-9;

/// Single-qubit Pauli labels in index order.
pub const PAULI_LABELS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// Selects one qubit of a two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Site {
    First,
    Second,
}

/// Density matrix of one or two qubits stored as real Pauli coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPauliVector", into = "RawPauliVector")]
pub struct PauliVector {
    n_qubits: usize,
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawPauliVector {
    n: usize,
    coeffs: Vec<f64>,
}

impl TryFrom<RawPauliVector> for PauliVector {
    type Error = Error;

    fn try_from(raw: RawPauliVector) -> Result<Self> {
        PauliVector::new(raw.n, raw.coeffs)
    }
}

impl From<PauliVector> for RawPauliVector {
    fn from(p: PauliVector) -> Self {
        RawPauliVector {
            n: p.n_qubits,
            coeffs: p.coeffs,
        }
    }
}

impl PauliVector {
    /// Validated constructor using [`DEFAULT_POSITIVITY_TOL`].
    pub fn new(n_qubits: usize, coeffs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(n_qubits, coeffs, DEFAULT_POSITIVITY_TOL)
    }

    /// Validated constructor. The identity coefficient must equal one to
    /// within `1e-12` and is then pinned to exactly one.
    pub fn with_tolerance(n_qubits: usize, mut coeffs: Vec<f64>, positivity_tol: f64) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << (2 * n_qubits);
        if coeffs.len() != dim {
            return Err(Error::InvalidState(format!(
                "expected {dim} coefficients for {n_qubits} qubit(s), got {}",
                coeffs.len()
            )));
        }
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidState(format!("non-finite coefficient {bad}")));
        }
        if (coeffs[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!(
                "identity coefficient must be 1, got {}",
                coeffs[0]
            )));
        }
        coeffs[0] = 1.0;
        let state = PauliVector { n_qubits, coeffs };
        state.check_physical(positivity_tol)?;
        Ok(state)
    }

    /// Single-qubit state with Bloch vector `(x, y, z)`.
    pub fn bloch(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new(1, vec![1.0, x, y, z])
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let mut coeffs = vec![0.0; 1 << (2 * n_qubits)];
        coeffs[0] = 1.0;
        Ok(PauliVector { n_qubits, coeffs })
    }

    /// Skips positivity validation; used for exactly known states.
    pub(crate) fn from_trusted(n_qubits: usize, coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(coeffs.len(), 1 << (2 * n_qubits));
        PauliVector { n_qubits, coeffs }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Coefficient of the Pauli string given as text, e.g. `"XZ"`.
    pub fn get(&self, label: &str) -> Option<f64> {
        pauli_index(label)
            .filter(|_| label.len() == self.n_qubits)
            .map(|i| self.coeffs[i])
    }

    /// Bloch vector `(x, y, z)` of a single-qubit state.
    pub fn bloch_vector(&self) -> Option<[f64; 3]> {
        (self.n_qubits == 1).then(|| [self.coeffs[1], self.coeffs[2], self.coeffs[3]])
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>() / self.dim() as f64
    }

    /// Reconstructs `ρ` as a complex Hermitian matrix.
    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
        for (alpha, &c) in self.coeffs.iter().enumerate() {
            if c != 0.0 {
                rho += pauli_string_matrix(self.n_qubits, alpha) * Complex64::new(c, 0.0);
            }
        }
        rho / Complex64::new(dim as f64, 0.0)
    }

    /// Eigenvalues of the reconstructed matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.to_matrix().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Positivity and purity checks.
    pub fn check_physical(&self, positivity_tol: f64) -> Result<()> {
        let min = self.min_eigenvalue();
        if min < -positivity_tol {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
                tolerance: positivity_tol,
            });
        }
        let purity = self.purity();
        if purity > 1.0 + PURITY_SLACK {
            return Err(Error::InvalidState(format!("purity {purity} exceeds 1")));
        }
        Ok(())
    }

    /// Mixture `p·self + (1-p)·other`.
    pub fn mix(&self, other: &PauliVector, p: f64) -> Result<PauliVector> {
        self.same_size(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| p * a + (1.0 - p) * b)
            .collect();
        Ok(PauliVector::from_trusted(self.n_qubits, coeffs))
    }

    fn same_size(&self, other: &PauliVector) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        Ok(())
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 1 || n == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedQubits(n))
    }
}

/// Index of a Pauli string such as `"IZ"` in the canonical order.
pub fn pauli_index(label: &str) -> Option<usize> {
    label.chars().try_fold(0usize, |acc, ch| {
        PAULI_LABELS.iter().position(|&p| p == ch.to_ascii_uppercase()).map(|k| 4 * acc + k)
    })
}

/// Text label of Pauli index `alpha` on `n` qubits.
pub fn pauli_label(n_qubits: usize, alpha: usize) -> String {
    (0..n_qubits)
        .rev()
        .map(|k| PAULI_LABELS[(alpha >> (2 * k)) & 3])
        .collect()
}

pub(crate) fn pauli_matrix(k: usize) -> DMatrix<Complex64> {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match k {
        0 => DMatrix::from_row_slice(2, 2, &[one, z, z, one]),
        1 => DMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        2 => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        3 => DMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
        _ => unreachable!("Pauli index out of range"),
    }
}

/// Matrix of the Pauli string with index `alpha` on `n` qubits.
pub(crate) fn pauli_string_matrix(n_qubits: usize, alpha: usize) -> DMatrix<Complex64> {
    (0..n_qubits).rev().fold(DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)), |acc, k| {
        acc.kronecker(&pauli_matrix((alpha >> (2 * k)) & 3))
    })
}

/// Pauli coefficients `Tr(σ^α ρ)` of an arbitrary matrix on 1 or 2 qubits.
pub(crate) fn pauli_coefficients(rho: &DMatrix<Complex64>) -> Vec<f64> {
    let n_qubits = rho.nrows().trailing_zeros() as usize;
    (0..1usize << (2 * n_qubits))
        .map(|alpha| (pauli_string_matrix(n_qubits, alpha) * rho).trace().re)
        .collect()
}

/// `a ⊗ b` of two single-qubit states.
pub fn tensor_product(a: &PauliVector, b: &PauliVector) -> Result<PauliVector> {
    for s in [a, b] {
        if s.n_qubits != 1 {
            return Err(Error::QubitMismatch {
                expected: 1,
                got: s.n_qubits,
            });
        }
    }
    let mut coeffs = Vec::with_capacity(16);
    for &ca in &a.coeffs {
        for &cb in &b.coeffs {
            coeffs.push(ca * cb);
        }
    }
    Ok(PauliVector::from_trusted(2, coeffs))
}

/// Reduced state of one qubit of a two-qubit state.
pub fn partial_trace(ab: &PauliVector, keep: Site) -> Result<PauliVector> {
    if ab.n_qubits != 2 {
        return Err(Error::QubitMismatch {
            expected: 2,
            got: ab.n_qubits,
        });
    }
    let coeffs = (0..4)
        .map(|k| match keep {
            Site::First => ab.coeffs[4 * k],
            Site::Second => ab.coeffs[k],
        })
        .collect();
    Ok(PauliVector::from_trusted(1, coeffs))
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(a: &PauliVector, b: &PauliVector) -> Result<f64> {
    a.same_size(b)?;
    a.check_physical(DEFAULT_POSITIVITY_TOL)?;
    b.check_physical(DEFAULT_POSITIVITY_TOL)?;
    let sqrt_a = psd_sqrt(&a.to_matrix());
    let inner = &sqrt_a * b.to_matrix() * &sqrt_a;
    let root_trace: f64 = inner
        .symmetric_eigenvalues()
        .iter()
        .map(|&ev| ev.max(0.0).sqrt())
        .sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

fn psd_sqrt(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = m.clone().symmetric_eigen();
    let roots = eig.eigenvalues.map(|ev| Complex64::new(ev.max(0.0).sqrt(), 0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

/// Pure single-qubit H-type state with Bloch vector `(1/√2, 0, 1/√2)`.
pub fn h_state() -> PauliVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PauliVector::from_trusted(1, vec![1.0, s, 0.0, s])
}
