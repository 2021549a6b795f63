//! Pure stabilizer states of one and two qubits.
//!
//! The states are generated as the orbit of `|0…0⟩` under Hadamard, phase
//! and (for two qubits) CNOT gates. Every Pauli coefficient of a pure
//! stabilizer state is exactly `0` or `±1`, which gives an exact integer
//! fingerprint for deduplication.

use std::collections::{BTreeSet, VecDeque};
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::simplex::{self, SimplexOptions};
use crate::state::{pauli_coefficients, PauliVector};

/// Exact Pauli coefficients of a pure stabilizer state.
pub type Fingerprint = Vec<i8>;

/// Enumerated stabilizer states together with `A[α][k] = Tr(σ^α S_k)`.
#[derive(Debug, Clone)]
pub struct StabilizerPolytope {
    n_qubits: usize,
    fingerprints: Vec<Fingerprint>,
    states: Vec<PauliVector>,
    a_matrix: DMatrix<f64>,
}

impl StabilizerPolytope {
    /// Enumerates the pure stabilizer states of `n_qubits ∈ {1, 2}`.
    pub fn enumerate(n_qubits: usize) -> Result<Self> {
        if !(1..=2).contains(&n_qubits) {
            return Err(Error::UnsupportedQubits(n_qubits));
        }
        let gates = generators(n_qubits);
        let dim = 1usize << n_qubits;
        let mut start = DVector::<Complex64>::zeros(dim);
        start[0] = Complex64::new(1.0, 0.0);

        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(fingerprint_of_vector(&start));
        queue.push_back(start);
        while let Some(psi) = queue.pop_front() {
            for g in &gates {
                let next = g * &psi;
                if seen.insert(fingerprint_of_vector(&next)) {
                    queue.push_back(next);
                }
            }
        }
        Ok(Self::from_fingerprints(n_qubits, seen.into_iter().collect()))
    }

    /// Shared polytope for `n_qubits`, built on first use.
    pub fn cached(n_qubits: usize) -> Result<&'static StabilizerPolytope> {
        static ONE: OnceLock<StabilizerPolytope> = OnceLock::new();
        static TWO: OnceLock<StabilizerPolytope> = OnceLock::new();
        let cell = match n_qubits {
            1 => &ONE,
            2 => &TWO,
            n => return Err(Error::UnsupportedQubits(n)),
        };
        Ok(cell.get_or_init(|| Self::enumerate(n_qubits).expect("enumeration of 1 or 2 qubits")))
    }

    fn from_fingerprints(n_qubits: usize, fingerprints: Vec<Fingerprint>) -> Self {
        let rows = 1usize << (2 * n_qubits);
        let a_matrix = DMatrix::from_fn(rows, fingerprints.len(), |r, k| fingerprints[k][r] as f64);
        let states = fingerprints
            .iter()
            .map(|f| PauliVector::from_trusted(n_qubits, f.iter().map(|&c| c as f64).collect()))
            .collect();
        StabilizerPolytope {
            n_qubits,
            fingerprints,
            states,
            a_matrix,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[PauliVector] {
        &self.states
    }

    pub fn fingerprints(&self) -> &[Fingerprint] {
        &self.fingerprints
    }

    /// Pauli-expectation matrix with one column per stabilizer state.
    pub fn a_matrix(&self) -> &DMatrix<f64> {
        &self.a_matrix
    }

    /// Applies every generator to every state and reports whether the
    /// result is again one of the enumerated states.
    pub fn is_closed_under_generators(&self) -> bool {
        let gates = generators(self.n_qubits);
        let known: BTreeSet<&Fingerprint> = self.fingerprints.iter().collect();
        self.states.iter().all(|s| {
            let rho = s.to_matrix();
            gates.iter().all(|g| {
                let out = g * &rho * g.adjoint();
                known.contains(&round_fingerprint(&pauli_coefficients(&out)))
            })
        })
    }

    /// Whether `state` lies in the convex hull of the stabilizer states.
    ///
    /// Solver failures other than infeasibility are returned as errors.
    pub fn contains(&self, state: &PauliVector) -> Result<bool> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch {
                expected: self.n_qubits,
                got: state.n_qubits(),
            });
        }
        let zeros = vec![0.0; self.len()];
        let opts = SimplexOptions::default();
        match simplex::solve(&self.a_matrix, state.coeffs(), &zeros, &opts) {
            Ok(_) => Ok(true),
            Err(Error::LpInfeasible { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Pretty JSON listing of the states in canonical order.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.states).expect("PauliVector serializes")
    }
}

/// Convenience wrapper around [`StabilizerPolytope::contains`].
pub fn membership(state: &PauliVector, polytope: &StabilizerPolytope) -> Result<bool> {
    polytope.contains(state)
}

fn fingerprint_of_vector(psi: &DVector<Complex64>) -> Fingerprint {
    let rho = psi * psi.adjoint();
    round_fingerprint(&pauli_coefficients(&rho))
}

fn round_fingerprint(coeffs: &[f64]) -> Fingerprint {
    coeffs
        .iter()
        .map(|&c| {
            let r = c.round();
            debug_assert!((c - r).abs() < 1e-9, "stabilizer coefficient {c} is not integral");
            r as i8
        })
        .collect()
}

/// Hadamard and phase on each qubit, and CNOT in both directions.
pub(crate) fn generators(n_qubits: usize) -> Vec<DMatrix<Complex64>> {
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let h = DMatrix::from_row_slice(2, 2, &[r, r, r, -r]);
    let s = DMatrix::from_row_slice(2, 2, &[one, zero, zero, i]);
    let id = DMatrix::<Complex64>::identity(2, 2);
    match n_qubits {
        1 => vec![h, s],
        2 => {
            let perm = |p: [usize; 4]| DMatrix::from_fn(4, 4, |row, col| if p[col] == row { one } else { zero });
            vec![
                h.kronecker(&id),
                id.kronecker(&h),
                s.kronecker(&id),
                id.kronecker(&s),
                // |ab⟩ with a the first qubit: control first, then control second.
                perm([0, 1, 3, 2]),
                perm([0, 3, 2, 1]),
            ]
        }
        _ => unreachable!("checked by callers"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{h_state, pauli_index, tensor_product};

    /// `2^n Π_{k=1..n} (2^k + 1)`.
    fn count_formula(n: u32) -> usize {
        (1..=n).fold(1usize << n, |acc, k| acc * ((1usize << k) + 1))
    }

    #[test]
    fn one_qubit_octahedron() {
        let p = StabilizerPolytope::enumerate(1).unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(p.len(), count_formula(1));
        let mut blochs: Vec<[i8; 3]> = p.fingerprints().iter().map(|f| [f[1], f[2], f[3]]).collect();
        blochs.sort();
        let mut want = vec![[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
        want.sort();
        assert_eq!(blochs, want);
    }

    #[test]
    fn two_qubit_count_products_and_bell() {
        let p = StabilizerPolytope::enumerate(2).unwrap();
        assert_eq!(p.len(), 60);
        assert_eq!(p.len(), count_formula(2));

        let single = StabilizerPolytope::enumerate(1).unwrap();
        let mut products = 0;
        for a in single.states() {
            for b in single.states() {
                let ab = tensor_product(a, b).unwrap();
                let f: Fingerprint = ab.coeffs().iter().map(|&c| c as i8).collect();
                assert!(p.fingerprints().contains(&f));
                products += 1;
            }
        }
        assert_eq!(products, 36);
        let product_like = p
            .states()
            .iter()
            .filter(|s| {
                let c = s.coeffs();
                (0..4).all(|a| (0..4).all(|b| c[4 * a + b] == c[4 * a] * c[b]))
            })
            .count();
        assert_eq!(product_like, 36);

        let mut bell = vec![0i8; 16];
        bell[0] = 1;
        bell[pauli_index("XX").unwrap()] = 1;
        bell[pauli_index("YY").unwrap()] = -1;
        bell[pauli_index("ZZ").unwrap()] = 1;
        assert!(p.fingerprints().contains(&bell));
    }

    #[test]
    fn columns_are_pure_unique_and_sorted() {
        for n in [1, 2] {
            let p = StabilizerPolytope::enumerate(n).unwrap();
            assert!(p.fingerprints().windows(2).all(|w| w[0] < w[1]));
            for s in p.states() {
                assert_eq!(s.coeffs()[0], 1.0);
                assert_eq!(s.purity(), 1.0);
            }
        }
    }

    #[test]
    fn closure_and_rank() {
        for n in [1, 2] {
            assert!(StabilizerPolytope::enumerate(n).unwrap().is_closed_under_generators());
        }
        let p = StabilizerPolytope::enumerate(2).unwrap();
        assert_eq!(p.a_matrix().rank(1e-9), 16);
    }

    #[test]
    fn membership_cases() {
        let p = StabilizerPolytope::enumerate(1).unwrap();
        assert!(p.contains(&PauliVector::maximally_mixed(1).unwrap()).unwrap());
        assert!(!p.contains(&h_state()).unwrap());
        for s in p.states() {
            assert!(membership(s, &p).unwrap());
        }
        let p2 = StabilizerPolytope::enumerate(2).unwrap();
        for s in p2.states() {
            assert!(p2.contains(s).unwrap());
        }
        assert!(matches!(p2.contains(&h_state()), Err(Error::QubitMismatch { .. })));
        assert!(matches!(StabilizerPolytope::enumerate(3), Err(Error::UnsupportedQubits(3))));
    }

    #[test]
    fn json_dump_lists_every_state() {
        let p = StabilizerPolytope::enumerate(2).unwrap();
        let parsed: Vec<PauliVector> = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(parsed.len(), 60);
        assert_eq!(parsed, p.states());
    }
}
