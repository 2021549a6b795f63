//! Robustness of magic.
//!
//! `R(ρ) = min { Σ_k |X_k| − 1 : Σ_k X_k S_k = ρ }` over real weights on
//! the pure stabilizer states `S_k`. Writing `X = P − Q` with `P, Q ≥ 0`
//! turns this into a standard-form LP over the Pauli coefficients,
//! which [`crate::simplex`] solves exactly enough for `1e-9` certificates.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{self, SimplexOptions};
use crate::stabilizer::StabilizerPolytope;
use crate::state::{partial_trace, tensor_product, PauliVector, Site, DEFAULT_POSITIVITY_TOL};

/// RoM values at or below this are treated as zero magic.
pub const NONZERO_THRESHOLD: f64 = 1e-9;

/// Optimal value and pseudomixture of one RoM solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RomResult {
    pub value: f64,
    /// Weights over the polytope's states, in polytope order. Only the
    /// optimal value is unique; these are the vertex the pivot rule reached.
    pub weights: Vec<f64>,
    /// Duality gap plus dual infeasibility of the final basis.
    pub objective_gap: f64,
    pub primal_residual: f64,
    pub iterations: usize,
}

impl RomResult {
    pub fn is_magic(&self) -> bool {
        self.value > NONZERO_THRESHOLD
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingleQubitRoute {
    /// Solve the LP for single-qubit inputs too.
    #[default]
    Lp,
    /// Use the `y = 0` closed form when it applies.
    ClosedForm,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RomOptions {
    pub simplex: SimplexOptions,
    pub single_qubit_route: SingleQubitRoute,
}

/// Solves the RoM linear program with default options.
pub fn rom_lp(state: &PauliVector, polytope: &StabilizerPolytope) -> Result<RomResult> {
    rom_lp_with(state, polytope, &RomOptions::default())
}

pub fn rom_lp_with(state: &PauliVector, polytope: &StabilizerPolytope, opts: &RomOptions) -> Result<RomResult> {
    if state.n_qubits() != polytope.n_qubits() {
        return Err(Error::QubitMismatch {
            expected: polytope.n_qubits(),
            got: state.n_qubits(),
        });
    }
    state.check_physical(DEFAULT_POSITIVITY_TOL)?;

    if state.n_qubits() == 1 && opts.single_qubit_route == SingleQubitRoute::ClosedForm {
        let [x, y, z] = state.bloch_vector().expect("single qubit");
        if y == 0.0 {
            return Ok(closed_form_result(x, z, polytope));
        }
    }

    let a = polytope.a_matrix();
    let (rows, k) = a.shape();
    let split = DMatrix::from_fn(rows, 2 * k, |r, j| if j < k { a[(r, j)] } else { -a[(r, j - k)] });
    let cost = vec![1.0; 2 * k];
    let sol = simplex::solve(&split, state.coeffs(), &cost, &opts.simplex)?;

    let weights: Vec<f64> = (0..k).map(|j| sol.x[j] - sol.x[j + k]).collect();
    let l1: f64 = weights.iter().map(|w| w.abs()).sum();
    let mut value = l1 - 1.0;
    if value < 0.0 && value > -1e-12 {
        value = 0.0;
    }
    Ok(RomResult {
        value,
        weights,
        objective_gap: sol.duality_gap + sol.dual_infeasibility,
        primal_residual: sol.primal_residual,
        iterations: sol.iterations,
    })
}

fn closed_form_result(x: f64, z: f64, polytope: &StabilizerPolytope) -> RomResult {
    // Four-state decomposition over |0⟩, |1⟩, |+⟩, |−⟩ with weights chosen
    // so that the L1 norm equals 1 + R.
    let value = (x.abs() + z.abs() - 1.0).max(0.0);
    let mut weights = vec![0.0; polytope.len()];
    let find = |bx: i8, bz: i8| {
        polytope
            .fingerprints()
            .iter()
            .position(|f| f[1] == bx && f[2] == 0 && f[3] == bz)
            .expect("axis stabilizer state present")
    };
    let (z_plus, z_minus) = (find(0, 1), find(0, -1));
    let (x_plus, x_minus) = (find(1, 0), find(-1, 0));
    // a1 + a2 = s, a3 + a4 = 1 − s, a1 − a2 = z, a3 − a4 = x.
    let s = if value > 0.0 {
        // Split the norm so both pairs carry negative parts proportionally.
        (1.0 + z.abs() - x.abs()) / 2.0
    } else {
        // Any feasible nonnegative split works; pick the one that keeps
        // both pairs nonnegative.
        let lo = z.abs();
        let hi = 1.0 - x.abs();
        if lo <= hi {
            lo
        } else {
            (lo + hi) / 2.0
        }
    };
    weights[z_plus] = (s + z) / 2.0;
    weights[z_minus] = (s - z) / 2.0;
    weights[x_plus] = (1.0 - s + x) / 2.0;
    weights[x_minus] = (1.0 - s - x) / 2.0;
    RomResult {
        value,
        weights,
        objective_gap: 0.0,
        primal_residual: 0.0,
        iterations: 0,
    }
}

/// `max(|x| + |z| − 1, 0)` for a single-qubit state with no `y` component.
pub fn rom_closed_form(bloch_x: f64, bloch_z: f64) -> Result<f64> {
    if !(bloch_x.is_finite() && bloch_z.is_finite()) || bloch_x * bloch_x + bloch_z * bloch_z > 1.0 + 1e-9 {
        return Err(Error::InvalidState(format!(
            "Bloch vector ({bloch_x}, {bloch_z}) lies outside the unit disc"
        )));
    }
    Ok((bloch_x.abs() + bloch_z.abs() - 1.0).max(0.0))
}

/// `log₂(1 + R)`.
pub fn log_robustness(state: &PauliVector, polytope: &StabilizerPolytope) -> Result<f64> {
    Ok(log_robustness_of(rom_lp(state, polytope)?.value))
}

pub fn log_robustness_of(rom: f64) -> f64 {
    (1.0 + rom).log2()
}

/// Global magic `log₂(1+R(ρ₁₂)) − log₂(1+R(ρ₁ ⊗ ρ₂))`.
pub fn global_magic(joint: &PauliVector, polytope: &StabilizerPolytope) -> Result<f64> {
    Ok(global_magic_parts(joint, polytope)?.global)
}

/// The pieces of a global-magic evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalMagic {
    pub joint_rom: f64,
    pub product_rom: f64,
    pub global: f64,
}

pub fn global_magic_parts(joint: &PauliVector, polytope: &StabilizerPolytope) -> Result<GlobalMagic> {
    if joint.n_qubits() != 2 {
        return Err(Error::QubitMismatch {
            expected: 2,
            got: joint.n_qubits(),
        });
    }
    let first = partial_trace(joint, Site::First)?;
    let second = partial_trace(joint, Site::Second)?;
    let product = tensor_product(&first, &second)?;
    let joint_rom = rom_lp(joint, polytope)?.value;
    let product_rom = rom_lp(&product, polytope)?.value;
    Ok(GlobalMagic {
        joint_rom,
        product_rom,
        global: log_robustness_of(joint_rom) - log_robustness_of(product_rom),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{h_state, pauli_index};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::SQRT_2;

    fn p1() -> &'static StabilizerPolytope {
        StabilizerPolytope::cached(1).unwrap()
    }

    fn p2() -> &'static StabilizerPolytope {
        StabilizerPolytope::cached(2).unwrap()
    }

    fn check_invariants(state: &PauliVector, res: &RomResult, polytope: &StabilizerPolytope) {
        let l1: f64 = res.weights.iter().map(|w| w.abs()).sum();
        assert_abs_diff_eq!(res.value, l1 - 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(res.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        let a = polytope.a_matrix();
        for r in 0..a.nrows() {
            let got: f64 = (0..a.ncols()).map(|k| a[(r, k)] * res.weights[k]).sum();
            assert_abs_diff_eq!(got, state.coeffs()[r], epsilon = 1e-9);
        }
        assert!(res.value >= 0.0);
        assert!(res.objective_gap < 1e-9, "gap {}", res.objective_gap);
    }

    #[test]
    fn stabilizer_vertex_has_zero_magic() {
        let zero = PauliVector::bloch(0.0, 0.0, 1.0).unwrap();
        let r = rom_lp(&zero, p1()).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-12);
        check_invariants(&zero, &r, p1());
        assert_abs_diff_eq!(log_robustness(&zero, p1()).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn h_state_values() {
        let r = rom_lp(&h_state(), p1()).unwrap();
        assert_abs_diff_eq!(r.value, SQRT_2 - 1.0, epsilon = 1e-12);
        check_invariants(&h_state(), &r, p1());
        assert_abs_diff_eq!(log_robustness(&h_state(), p1()).unwrap(), 0.5, epsilon = 1e-12);

        let hh = tensor_product(&h_state(), &h_state()).unwrap();
        let r2 = rom_lp(&hh, p2()).unwrap();
        assert_abs_diff_eq!(r2.value, (3.0 * SQRT_2 - 2.0) / 3.0, epsilon = 1e-9);
        check_invariants(&hh, &r2, p2());
        assert_abs_diff_eq!(
            log_robustness(&hh, p2()).unwrap(),
            (1.0 + (3.0 * SQRT_2 - 2.0) / 3.0).log2(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(rom_closed_form(0.0, 1.0).unwrap(), 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(rom_closed_form(s, s).unwrap(), SQRT_2 - 1.0, epsilon = 1e-15);
        assert_eq!(rom_closed_form(0.3, 0.4).unwrap(), 0.0);
        assert_abs_diff_eq!(rom_closed_form(0.8, 0.6).unwrap(), 0.4, epsilon = 1e-15);
        assert!(rom_closed_form(0.9, 0.9).is_err());
    }

    #[test]
    fn closed_form_route_gives_valid_decomposition() {
        let opts = RomOptions {
            single_qubit_route: SingleQubitRoute::ClosedForm,
            ..Default::default()
        };
        for (x, z) in [(0.8, 0.6), (0.3, 0.4), (-0.5, 0.7), (0.0, -1.0), (0.9, -0.2)] {
            let s = PauliVector::bloch(x, 0.0, z).unwrap();
            let r = rom_lp_with(&s, p1(), &opts).unwrap();
            check_invariants(&s, &r, p1());
            assert_abs_diff_eq!(r.value, rom_lp(&s, p1()).unwrap().value, epsilon = 1e-12);
        }
    }

    #[test]
    fn global_magic_of_product_and_bell_is_zero() {
        let a = PauliVector::bloch(0.6, 0.0, 0.7).unwrap();
        let b = h_state();
        let ab = tensor_product(&a, &b).unwrap();
        assert_abs_diff_eq!(global_magic(&ab, p2()).unwrap(), 0.0, epsilon = 1e-9);

        let mut c = vec![0.0; 16];
        c[0] = 1.0;
        c[pauli_index("XX").unwrap()] = 1.0;
        c[pauli_index("YY").unwrap()] = -1.0;
        c[pauli_index("ZZ").unwrap()] = 1.0;
        let bell = PauliVector::new(2, c).unwrap();
        let parts = global_magic_parts(&bell, p2()).unwrap();
        assert_abs_diff_eq!(parts.joint_rom, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(parts.product_rom, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(parts.global, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        assert!(matches!(rom_lp(&h_state(), p2()), Err(Error::QubitMismatch { .. })));
        assert!(matches!(global_magic(&h_state(), p2()), Err(Error::QubitMismatch { .. })));
    }
}
