//! Exact diagonalization of finite open XY chains.
//!
//! `H = −λ Σ_i [(1+γ)/2 σˣ_iσˣ_{i+1} + (1−γ)/2 σʸ_iσʸ_{i+1}] − Σ_i σᶻ_i − Σ_i h_i σˣ_i`
//! in units of the transverse field. Basis index bit `k` is site `k`, with
//! a clear bit meaning spin up along `z`. The Hamiltonian is applied
//! matrix-free; every off-diagonal element is nonpositive, so the ground
//! state has a nonnegative amplitude vector.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lanczos::{self, dot, Eigenpair, LanczosOptions, SymmetricOperator};
use crate::state::{pauli_coefficients, PauliVector};

pub const MIN_SITES: usize = 2;
pub const MAX_SITES: usize = 20;
pub const DEFAULT_SB_FIELD: f64 = 1e-6;
pub const DEFAULT_EIG_TOL: f64 = 1e-8;
/// End-site field of [`FiniteChainSpec::pinned`].
pub const PINNING_FIELD: f64 = 0.05;

/// Where the longitudinal symmetry-breaking field acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldProfile {
    /// `sb_field` on every site.
    #[default]
    Uniform,
    /// `sb_field` on the two end sites only.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteChainSpec {
    pub n_sites: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub sb_field: f64,
    pub profile: FieldProfile,
    pub eig_tol: f64,
}

impl FiniteChainSpec {
    /// Uniform weak symmetry-breaking field.
    pub fn new(n_sites: usize, lambda: f64, gamma: f64) -> Self {
        FiniteChainSpec {
            n_sites,
            lambda,
            gamma,
            sb_field: DEFAULT_SB_FIELD,
            profile: FieldProfile::Uniform,
            eig_tol: DEFAULT_EIG_TOL,
        }
    }

    /// Order pinned by a weak longitudinal field on both end sites.
    pub fn pinned(n_sites: usize, lambda: f64, gamma: f64) -> Self {
        FiniteChainSpec {
            sb_field: PINNING_FIELD,
            profile: FieldProfile::Boundary,
            ..Self::new(n_sites, lambda, gamma)
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_sb_field(mut self, sb_field: f64) -> Self {
        self.sb_field = sb_field;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(MIN_SITES..=MAX_SITES).contains(&self.n_sites) {
            return bad(format!("n_sites must lie in [{MIN_SITES}, {MAX_SITES}], got {}", self.n_sites));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad(format!("lambda must be finite and nonnegative, got {}", self.lambda));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        if !(self.sb_field.is_finite() && self.sb_field >= 0.0) {
            return bad(format!("sb_field must be nonnegative, got {}", self.sb_field));
        }
        if !(self.eig_tol.is_finite() && self.eig_tol > 0.0) {
            return bad(format!("eig_tol must be positive, got {}", self.eig_tol));
        }
        Ok(())
    }

    /// 0-based index of the central site.
    pub fn center(&self) -> usize {
        (self.n_sites - 1) / 2
    }

    /// Sites `(i, i + r)` placed as symmetrically as possible about the middle.
    pub fn central_pair(&self, r: usize) -> Result<(usize, usize)> {
        if r == 0 || r >= self.n_sites {
            return Err(Error::InvalidParameter(format!(
                "pair separation {r} does not fit in {} sites",
                self.n_sites
            )));
        }
        let i = (self.n_sites - 1 - r) / 2;
        Ok((i, i + r))
    }

    fn field_on(&self, site: usize) -> f64 {
        match self.profile {
            FieldProfile::Uniform => self.sb_field,
            FieldProfile::Boundary if site == 0 || site + 1 == self.n_sites => self.sb_field,
            FieldProfile::Boundary => 0.0,
        }
    }
}

/// Matrix-free Hamiltonian.
pub struct ChainHamiltonian {
    n: usize,
    /// Bond amplitudes for aligned and anti-aligned neighbours.
    aligned: f64,
    anti: f64,
    fields: Vec<(usize, f64)>,
}

impl ChainHamiltonian {
    pub fn new(spec: &FiniteChainSpec) -> Result<Self> {
        spec.validate()?;
        let fields = (0..spec.n_sites)
            .map(|k| (1usize << k, -spec.field_on(k)))
            .filter(|&(_, h)| h != 0.0)
            .collect();
        Ok(ChainHamiltonian {
            n: spec.n_sites,
            aligned: -spec.lambda * spec.gamma,
            anti: -spec.lambda,
            fields,
        })
    }

    fn row(&self, x: usize, v: &[f64]) -> f64 {
        let n = self.n;
        let diag = -(n as f64 - 2.0 * x.count_ones() as f64);
        let mut acc = diag * v[x];
        for i in 0..n - 1 {
            let mask = 3usize << i;
            let bits = (x & mask) >> i;
            let amp = if bits == 0 || bits == 3 { self.aligned } else { self.anti };
            acc += amp * v[x ^ mask];
        }
        for &(bit, h) in &self.fields {
            acc += h * v[x ^ bit];
        }
        acc
    }

    /// Dense matrix, for small-chain checks.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        let mut e = vec![0.0; d];
        for j in 0..d {
            e[j] = 1.0;
            for i in 0..d {
                m[(i, j)] = self.row(i, &e);
            }
            e[j] = 0.0;
        }
        m
    }
}

impl SymmetricOperator for ChainHamiltonian {
    fn dim(&self) -> usize {
        1 << self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        // Each output entry is an independent gather, so the result does
        // not depend on how rows are split across threads.
        const CHUNK: usize = 1 << 12;
        let n = self.n;
        let amps = [self.aligned, self.anti, self.anti, self.aligned];
        y.par_chunks_mut(CHUNK).enumerate().for_each(|(c, out)| {
            let base = c * CHUNK;
            let len = out.len();
            let xs = &x[base..base + len];
            for (k, (yk, xk)) in out.iter_mut().zip(xs).enumerate() {
                *yk = -(n as f64 - 2.0 * (base + k).count_ones() as f64) * xk;
            }
            // Bond by bond, so partner reads are sequential within a chunk.
            for i in 0..n - 1 {
                let mask = 3usize << i;
                for (k, yk) in out.iter_mut().enumerate() {
                    let xi = base + k;
                    *yk += amps[(xi >> i) & 3] * x[xi ^ mask];
                }
            }
            for &(bit, h) in &self.fields {
                for (k, yk) in out.iter_mut().enumerate() {
                    *yk += h * x[(base + k) ^ bit];
                }
            }
        });
    }
}

/// Ground state of a finite chain.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub spec: FiniteChainSpec,
    pub energy: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub matvecs: usize,
    /// Whether the lowest two levels were resolved as a degenerate pair.
    pub degenerate_pair: bool,
}

fn start_vector(dim: usize) -> Vec<f64> {
    // Positive with a seeded random perturbation so that it overlaps every
    // low-lying level, including ones orthogonal to the uniform vector.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..dim).map(|_| 1.0 + 0.5 * rng.random_range(-1.0..1.0)).collect()
}

/// Lowest eigenvector, resolved into the positive-`⟨σˣ⟩` branch when the
/// two lowest levels are degenerate within `10 · eig_tol`.
pub fn ground_state(spec: &FiniteChainSpec) -> Result<GroundState> {
    let h = ChainHamiltonian::new(spec)?;
    let opts = LanczosOptions {
        tol: spec.eig_tol,
        ..Default::default()
    };
    let start = start_vector(h.dim());
    let first = lanczos::lowest_eigenpair(&h, &start, &[], &opts)?;
    let mut out = GroundState {
        spec: *spec,
        energy: first.value,
        residual: first.residual,
        matvecs: first.matvecs,
        vector: first.vector,
        degenerate_pair: false,
    };
    // A boundary pin splits the pair explicitly; only a uniform weak field
    // can leave it degenerate.
    if spec.lambda > 1.0 && spec.profile == FieldProfile::Uniform && h.dim() > 1 {
        let second = lanczos::lowest_eigenpair(&h, &start, &[&out.vector], &opts)?;
        out.matvecs += second.matvecs;
        if (second.value - out.energy).abs() < 10.0 * spec.eig_tol {
            resolve_pair(&mut out, second, spec.center());
        }
    }
    Ok(out)
}

fn resolve_pair(gs: &mut GroundState, second: Eigenpair, site: usize) {
    let bit = 1usize << site;
    let sx = |a: &[f64], b: &[f64]| -> f64 { (0..a.len()).map(|x| a[x] * b[x ^ bit]).sum() };
    let (v1, v2) = (&gs.vector, &second.vector);
    let m = nalgebra::Matrix2::new(sx(v1, v1), sx(v1, v2), sx(v2, v1), sx(v2, v2));
    let eig = nalgebra::SymmetricEigen::new(m);
    let k = if eig.eigenvalues[0] >= eig.eigenvalues[1] { 0 } else { 1 };
    let (c1, c2) = (eig.eigenvectors[(0, k)], eig.eigenvectors[(1, k)]);
    let mut v: Vec<f64> = v1.iter().zip(v2).map(|(a, b)| c1 * a + c2 * b).collect();
    let nv = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= nv);
    if sx(&v, &v) < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    gs.vector = v;
    gs.energy = c1 * c1 * gs.energy + c2 * c2 * second.value;
    gs.residual = gs.residual.max(second.residual);
    gs.degenerate_pair = true;
}

/// Ground energy and vector by dense diagonalization (N ≤ 12).
pub fn dense_ground_state(spec: &FiniteChainSpec) -> Result<(f64, Vec<f64>)> {
    if spec.n_sites > 12 {
        return Err(Error::InvalidParameter("dense diagonalization limited to 12 sites".into()));
    }
    let h = ChainHamiltonian::new(spec)?;
    let eig = SymmetricEigen::new(h.to_dense());
    let k = (0..eig.eigenvalues.len())
        .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
        .expect("nonempty");
    Ok((eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect()))
}

impl GroundState {
    /// Exact reduced density matrix of one site or an ordered pair of sites.
    pub fn reduced_density(&self, sites: &[usize]) -> Result<PauliVector> {
        let n = self.spec.n_sites;
        if sites.is_empty() || sites.len() > 2 || sites.iter().any(|&s| s >= n) {
            return Err(Error::InvalidParameter(format!("invalid site selection {sites:?} for {n} sites")));
        }
        if sites.len() == 2 && sites[0] == sites[1] {
            return Err(Error::InvalidParameter("sites must be distinct".into()));
        }
        let k = sites.len();
        let d = 1usize << k;
        // Local index with sites[0] as the most significant qubit.
        let local = |x: usize| -> usize { sites.iter().fold(0, |acc, &s| (acc << 1) | ((x >> s) & 1)) };
        let place = |x: usize, l: usize| -> usize {
            sites.iter().enumerate().fold(x, |acc, (p, &s)| {
                let b = (l >> (k - 1 - p)) & 1;
                (acc & !(1 << s)) | (b << s)
            })
        };
        let mut rho = vec![0.0; d * d];
        let v = &self.vector;
        for x in 0..v.len() {
            if v[x] == 0.0 {
                continue;
            }
            let a = local(x);
            for b in 0..d {
                rho[a * d + b] += v[x] * v[place(x, b)];
            }
        }
        let m = DMatrix::from_fn(d, d, |i, j| Complex64::new(rho[i * d + j], 0.0));
        let mut coeffs = pauli_coefficients(&m);
        // Renormalize away the rounding in the vector's norm.
        let trace = coeffs[0];
        coeffs.iter_mut().for_each(|c| *c /= trace);
        // The vector is real, so every odd-Y coefficient vanishes exactly.
        for c in coeffs.iter_mut() {
            if c.abs() < 1e-15 {
                *c = 0.0;
            }
        }
        PauliVector::with_tolerance(k, coeffs, 1e-10)
    }

    /// `⟨σˣ⟩` on one site.
    pub fn sigma_x(&self, site: usize) -> f64 {
        let bit = 1usize << site;
        let v = &self.vector;
        (0..v.len()).map(|x| v[x] * v[x ^ bit]).sum()
    }

    /// `⟨σᶻ⟩` on one site.
    pub fn sigma_z(&self, site: usize) -> f64 {
        let v = &self.vector;
        (0..v.len())
            .map(|x| if (x >> site) & 1 == 0 { v[x] * v[x] } else { -v[x] * v[x] })
            .sum()
    }
}

/// Result of locating the peak of `d⟨σˣ⟩/dλ` at the central site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativePeak {
    pub lambda_c: f64,
    pub lambdas: Vec<f64>,
    pub order_parameter: Vec<f64>,
    pub derivative: Vec<f64>,
}

/// Finite-size critical point from a central-difference scan of the
/// central-site order parameter, refined by a parabola through the
/// maximum and its neighbours.
pub fn order_parameter_derivative_peak(base: &FiniteChainSpec, lambdas: &[f64]) -> Result<DerivativePeak> {
    if lambdas.len() < 5 || lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("need at least 5 increasing grid points".into()));
    }
    let c = base.center();
    let sx: Vec<f64> = lambdas
        .iter()
        .map(|&l| ground_state(&base.with_lambda(l)).map(|g| g.sigma_x(c).abs()))
        .collect::<Result<_>>()?;
    order_parameter_peak_from_samples(lambdas, &sx)
}

pub fn order_parameter_peak_from_samples(lambdas: &[f64], sx: &[f64]) -> Result<DerivativePeak> {
    let n = lambdas.len();
    let mut d = vec![f64::NAN; n];
    for i in 1..n - 1 {
        d[i] = (sx[i + 1] - sx[i - 1]) / (lambdas[i + 1] - lambdas[i - 1]);
    }
    let k = (1..n - 1).max_by(|&a, &b| d[a].total_cmp(&d[b])).expect("interior points");
    if k == 1 || k == n - 2 {
        return Err(Error::PeakOnBoundary { at: lambdas[k] });
    }
    let (x0, x1, x2) = (lambdas[k - 1], lambdas[k], lambdas[k + 1]);
    let (y0, y1, y2) = (d[k - 1], d[k], d[k + 1]);
    let denom = (x0 - x1) * (x0 - x2) * (x1 - x2);
    let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom;
    let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / denom;
    let lambda_c = if a < 0.0 { (-b / (2.0 * a)).clamp(x0, x2) } else { x1 };
    Ok(DerivativePeak {
        lambda_c,
        lambdas: lambdas.to_vec(),
        order_parameter: sx.to_vec(),
        derivative: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlators::{transverse_magnetization, ChainParams};
    use crate::state::{partial_trace, Site};
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_site_energy_matches_closed_form() {
        // Ising pair: H = −λ XX − Z₁ − Z₂, lowest level −√(4 + λ²).
        for lam in [0.3, 1.0, 2.5] {
            let spec = FiniteChainSpec::new(2, lam, 1.0).with_sb_field(0.0);
            let gs = ground_state(&spec).unwrap();
            assert_abs_diff_eq!(gs.energy, -(4.0 + lam * lam).sqrt(), epsilon = 1e-10);
        }
    }

    #[test]
    fn field_only_chain_is_polarized() {
        let spec = FiniteChainSpec::new(8, 0.0, 1.0).with_sb_field(0.0);
        let gs = ground_state(&spec).unwrap();
        assert_abs_diff_eq!(gs.energy, -8.0, epsilon = 1e-10);
        let rho = gs.reduced_density(&[spec.center()]).unwrap();
        assert_abs_diff_eq!(rho.get("Z").unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn lanczos_matches_dense() {
        for (n, lam, gamma) in [(6, 0.7, 1.0), (8, 1.0, 0.5), (10, 1.4, 0.8)] {
            let spec = FiniteChainSpec::new(n, lam, gamma);
            let (e, _) = dense_ground_state(&spec).unwrap();
            let h = ChainHamiltonian::new(&spec).unwrap();
            let opts = LanczosOptions {
                tol: spec.eig_tol,
                ..Default::default()
            };
            let lz = lanczos::lowest_eigenpair(&h, &start_vector(1 << n), &[], &opts).unwrap();
            assert_abs_diff_eq!(lz.value, e, epsilon = 1e-9);
        }
    }

    #[test]
    fn ordered_chain_has_positive_order_parameter() {
        let spec = FiniteChainSpec::new(10, 2.0, 1.0);
        let gs = ground_state(&spec).unwrap();
        assert!(gs.sigma_x(spec.center()) > 0.0);
        let pinned = FiniteChainSpec::pinned(10, 2.0, 1.0);
        let gs = ground_state(&pinned).unwrap();
        assert!(gs.sigma_x(pinned.center()) > 0.8);
    }

    #[test]
    fn reduced_states_are_consistent() {
        let spec = FiniteChainSpec::pinned(8, 1.5, 1.0);
        let gs = ground_state(&spec).unwrap();
        let (i, j) = spec.central_pair(1).unwrap();
        let pair = gs.reduced_density(&[i, j]).unwrap();
        let one_i = gs.reduced_density(&[i]).unwrap();
        let one_j = gs.reduced_density(&[j]).unwrap();
        let left = partial_trace(&pair, Site::First).unwrap();
        let right = partial_trace(&pair, Site::Second).unwrap();
        for a in 0..4 {
            assert_abs_diff_eq!(left.coeffs()[a], one_i.coeffs()[a], epsilon = 1e-10);
            assert_abs_diff_eq!(right.coeffs()[a], one_j.coeffs()[a], epsilon = 1e-10);
        }
        assert_abs_diff_eq!(one_i.get("X").unwrap(), gs.sigma_x(i), epsilon = 1e-12);
        assert_abs_diff_eq!(one_i.get("Z").unwrap(), gs.sigma_z(i), epsilon = 1e-12);
        // Broken symmetry shows up as a longitudinal-transverse cross term.
        assert!(pair.get("XZ").unwrap().abs() > 1e-3);
    }

    #[test]
    fn matches_dense_reduced_state() {
        let spec = FiniteChainSpec::new(8, 0.6, 0.7).with_sb_field(0.0);
        let gs = ground_state(&spec).unwrap();
        let (_, v) = dense_ground_state(&spec).unwrap();
        let dense = GroundState {
            vector: v,
            ..gs.clone()
        };
        let a = gs.reduced_density(&[3, 5]).unwrap();
        let b = dense.reduced_density(&[3, 5]).unwrap();
        for k in 0..16 {
            assert_abs_diff_eq!(a.coeffs()[k], b.coeffs()[k], epsilon = 1e-7);
        }
    }

    #[test]
    fn center_matches_infinite_chain() {
        let spec = FiniteChainSpec::new(16, 0.5, 1.0);
        let gs = ground_state(&spec).unwrap();
        let inf = transverse_magnetization(&ChainParams::new(0.5, 1.0)).unwrap();
        assert_abs_diff_eq!(gs.sigma_z(spec.center()), inf, epsilon = 1e-3);
    }

    #[test]
    fn peak_refinement_on_synthetic_data() {
        let lambdas: Vec<f64> = (0..41).map(|i| 0.8 + 0.0125 * i as f64).collect();
        let sx: Vec<f64> = lambdas.iter().map(|&l| 0.5 * (1.0 + ((l - 0.93) / 0.05).tanh())).collect();
        let peak = order_parameter_peak_from_samples(&lambdas, &sx).unwrap();
        assert!((peak.lambda_c - 0.93).abs() < 2e-3, "{}", peak.lambda_c);

        let edge: Vec<f64> = lambdas.iter().map(|&l| l * l).collect();
        assert!(matches!(
            order_parameter_peak_from_samples(&lambdas, &edge),
            Err(Error::PeakOnBoundary { .. })
        ));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(ground_state(&FiniteChainSpec::new(21, 1.0, 1.0)).is_err());
        assert!(ground_state(&FiniteChainSpec::new(6, 1.0, 1.2)).is_err());
        assert!(FiniteChainSpec::new(6, 1.0, 1.0).central_pair(6).is_err());
    }
}
