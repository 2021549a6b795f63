//! Exact infinite-chain magnetizations and two-point correlators of the
//! transverse XY chain
//!
//! `H = −J Σ [(1+γ)/2 σˣσˣ + (1−γ)/2 σʸσʸ] − h Σ σᶻ`, with `λ = J/h`.
//!
//! All correlators derive from the integrals
//! `G_m = (1/π) ∫₀^π [cos mφ (1 + λ cos φ) − γλ sin mφ sin φ] w(φ) dφ` and
//! `⟨σᶻ⟩ = (1/π) ∫₀^π (1 + λ cos φ) w(φ) dφ`, where
//! `ω = √(γ²λ² sin²φ + (1 + λ cos φ)²)` and the weight is `1/ω` in the
//! ground state and `tanh(ω/T)/ω` at temperature `T` (units of `h`).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadOptions};
use crate::state::{pauli_index, PauliVector};

pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// One model point of the infinite chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub lambda: f64,
    pub gamma: f64,
    pub temperature: f64,
    /// Site separation `r` for two-point quantities.
    pub distance: usize,
    pub quad_tol: f64,
}

impl ChainParams {
    /// Ground state at nearest-neighbour distance.
    pub fn new(lambda: f64, gamma: f64) -> Self {
        ChainParams {
            lambda,
            gamma,
            temperature: 0.0,
            distance: 1,
            quad_tol: DEFAULT_QUAD_TOL,
        }
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn with_distance(mut self, distance: usize) -> Self {
        self.distance = distance;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_quad_tol(mut self, quad_tol: f64) -> Self {
        self.quad_tol = quad_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidParameter(what));
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad(format!("lambda must be finite and nonnegative, got {}", self.lambda));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return bad(format!("temperature must be finite and nonnegative, got {}", self.temperature));
        }
        if !(self.quad_tol.is_finite() && self.quad_tol > 0.0) {
            return bad(format!("quad_tol must be positive, got {}", self.quad_tol));
        }
        Ok(())
    }

    fn cache_key(&self, lo: i64, hi: i64) -> (u64, u64, u64, u64, i64, i64) {
        (
            self.lambda.to_bits(),
            self.gamma.to_bits(),
            self.temperature.to_bits(),
            self.quad_tol.to_bits(),
            lo,
            hi,
        )
    }
}

/// `G_m` for a contiguous index range plus `⟨σᶻ⟩`, from one quadrature pass.
#[derive(Debug, Clone, PartialEq)]
pub struct GTable {
    pub lo: i64,
    pub values: Vec<f64>,
    pub sz: f64,
    /// Largest per-component quadrature error estimate.
    pub err_estimate: f64,
}

impl GTable {
    pub fn get(&self, m: i64) -> f64 {
        self.values[(m - self.lo) as usize]
    }
}

type CacheKey = (u64, u64, u64, u64, i64, i64);
const CACHE_CAPACITY: usize = 8192;

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<GTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<GTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Interval breakpoints resolving the sharp features near `φ = π` (scale
/// `|λ−1|` and `T`) and the zero of `1 + λ cos φ`.
fn breakpoints(p: &ChainParams) -> Vec<f64> {
    let mut pts = vec![0.0, PI];
    if p.lambda > 1.0 {
        pts.push((-1.0 / p.lambda).acos());
    }
    for s in [(p.lambda - 1.0).abs(), p.temperature] {
        if s > 0.0 && s < 1.0 {
            let mut d = s;
            while d < 1.0 {
                pts.push(PI - d);
                d *= 4.0;
            }
        }
    }
    pts.retain(|x| (0.0..=PI).contains(x));
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    pts
}

/// Computes (or fetches) the table for `lo..=hi`.
pub fn g_table(params: &ChainParams, lo: i64, hi: i64) -> Result<Arc<GTable>> {
    params.validate()?;
    assert!(lo <= hi, "empty index range");
    let key = params.cache_key(lo, hi);
    if let Some(t) = cache().lock().expect("cache lock").get(&key) {
        return Ok(Arc::clone(t));
    }
    let table = Arc::new(compute_table(params, lo, hi)?);
    let mut guard = cache().lock().expect("cache lock");
    if guard.len() >= CACHE_CAPACITY {
        guard.clear();
    }
    // Insert-once: a racing thread computed an identical table.
    Ok(Arc::clone(guard.entry(key).or_insert(table)))
}

fn compute_table(p: &ChainParams, lo: i64, hi: i64) -> Result<GTable> {
    let n = (hi - lo + 1) as usize;
    let (lam, gam, t) = (p.lambda, p.gamma, p.temperature);
    let integrand = |phi: f64, out: &mut [f64]| {
        let (s, c) = phi.sin_cos();
        let a = 1.0 + lam * c;
        let b = gam * lam * s;
        let omega = (a * a + b * b).sqrt();
        let w = if t > 0.0 {
            if omega > 0.0 {
                (omega / t).tanh() / omega
            } else {
                1.0 / t
            }
        } else if omega > 0.0 {
            1.0 / omega
        } else {
            0.0
        };
        // (sin mφ, cos mφ) by rotation from m = lo.
        let (mut sm, mut cm) = ((lo as f64) * phi).sin_cos();
        for slot in out.iter_mut().take(n) {
            *slot = (cm * a - b * sm) * w / PI;
            let (sn, cn) = (sm * c + cm * s, cm * c - sm * s);
            sm = sn;
            cm = cn;
        }
        out[n] = a * w / PI;
    };
    let opts = QuadOptions {
        abs_tol: p.quad_tol,
        ..Default::default()
    };
    let r = quadrature::integrate(integrand, n + 1, &breakpoints(p), &opts)?;
    Ok(GTable {
        lo,
        sz: r.values[n],
        values: r.values[..n].to_vec(),
        err_estimate: r.max_error(),
    })
}

/// `G_index` at `params`.
pub fn g_r(params: &ChainParams, index: i64) -> Result<f64> {
    Ok(g_table(params, index, index)?.get(index))
}

/// `⟨σᶻ⟩`.
pub fn transverse_magnetization(params: &ChainParams) -> Result<f64> {
    Ok(g_table(params, 0, 0)?.sz)
}

/// Symmetry-broken ground-state `⟨σˣ⟩`, zero in the disordered phase.
pub fn order_parameter(params: &ChainParams) -> Result<f64> {
    params.validate()?;
    if params.temperature > 0.0 {
        return Err(Error::InvalidParameter(
            "order parameter is defined for the ground state only".into(),
        ));
    }
    Ok(order_parameter_formula(params.lambda, params.gamma))
}

fn order_parameter_formula(lambda: f64, gamma: f64) -> f64 {
    if lambda <= 1.0 {
        return 0.0;
    }
    let base = gamma * gamma * (1.0 - lambda.powi(-2));
    (2.0 / (1.0 + gamma)).sqrt() * base.powf(0.125)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

fn toeplitz_det(table: &GTable, r: usize, shift: i64) -> f64 {
    let m = DMatrix::from_fn(r, r, |i, j| table.get(i as i64 - j as i64 + shift));
    m.lu().determinant()
}

/// `⟨σ₀^α σ_r^α⟩` for `α ∈ {x, y}` as an `r × r` Toeplitz determinant.
pub fn toeplitz_correlator(params: &ChainParams, axis: Axis) -> Result<f64> {
    let r = require_distance(params)?;
    let table = g_table(params, -(r as i64), r as i64)?;
    Ok(match axis {
        Axis::X => toeplitz_det(&table, r, -1),
        Axis::Y => toeplitz_det(&table, r, 1),
    })
}

fn require_distance(params: &ChainParams) -> Result<usize> {
    if params.distance == 0 {
        return Err(Error::InvalidParameter("distance must be at least 1".into()));
    }
    Ok(params.distance)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSet {
    pub sx: f64,
    pub sz: f64,
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    /// `G_m` for `m = −r, …, r`.
    pub g_values: Vec<f64>,
    pub err_estimate: f64,
}

impl CorrelatorSet {
    pub fn g(&self, m: i64) -> f64 {
        let r = (self.g_values.len() as i64 - 1) / 2;
        self.g_values[(m + r) as usize]
    }
}

pub fn correlator_set(params: &ChainParams) -> Result<CorrelatorSet> {
    let r = require_distance(params)?;
    let ri = r as i64;
    let table = g_table(params, -ri, ri)?;
    let sx = if params.temperature > 0.0 {
        0.0
    } else {
        order_parameter_formula(params.lambda, params.gamma)
    };
    let sz = table.sz;
    Ok(CorrelatorSet {
        sx,
        sz,
        xx: toeplitz_det(&table, r, -1),
        yy: toeplitz_det(&table, r, 1),
        zz: sz * sz - table.get(ri) * table.get(-ri),
        g_values: table.values.clone(),
        err_estimate: table.err_estimate,
    })
}

/// Single-site state with Bloch vector `(⟨σˣ⟩, 0, ⟨σᶻ⟩)`; the positive
/// order-parameter branch is taken in the ordered ground state.
pub fn single_site_state(params: &ChainParams) -> Result<PauliVector> {
    let sz = transverse_magnetization(params)?;
    let sx = if params.temperature > 0.0 {
        0.0
    } else {
        order_parameter_formula(params.lambda, params.gamma)
    };
    PauliVector::bloch(sx, 0.0, sz)
}

/// Two-site state of the symmetric (unbroken) sector at separation `r`.
pub fn symmetric_two_site_state(params: &ChainParams) -> Result<PauliVector> {
    two_site_from_set(&correlator_set(params)?)
}

pub fn two_site_from_set(set: &CorrelatorSet) -> Result<PauliVector> {
    let mut c = vec![0.0; 16];
    let idx = |s: &str| pauli_index(s).expect("valid label");
    c[0] = 1.0;
    c[idx("IZ")] = set.sz;
    c[idx("ZI")] = set.sz;
    c[idx("XX")] = set.xx;
    c[idx("YY")] = set.yy;
    c[idx("ZZ")] = set.zz;
    PauliVector::new(2, c)
}
