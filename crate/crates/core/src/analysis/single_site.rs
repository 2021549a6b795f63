//! Single-site magic of the symmetry-broken ground state.

use serde::{Deserialize, Serialize};

use super::fit::{fit_linear, fit_power_law, lin_space, log_space, ScalingFit};
use crate::correlators::{order_parameter, single_site_state, transverse_magnetization, ChainParams, DEFAULT_QUAD_TOL};
use crate::error::{Error, Result};
use crate::rom::{rom_lp, NONZERO_THRESHOLD};
use crate::stabilizer::StabilizerPolytope;
use crate::state::{fidelity, h_state};

/// Mean-field order-parameter exponent.
pub const BETA_X: f64 = 0.125;

/// Ground-state single-site RoM at `(λ, γ)`, solved by the LP.
pub fn single_site_rom(lambda: f64, gamma: f64, quad_tol: f64) -> Result<f64> {
    let params = ChainParams::new(lambda, gamma).with_quad_tol(quad_tol);
    let rho = single_site_state(&params)?;
    Ok(rom_lp(&rho, StabilizerPolytope::cached(1)?)?.value)
}

/// `1/√(1−γ²)`, where the broken-symmetry ground state is a product state.
pub fn fgs_point(gamma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "factorizing field is finite only for gamma in [0, 1), got {gamma}"
        )));
    }
    Ok(1.0 / (1.0 - gamma * gamma).sqrt())
}

/// Fidelity of the single-site ground state with the H state.
pub fn h_state_fidelity(lambda: f64, gamma: f64) -> Result<f64> {
    let rho = single_site_state(&ChainParams::new(lambda, gamma))?;
    fidelity(&rho, &h_state())
}

/// Smallest `x` in `[lo, hi]` with `f(x) > threshold`, to `resolution`,
/// assuming a single onset. Returns `(below, above, evaluations)`.
pub fn bisect_onset<F>(mut f: F, lo: f64, hi: f64, threshold: f64, resolution: f64) -> Result<(f64, f64, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut evals = 2;
    if f(lo)? > threshold || f(hi)? <= threshold {
        return Err(Error::NoSignChange { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > resolution {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        evals += 1;
        if f(m)? > threshold {
            b = m;
        } else {
            a = m;
        }
    }
    Ok((a, b, evals))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MppOptions {
    /// Search bracket; defaults to `(1, min(λ_FGS, 1.13))`.
    pub bracket: Option<(f64, f64)>,
    pub resolution: f64,
    pub threshold: f64,
    pub quad_tol: f64,
}

impl Default for MppOptions {
    fn default() -> Self {
        MppOptions {
            bracket: None,
            resolution: 1e-6,
            threshold: NONZERO_THRESHOLD,
            quad_tol: DEFAULT_QUAD_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MppResult {
    pub gamma: f64,
    pub lambda: f64,
    /// Last point with zero magic and first point with nonzero magic.
    pub below: f64,
    pub above: f64,
    pub evaluations: usize,
}

fn default_bracket(gamma: f64) -> (f64, f64) {
    let hi = fgs_point(gamma).map(|l| l.min(1.13)).unwrap_or(1.13);
    (1.0, hi)
}

/// Onset of single-site magic in the ordered phase.
pub fn mpp_locate(gamma: f64, opts: &MppOptions) -> Result<MppResult> {
    let (lo, hi) = opts.bracket.unwrap_or_else(|| default_bracket(gamma));
    let (below, above, evaluations) = bisect_onset(
        |l| single_site_rom(l, gamma, opts.quad_tol),
        lo,
        hi,
        opts.threshold,
        opts.resolution,
    )?;
    Ok(MppResult {
        gamma,
        lambda: 0.5 * (below + above),
        below,
        above,
        evaluations,
    })
}

/// Golden-section maximum of `f` on `[lo, hi]`; errors if it sits at an end.
pub fn golden_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    if x - lo < 10.0 * tol || hi - x < 10.0 * tol {
        return Err(Error::PeakOnBoundary { at: x });
    }
    Ok((x, f(x)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RomPeak {
    pub gamma: f64,
    pub lambda: f64,
    pub value: f64,
}

/// Maximum of single-site RoM over `λ ∈ (λ_c*, 3]`.
pub fn rom_peak(gamma: f64, quad_tol: f64) -> Result<RomPeak> {
    let mpp = mpp_locate(gamma, &MppOptions::default())?;
    let (lambda, value) = golden_max(|l| single_site_rom(l, gamma, quad_tol), mpp.above, 3.0, 1e-7)?;
    Ok(RomPeak { gamma, lambda, value })
}

/// Centered difference of single-site RoM in `λ`.
pub fn single_site_rom_derivative(lambda: f64, gamma: f64, step: f64) -> Result<f64> {
    let up = single_site_rom(lambda + step, gamma, DEFAULT_QUAD_TOL)?;
    let down = single_site_rom(lambda - step, gamma, DEFAULT_QUAD_TOL)?;
    Ok((up - down) / (2.0 * step))
}

/// Power law of `∂_λR` against `λ − origin` in the ordered phase; the
/// divergence exponent is `−exponent`.
pub fn derivative_exponent(
    gamma: f64,
    origin: f64,
    window: (f64, f64),
    n_points: usize,
) -> Result<(Vec<(f64, f64)>, ScalingFit)> {
    let samples = log_space(window.0, window.1, n_points)
        .into_iter()
        .map(|x| single_site_rom_derivative(origin + x, gamma, (x / 10.0).min(1e-4)).map(|d| (x, d)))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_power_law(&samples, window)?;
    Ok((samples, fit))
}

/// `⟨σᶻ⟩_c − ⟨σᶻ⟩(λ)` against `λ − 1` in the ordered phase. The exponent
/// is the transverse-magnetization exponent and the prefactor is `|K_z|`.
pub fn beta_z_fit(gamma: f64, window: (f64, f64), n_points: usize) -> Result<ScalingFit> {
    let at_critical = transverse_magnetization(&ChainParams::new(1.0, gamma))?;
    let samples = log_space(window.0, window.1, n_points)
        .into_iter()
        .map(|x| transverse_magnetization(&ChainParams::new(1.0 + x, gamma)).map(|s| (x, at_critical - s)))
        .collect::<Result<Vec<_>>>()?;
    fit_power_law(&samples, window)
}

/// `⟨σˣ⟩` against `λ − 1`; the prefactor is `K_x`.
pub fn order_parameter_fit(gamma: f64, window: (f64, f64), n_points: usize) -> Result<ScalingFit> {
    let samples = log_space(window.0, window.1, n_points)
        .into_iter()
        .map(|x| order_parameter(&ChainParams::new(1.0 + x, gamma)).map(|s| (x, s)))
        .collect::<Result<Vec<_>>>()?;
    fit_power_law(&samples, window)
}

/// `δλ_c = λ_c* − 1` for each `γ`, with a power-law fit over the `γ` range.
pub fn delta_lambda_c_scaling(gammas: &[f64], opts: &MppOptions) -> Result<(Vec<(f64, f64)>, ScalingFit)> {
    let samples = gammas
        .iter()
        .map(|&g| mpp_locate(g, opts).map(|m| (g, m.lambda - 1.0)))
        .collect::<Result<Vec<_>>>()?;
    let lo = gammas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = gammas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let fit = fit_power_law(&samples, (lo, hi))?;
    Ok((samples, fit))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMppCheck {
    pub gamma: f64,
    pub lambda_c_star: f64,
    pub delta_lambda_c: f64,
    /// `R` against `λ − λ_c*` on `(0, δλ_c/10]`.
    pub fit: ScalingFit,
    pub k_x: f64,
    pub k_z: f64,
    pub beta_z: f64,
    /// `K_x β_x δλ_c^{β_x−1} + K_z β_z δλ_c^{β_z−1}`.
    pub predicted_slope: f64,
}

/// Linear rise of single-site RoM just above the MPP, compared against the
/// slope implied by independent power-law fits of both magnetizations
/// around `λ − 1 = δλ_c`.
pub fn linear_mpp_scaling_check(gamma: f64) -> Result<LinearMppCheck> {
    let mpp = mpp_locate(
        gamma,
        &MppOptions {
            resolution: 1e-13,
            ..Default::default()
        },
    )?;
    let lc = mpp.lambda;
    let delta = lc - 1.0;
    let samples = lin_space(delta / 200.0, delta / 10.0, 20)
        .into_iter()
        .map(|x| single_site_rom(lc + x, gamma, DEFAULT_QUAD_TOL).map(|r| (x, r)))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_linear(&samples, (0.0, delta / 10.0))?;

    let local = (delta / 10.0, delta * 10.0);
    let sx = order_parameter_fit(gamma, local, 15)?;
    let sz = beta_z_fit(gamma, local, 15)?;
    let k_x = sx.prefactor;
    let k_z = -sz.prefactor;
    let predicted_slope =
        k_x * BETA_X * delta.powf(BETA_X - 1.0) + k_z * sz.exponent * delta.powf(sz.exponent - 1.0);
    Ok(LinearMppCheck {
        gamma,
        lambda_c_star: lc,
        delta_lambda_c: delta,
        fit,
        k_x,
        k_z,
        beta_z: sz.exponent,
        predicted_slope,
    })
}
