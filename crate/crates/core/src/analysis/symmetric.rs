//! Two-site magic of the symmetric (unbroken) sector at zero and finite
//! temperature.

use serde::{Deserialize, Serialize};

use super::fit::{fit_log_divergence, fit_power_law, fit_tanh_power, log_space, ScalingFit, TanhPowerFit};
use super::single_site::bisect_onset;
use crate::correlators::{symmetric_two_site_state, ChainParams};
use crate::error::{Error, Result};
use crate::rom::{rom_lp, NONZERO_THRESHOLD};
use crate::stabilizer::StabilizerPolytope;

/// RoM of the symmetric two-site state at `params`.
pub fn two_site_rom(params: &ChainParams) -> Result<f64> {
    let rho = symmetric_two_site_state(params)?;
    Ok(rom_lp(&rho, StabilizerPolytope::cached(2)?)?.value)
}

/// Which side of the critical point a scan approaches from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `λ = 1 + x`.
    Ordered,
    /// `λ = 1 − x`.
    Disordered,
}

impl Side {
    pub fn lambda(self, x: f64) -> f64 {
        match self {
            Side::Ordered => 1.0 + x,
            Side::Disordered => 1.0 - x,
        }
    }
}

/// Centered `∂_λR` of the symmetric two-site state.
pub fn two_site_rom_derivative(params: &ChainParams, step: f64) -> Result<f64> {
    let up = two_site_rom(&params.with_lambda(params.lambda + step))?;
    let down = two_site_rom(&params.with_lambda(params.lambda - step))?;
    Ok((up - down) / (2.0 * step))
}

/// `∂_λR` against `ln|λ − 1|`; the slope is the log-divergence amplitude.
pub fn log_divergence(
    base: &ChainParams,
    side: Side,
    window: (f64, f64),
    n_points: usize,
) -> Result<(Vec<(f64, f64)>, ScalingFit)> {
    let samples = log_space(window.0, window.1, n_points)
        .into_iter()
        .map(|x| {
            let p = base.with_lambda(side.lambda(x));
            two_site_rom_derivative(&p, (x / 10.0).min(1e-4)).map(|d| (x, d))
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_log_divergence(&samples, window)?;
    Ok((samples, fit))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceScaling {
    /// `(r, slope)` per distance.
    pub slopes: Vec<(f64, f64)>,
    /// Fit of `|slope|` to `c1 tanh(c2 r) r^0.8`.
    pub fit: TanhPowerFit,
}

pub fn log_divergence_vs_distance(
    gamma: f64,
    distances: &[usize],
    side: Side,
    window: (f64, f64),
    n_points: usize,
) -> Result<DistanceScaling> {
    let slopes = distances
        .iter()
        .map(|&r| {
            let base = ChainParams::new(1.0, gamma).with_distance(r);
            log_divergence(&base, side, window, n_points).map(|(_, f)| (r as f64, f.exponent))
        })
        .collect::<Result<Vec<_>>>()?;
    let abs: Vec<(f64, f64)> = slopes.iter().map(|&(r, m)| (r, m.abs())).collect();
    let fit = fit_tanh_power(&abs, 0.8)?;
    Ok(DistanceScaling { slopes, fit })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MrpOptions {
    pub scan_start: f64,
    pub scan_stop: f64,
    pub scan_step: f64,
    pub resolution: f64,
    pub threshold: f64,
}

impl Default for MrpOptions {
    fn default() -> Self {
        MrpOptions {
            scan_start: 0.0,
            scan_stop: 2.0,
            scan_step: 0.01,
            resolution: 1e-7,
            threshold: NONZERO_THRESHOLD,
        }
    }
}

/// Lowest `λ` with nonzero ground-state two-site RoM at separation `r`:
/// a forward scan for the first magical grid point, then bisection.
pub fn mrp_locate(gamma: f64, r: usize, opts: &MrpOptions) -> Result<f64> {
    let base = ChainParams::new(opts.scan_start, gamma).with_distance(r);
    let f = |l: f64| two_site_rom(&base.with_lambda(l));
    let mut prev = opts.scan_start;
    if f(prev)? > opts.threshold {
        return Err(Error::NoSignChange {
            lo: prev,
            hi: prev,
        });
    }
    let mut k = 1;
    loop {
        let l = opts.scan_start + k as f64 * opts.scan_step;
        if l > opts.scan_stop {
            return Err(Error::NoSignChange {
                lo: opts.scan_start,
                hi: opts.scan_stop,
            });
        }
        if f(l)? > opts.threshold {
            let (_, above, _) = bisect_onset(f, prev, l, opts.threshold, opts.resolution)?;
            return Ok(above);
        }
        prev = l;
        k += 1;
    }
}

/// `λ_MRP − 1` against `ln r` over the given distances.
pub fn mrp_scaling(gamma: f64, distances: &[usize], opts: &MrpOptions) -> Result<(Vec<(f64, f64)>, ScalingFit)> {
    let samples = distances
        .iter()
        .map(|&r| mrp_locate(gamma, r, opts).map(|l| (r as f64, l - 1.0)))
        .collect::<Result<Vec<_>>>()?;
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let fit = fit_log_divergence(&samples, (lo, hi))?;
    Ok((samples, fit))
}

/// Two-site RoM along a temperature grid at fixed `λ`.
pub fn rom_vs_temperature(base: &ChainParams, temperatures: &[f64]) -> Result<Vec<f64>> {
    temperatures
        .iter()
        .map(|&t| two_site_rom(&base.with_temperature(t)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuddenDeathOptions {
    pub t_min: f64,
    pub t_max: f64,
    pub scan_points: usize,
    /// Relative resolution of the bisection.
    pub rel_resolution: f64,
    pub threshold: f64,
}

impl Default for SuddenDeathOptions {
    fn default() -> Self {
        SuddenDeathOptions {
            t_min: 1e-3,
            t_max: 20.0,
            scan_points: 60,
            rel_resolution: 1e-6,
            threshold: NONZERO_THRESHOLD,
        }
    }
}

/// Lowest temperature above which the two-site RoM vanishes.
pub fn sudden_death_temperature(base: &ChainParams, opts: &SuddenDeathOptions) -> Result<f64> {
    let grid = log_space(opts.t_min, opts.t_max, opts.scan_points);
    let f = |t: f64| two_site_rom(&base.with_temperature(t));
    if f(grid[0])? <= opts.threshold {
        return Err(Error::NoSignChange {
            lo: grid[0],
            hi: grid[0],
        });
    }
    for w in grid.windows(2) {
        if f(w[1])? <= opts.threshold {
            // Bisect for the last magical temperature.
            let (mut a, mut b) = (w[0], w[1]);
            while b - a > opts.rel_resolution * b {
                let m = 0.5 * (a + b);
                if f(m)? > opts.threshold {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Ok(0.5 * (a + b));
        }
    }
    Err(Error::NoSignChange {
        lo: opts.t_min,
        hi: opts.t_max,
    })
}

/// `T_c ∝ r^κ` over the given distances at `λ = 1`.
pub fn kappa_fit(gamma: f64, distances: &[usize], opts: &SuddenDeathOptions) -> Result<(Vec<(f64, f64)>, ScalingFit)> {
    let samples = distances
        .iter()
        .map(|&r| {
            let base = ChainParams::new(1.0, gamma).with_distance(r);
            sudden_death_temperature(&base, opts).map(|t| (r as f64, t))
        })
        .collect::<Result<Vec<_>>>()?;
    let lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let fit = fit_power_law(&samples, (lo, hi))?;
    Ok((samples, fit))
}

/// `∂_λR = c + ξ ln T` at `λ = 1`; slope `ξ`, offset `c`.
pub fn thermal_log_divergence(base: &ChainParams, window: (f64, f64), n_points: usize) -> Result<ScalingFit> {
    let samples = log_space(window.0, window.1, n_points)
        .into_iter()
        .map(|t| two_site_rom_derivative(&base.with_lambda(1.0).with_temperature(t), 1e-4).map(|d| (t, d)))
        .collect::<Result<Vec<_>>>()?;
    fit_log_divergence(&samples, window)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_slope_sign_flips_with_distance() {
        let near = ChainParams::new(1.0, 1.0).with_distance(1);
        let far = ChainParams::new(1.0, 1.0).with_distance(10);
        let (_, f1) = log_divergence(&near, Side::Ordered, (1e-3, 1e-1), 8).unwrap();
        let (_, f10) = log_divergence(&far, Side::Ordered, (1e-3, 1e-1), 8).unwrap();
        assert!(f1.exponent > 0.0, "{}", f1.exponent);
        assert!(f10.exponent < 0.0, "{}", f10.exponent);
    }

    #[test]
    fn mrp_increases_with_distance() {
        let opts = MrpOptions {
            resolution: 1e-5,
            ..Default::default()
        };
        let a = mrp_locate(1.0, 2, &opts).unwrap();
        let b = mrp_locate(1.0, 4, &opts).unwrap();
        let c = mrp_locate(1.0, 8, &opts).unwrap();
        assert!(a < b && b < c, "{a} {b} {c}");
    }

    #[test]
    fn thermal_magic_dies_and_weakens_with_distance() {
        let base = ChainParams::new(1.0, 1.0);
        let temps = log_space(1e-2, 3.0, 25);
        let r = rom_vs_temperature(&base.with_distance(2), &temps).unwrap();
        assert!(r.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let opts = SuddenDeathOptions {
            rel_resolution: 1e-4,
            ..Default::default()
        };
        let t2 = sudden_death_temperature(&base.with_distance(2), &opts).unwrap();
        let t5 = sudden_death_temperature(&base.with_distance(5), &opts).unwrap();
        assert!(t5 < t2, "{t5} {t2}");
        assert!(two_site_rom(&base.with_distance(2).with_temperature(1e6)).unwrap() <= NONZERO_THRESHOLD);
    }
}
