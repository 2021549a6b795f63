//! Finite-temperature crossover map of the symmetric two-site RoM around
//! the critical point.
//!
//! Every derivative is taken by an explicit centered stencil around the
//! cell, so the grids only set where derivatives are sampled, never the
//! step. Each stencil is repeated at half the step and the relative
//! disagreement is reported per cell.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::slope_through_origin;
use super::symmetric::two_site_rom;
use crate::correlators::ChainParams;
use crate::error::{Error, Result};
use crate::rom::NONZERO_THRESHOLD;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossoverOptions {
    /// Step for `∂_λR`.
    pub lambda_step: f64,
    /// Upper bound on the step for `∂_TR`; the step is also kept below
    /// `T/10` so the stencil never reaches `T ≤ 0`.
    pub temperature_step: f64,
    /// Steps for the mixed derivative (larger, since the stencil divides
    /// by the product of both).
    pub mixed_step: f64,
    /// Largest tolerated step-halving disagreement before the map is
    /// rejected as too coarse.
    pub max_disagreement: f64,
    /// Disagreements are measured relative to `max(|d|, floor·max|d|)`.
    pub relative_floor: f64,
}

impl Default for CrossoverOptions {
    fn default() -> Self {
        CrossoverOptions {
            lambda_step: 1e-4,
            temperature_step: 1e-4,
            mixed_step: 1e-3,
            max_disagreement: 0.10,
            relative_floor: 1e-2,
        }
    }
}

/// One `(λ, T)` cell. Derivatives are `None` when the stencil touches the
/// zero-magic region, where `R` has a kink.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub lambda: f64,
    pub temperature: f64,
    pub rom: f64,
    pub d_lambda: Option<f64>,
    pub d_temperature: Option<f64>,
    pub d_mixed: Option<f64>,
    /// Step-halving disagreement per derivative, in the order above.
    pub halving: [Option<f64>; 3],
}

impl Cell {
    /// `|∂_TR| / |∂_λR|`.
    pub fn gruneisen(&self) -> Option<f64> {
        match (self.d_temperature, self.d_lambda) {
            (Some(t), Some(l)) if l != 0.0 => Some(t.abs() / l.abs()),
            _ => None,
        }
    }
}

/// Crossover line `T = slope · |λ − 1|` through per-column extrema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverLine {
    pub slope: f64,
    /// `(|λ − 1|, T)` per column where an interior extremum was found.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossoverMap {
    pub gamma: f64,
    pub distance: usize,
    pub lambdas: Vec<f64>,
    pub temperatures: Vec<f64>,
    /// Row-major, `cells[i * temperatures.len() + j]` for `(λ_i, T_j)`.
    pub cells: Vec<Cell>,
    /// Lowest-temperature maxima of `|∂_TR|` along `T`.
    pub t_star: CrossoverLine,
    /// Lowest-temperature extrema of `|∂_T∂_λR|` along `T`.
    pub t_mixed: CrossoverLine,
    /// Median `|∂_TR|/|∂_λR|` over magical cells with `T > |λ − 1|`.
    pub fan_gruneisen_median: f64,
    /// Largest step-halving disagreement over all reported derivatives.
    pub max_halving_disagreement: f64,
}

impl CrossoverMap {
    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[i * self.temperatures.len() + j]
    }
}

struct Stencil<'a> {
    base: &'a ChainParams,
}

impl Stencil<'_> {
    fn rom(&self, lambda: f64, t: f64) -> Result<f64> {
        two_site_rom(&self.base.with_lambda(lambda).with_temperature(t))
    }

    /// `f(+h) − f(−h)` over `2h`, or `None` if any sample is nonmagical.
    fn centered(&self, f: impl Fn(f64) -> Result<f64>, h: f64) -> Result<Option<f64>> {
        let (up, down) = (f(h)?, f(-h)?);
        if up <= NONZERO_THRESHOLD || down <= NONZERO_THRESHOLD {
            return Ok(None);
        }
        Ok(Some((up - down) / (2.0 * h)))
    }

    fn d_lambda(&self, l: f64, t: f64, h: f64) -> Result<Option<f64>> {
        self.centered(|s| self.rom(l + s, t), h)
    }

    fn d_temperature(&self, l: f64, t: f64, h: f64) -> Result<Option<f64>> {
        self.centered(|s| self.rom(l, t + s), h)
    }

    fn d_mixed(&self, l: f64, t: f64, hl: f64, ht: f64) -> Result<Option<f64>> {
        let mut corners = [0.0; 4];
        for (k, (sl, st)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].into_iter().enumerate() {
            corners[k] = self.rom(l + sl * hl, t + st * ht)?;
            if corners[k] <= NONZERO_THRESHOLD {
                return Ok(None);
            }
        }
        Ok(Some((corners[0] - corners[1] - corners[2] + corners[3]) / (4.0 * hl * ht)))
    }
}

fn raw_cell(base: &ChainParams, l: f64, t: f64, opts: &CrossoverOptions) -> Result<(Cell, [Option<f64>; 3])> {
    let s = Stencil { base };
    let ht = opts.temperature_step.min(t / 10.0);
    let hm_t = opts.mixed_step.min(t / 10.0);
    let rom = s.rom(l, t)?;
    let d_lambda = s.d_lambda(l, t, opts.lambda_step)?;
    let d_temperature = s.d_temperature(l, t, ht)?;
    let d_mixed = s.d_mixed(l, t, opts.mixed_step, hm_t)?;
    let halved = [
        s.d_lambda(l, t, opts.lambda_step / 2.0)?,
        s.d_temperature(l, t, ht / 2.0)?,
        s.d_mixed(l, t, opts.mixed_step / 2.0, hm_t / 2.0)?,
    ];
    let cell = Cell {
        lambda: l,
        temperature: t,
        rom,
        d_lambda,
        d_temperature,
        d_mixed,
        halving: [None; 3],
    };
    Ok((cell, halved))
}

/// Position of the first strictly interior local maximum of `values`,
/// refined by a parabola through its neighbours.
fn interior_peak(xs: &[f64], values: &[Option<f64>]) -> Option<f64> {
    let k = (1..values.len().saturating_sub(1)).find(|&k| {
        matches!((values[k - 1], values[k], values[k + 1]), (Some(a), Some(b), Some(c)) if b > a && b >= c)
    })?;
    let (a, b, c) = (values[k - 1]?, values[k]?, values[k + 1]?);
    let (x0, x1, x2) = (xs[k - 1], xs[k], xs[k + 1]);
    // Vertex of the parabola through three (possibly uneven) points.
    let num = (x1 - x0).powi(2) * (b - c) - (x1 - x2).powi(2) * (b - a);
    let den = (x1 - x0) * (b - c) - (x1 - x2) * (b - a);
    if den == 0.0 {
        return Some(x1);
    }
    Some((x1 - 0.5 * num / den).clamp(x0, x2))
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Builds the map on the `lambdas × temperatures` lattice for the
/// symmetric two-site state at separation `distance`.
pub fn crossover_map(
    gamma: f64,
    distance: usize,
    lambdas: &[f64],
    temperatures: &[f64],
    opts: &CrossoverOptions,
) -> Result<CrossoverMap> {
    if lambdas.len() < 3 || temperatures.len() < 3 {
        return Err(Error::InvalidParameter("crossover grids need at least 3 points per axis".into()));
    }
    if lambdas.iter().any(|&l| (l - 1.0).abs() < opts.mixed_step) {
        return Err(Error::InvalidParameter("lambda grid must exclude the critical point".into()));
    }
    if temperatures.iter().any(|&t| t <= 0.0) {
        return Err(Error::InvalidParameter("temperatures must be positive".into()));
    }
    if !lambdas.windows(2).all(|w| w[1] > w[0]) || !temperatures.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::InvalidParameter("grids must be strictly increasing".into()));
    }
    let base = ChainParams::new(1.0, gamma).with_distance(distance);
    base.validate()?;

    let nt = temperatures.len();
    let raw = (0..lambdas.len() * nt)
        .into_par_iter()
        .map(|k| raw_cell(&base, lambdas[k / nt], temperatures[k % nt], opts))
        .collect::<Result<Vec<_>>>()?;

    // Floors for relative disagreement, per derivative kind.
    let mut scale = [0.0f64; 3];
    for (c, _) in &raw {
        for (s, d) in scale.iter_mut().zip([c.d_lambda, c.d_temperature, c.d_mixed]) {
            if let Some(d) = d {
                *s = s.max(d.abs());
            }
        }
    }
    let mut worst = 0.0f64;
    let cells: Vec<Cell> = raw
        .into_iter()
        .map(|(mut c, halved)| {
            let full = [c.d_lambda, c.d_temperature, c.d_mixed];
            for k in 0..3 {
                c.halving[k] = match (full[k], halved[k]) {
                    (Some(a), Some(b)) => {
                        let r = (a - b).abs() / b.abs().max(opts.relative_floor * scale[k]);
                        worst = worst.max(r);
                        Some(r)
                    }
                    _ => None,
                };
            }
            c
        })
        .collect();
    if worst > opts.max_disagreement {
        return Err(Error::GridTooCoarse(format!(
            "step-halving disagreement {worst:.3} exceeds {}",
            opts.max_disagreement
        )));
    }

    let mut star = Vec::new();
    let mut mixed = Vec::new();
    for (i, &l) in lambdas.iter().enumerate() {
        let col = &cells[i * nt..(i + 1) * nt];
        let dt: Vec<Option<f64>> = col.iter().map(|c| c.d_temperature.map(f64::abs)).collect();
        let dm: Vec<Option<f64>> = col.iter().map(|c| c.d_mixed.map(f64::abs)).collect();
        let x = (l - 1.0).abs();
        if let Some(t) = interior_peak(temperatures, &dt) {
            star.push((x, t));
        }
        if let Some(t) = interior_peak(temperatures, &dm) {
            mixed.push((x, t));
        }
    }
    let line = |points: Vec<(f64, f64)>| {
        let (x, y): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
        CrossoverLine {
            slope: if x.is_empty() { f64::NAN } else { slope_through_origin(&x, &y) },
            points,
        }
    };

    let fan = cells
        .iter()
        .filter(|c| c.temperature > (c.lambda - 1.0).abs() && c.rom > NONZERO_THRESHOLD)
        .filter_map(Cell::gruneisen)
        .collect();

    Ok(CrossoverMap {
        gamma,
        distance,
        lambdas: lambdas.to_vec(),
        temperatures: temperatures.to_vec(),
        cells,
        t_star: line(star),
        t_mixed: line(mixed),
        fan_gruneisen_median: median(fan),
        max_halving_disagreement: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fit::lin_space;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parabolic_peak_refinement() {
        let xs = lin_space(0.0, 1.0, 11);
        let vals: Vec<Option<f64>> = xs.iter().map(|x| Some(-(x - 0.43f64).powi(2))).collect();
        assert_abs_diff_eq!(interior_peak(&xs, &vals).unwrap(), 0.43, epsilon = 1e-12);
        let edge: Vec<Option<f64>> = xs.iter().map(|&x| Some(x)).collect();
        assert!(interior_peak(&xs, &edge).is_none());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(vec![]).is_nan());
    }

    #[test]
    fn small_map_is_consistent() {
        let lambdas = [0.9, 0.95, 1.05, 1.1];
        let temps = lin_space(0.02, 0.3, 8);
        let map = crossover_map(1.0, 1, &lambdas, &temps, &CrossoverOptions::default()).unwrap();
        assert_eq!(map.cells.len(), 32);
        assert!(map.max_halving_disagreement < 0.05);
        let c = map.cell(1, 3);
        assert_eq!((c.lambda, c.temperature), (0.95, temps[3]));
        assert!(c.d_temperature.unwrap() < 0.0);
    }

    #[test]
    fn rejects_critical_lambda() {
        let temps = [0.1, 0.2, 0.3];
        assert!(crossover_map(1.0, 1, &[0.9, 1.0, 1.1], &temps, &CrossoverOptions::default()).is_err());
    }
}
