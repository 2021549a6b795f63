//! Finite-chain scans of the central-site magic and the finite-size
//! scaling collapse of its `λ`-derivative.
//!
//! The collapse rescales each size as `x = N^{1/ν}(λ − λ_c^[N])`,
//! `y = N^{−μ/ν} ∂_λR` and scores how far every curve sits from the mean
//! of the others, interpolated monotonically.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::interp::Pchip;
use crate::chain::{ground_state, order_parameter_peak_from_samples, FiniteChainSpec};
use crate::error::{Error, Result};
use crate::rom::{rom_lp, NONZERO_THRESHOLD};
use crate::stabilizer::StabilizerPolytope;

/// Central-site order parameter and RoM along a `λ` grid at one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeScan {
    pub spec: FiniteChainSpec,
    pub lambdas: Vec<f64>,
    pub order_parameter: Vec<f64>,
    pub rom: Vec<f64>,
    /// Peak of `d⟨σˣ⟩/dλ`.
    pub lambda_c: f64,
}

impl SizeScan {
    /// Centered differences of the RoM on the scan grid, skipping points
    /// whose stencil touches a nonmagical sample.
    pub fn rom_derivative(&self) -> Vec<(f64, f64)> {
        let (l, r) = (&self.lambdas, &self.rom);
        (1..l.len().saturating_sub(1))
            .filter(|&k| r[k - 1..=k + 1].iter().all(|&v| v > NONZERO_THRESHOLD))
            .map(|k| (l[k], (r[k + 1] - r[k - 1]) / (l[k + 1] - l[k - 1])))
            .collect()
    }

    pub fn curve(&self) -> CollapseCurve {
        CollapseCurve {
            n_sites: self.spec.n_sites,
            lambda_c: self.lambda_c,
            samples: self.rom_derivative(),
        }
    }
}

/// Diagonalizes `base` at every grid point and records the central site.
pub fn size_scan(base: &FiniteChainSpec, lambdas: &[f64]) -> Result<SizeScan> {
    if lambdas.len() < 5 || lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("need at least 5 increasing grid points".into()));
    }
    let c = base.center();
    let polytope = StabilizerPolytope::cached(1)?;
    let points = lambdas
        .par_iter()
        .map(|&l| {
            let gs = ground_state(&base.with_lambda(l))?;
            let rho = gs.reduced_density(&[c])?;
            Ok((gs.sigma_x(c).abs(), rom_lp(&rho, polytope)?.value))
        })
        .collect::<Result<Vec<_>>>()?;
    let (order_parameter, rom): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
    let peak = order_parameter_peak_from_samples(lambdas, &order_parameter)?;
    Ok(SizeScan {
        spec: *base,
        lambdas: lambdas.to_vec(),
        order_parameter,
        rom,
        lambda_c: peak.lambda_c,
    })
}

/// One size's `(λ, ∂_λR)` samples and its finite-size critical point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseCurve {
    pub n_sites: usize,
    pub lambda_c: f64,
    pub samples: Vec<(f64, f64)>,
}

impl CollapseCurve {
    fn rescaled(&self, mu: f64, nu: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_sites as f64;
        let sx = n.powf(1.0 / nu);
        let sy = n.powf(-mu / nu);
        self.samples.iter().map(|&(l, d)| (sx * (l - self.lambda_c), sy * d)).unzip()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseOptions {
    pub mu_range: (f64, f64),
    pub nu_range: (f64, f64),
    pub grid_step: f64,
    /// Final step of the compass refinement around the best grid point.
    pub refine_tol: f64,
    /// Each curve needs this many points inside another curve's range.
    pub min_overlap: usize,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        CollapseOptions {
            mu_range: (0.5, 1.5),
            nu_range: (0.5, 1.5),
            grid_step: 0.01,
            refine_tol: 1e-5,
            min_overlap: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseResult {
    pub mu: f64,
    pub nu: f64,
    pub collapse_cost: f64,
    /// Cost of the curves shifted by `λ_c^[N]` but not rescaled.
    pub baseline_cost: f64,
    pub sizes: Vec<usize>,
}

impl CollapseResult {
    pub fn improvement(&self) -> f64 {
        self.baseline_cost / self.collapse_cost
    }
}

/// Spread of the curves about their mutual interpolants, normalized by the
/// variance of the compared ordinates. `None` when the overlap is too thin.
fn spread(curves: &[(Vec<f64>, Vec<f64>)], min_overlap: usize) -> Option<f64> {
    let interps: Vec<Pchip> = curves.iter().map(|(x, y)| Pchip::new(x, y)).collect::<Option<_>>()?;
    let mut residual = 0.0;
    let mut used = Vec::new();
    for (k, (xs, ys)) in curves.iter().enumerate() {
        let mut count = 0;
        for (&x, &y) in xs.iter().zip(ys) {
            let others: Vec<f64> = interps
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .filter_map(|(_, p)| p.eval(x))
                .collect();
            if others.is_empty() {
                continue;
            }
            let master = others.iter().sum::<f64>() / others.len() as f64;
            residual += (y - master).powi(2);
            used.push(y);
            count += 1;
        }
        if count < min_overlap {
            return None;
        }
    }
    let mean = used.iter().sum::<f64>() / used.len() as f64;
    let var: f64 = used.iter().map(|y| (y - mean).powi(2)).sum();
    (var > 0.0).then(|| residual / var)
}

/// Collapse cost at `(μ, ν)`; `nu = f64::INFINITY` leaves the abscissae unscaled.
pub fn collapse_cost(curves: &[CollapseCurve], mu: f64, nu: f64, min_overlap: usize) -> Option<f64> {
    let scaled: Vec<_> = curves.iter().map(|c| c.rescaled(mu, nu)).collect();
    spread(&scaled, min_overlap)
}

/// Grid search over `(μ, ν)` followed by a compass refinement.
pub fn fss_collapse(curves: &[CollapseCurve], opts: &CollapseOptions) -> Result<CollapseResult> {
    if curves.len() < 3 {
        return Err(Error::InsufficientData(format!("collapse needs at least 3 sizes, got {}", curves.len())));
    }
    if let Some(c) = curves.iter().find(|c| c.samples.len() < 3) {
        return Err(Error::InsufficientData(format!("size {} has fewer than 3 derivative samples", c.n_sites)));
    }
    let cost = |mu: f64, nu: f64| collapse_cost(curves, mu, nu, opts.min_overlap).unwrap_or(f64::INFINITY);
    let steps = |(lo, hi): (f64, f64)| ((hi - lo) / opts.grid_step).round() as usize;
    let (nm, nn) = (steps(opts.mu_range), steps(opts.nu_range));
    let grid: Vec<(f64, f64, f64)> = (0..=nm)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mu = opts.mu_range.0 + i as f64 * opts.grid_step;
            (0..=nn).map(move |j| {
                let nu = opts.nu_range.0 + j as f64 * opts.grid_step;
                (mu, nu, cost(mu, nu))
            })
        })
        .collect();
    let finite: Vec<f64> = grid.iter().map(|g| g.2).filter(|c| c.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if finite.is_empty() || hi - lo <= 1e-12 * hi.abs() {
        return Err(Error::DegenerateCost);
    }
    let &(mut mu, mut nu, mut best) = grid
        .iter()
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .expect("nonempty grid");

    let mut step = opts.grid_step / 2.0;
    while step >= opts.refine_tol {
        let mut moved = false;
        for (dm, dn) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            let (m, n) = (mu + dm * step, nu + dn * step);
            if n <= 0.0 {
                continue;
            }
            let c = cost(m, n);
            if c < best {
                (mu, nu, best) = (m, n, c);
                moved = true;
                break;
            }
        }
        if !moved {
            step /= 2.0;
        }
    }

    // Unscaled reference: heights and widths left as measured.
    let baseline = collapse_cost(curves, 0.0, f64::INFINITY, opts.min_overlap).unwrap_or(f64::INFINITY);
    Ok(CollapseResult {
        mu,
        nu,
        collapse_cost: best,
        baseline_cost: baseline,
        sizes: curves.iter().map(|c| c.n_sites).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fit::lin_space;
    use approx::assert_abs_diff_eq;

    fn synthetic(mu: f64, nu: f64) -> Vec<CollapseCurve> {
        let master = |x: f64| 1.0 / (1.0 + (x - 0.3).powi(2)) + 0.2 * (0.5 * x).tanh();
        [8usize, 12, 16, 20]
            .iter()
            .map(|&n| {
                let nf = n as f64;
                let lambda_c = 1.0 - 0.6 / nf;
                let samples = lin_space(0.5, 1.5, 81)
                    .into_iter()
                    .map(|l| (l, nf.powf(mu / nu) * master(nf.powf(1.0 / nu) * (l - lambda_c))))
                    .collect();
                CollapseCurve {
                    n_sites: n,
                    lambda_c,
                    samples,
                }
            })
            .collect()
    }

    #[test]
    fn recovers_synthetic_exponents() {
        let r = fss_collapse(&synthetic(0.9, 1.0), &CollapseOptions::default()).unwrap();
        assert_abs_diff_eq!(r.mu, 0.9, epsilon = 0.02);
        assert_abs_diff_eq!(r.nu, 1.0, epsilon = 0.02);
        assert!(r.improvement() > 5.0, "{r:?}");
        assert_eq!(r.sizes, vec![8, 12, 16, 20]);
    }

    #[test]
    fn cost_vanishes_at_exact_exponents() {
        let curves = synthetic(0.8, 1.2);
        let at = collapse_cost(&curves, 0.8, 1.2, 3).unwrap();
        let off = collapse_cost(&curves, 1.0, 1.0, 3).unwrap();
        assert!(at < 1e-5 && off > 100.0 * at, "{at} {off}");
    }

    #[test]
    fn flat_curves_are_degenerate() {
        let flat: Vec<CollapseCurve> = [8usize, 12, 16]
            .iter()
            .map(|&n| CollapseCurve {
                n_sites: n,
                lambda_c: 1.0,
                samples: lin_space(0.5, 1.5, 11).into_iter().map(|l| (l, 0.0)).collect(),
            })
            .collect();
        assert_eq!(fss_collapse(&flat, &CollapseOptions::default()), Err(Error::DegenerateCost));
    }

    #[test]
    fn needs_three_sizes() {
        let two = &synthetic(0.9, 1.0)[..2];
        assert!(matches!(fss_collapse(two, &CollapseOptions::default()), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn derivative_skips_nonmagical_stencils() {
        let scan = SizeScan {
            spec: FiniteChainSpec::pinned(8, 1.0, 1.0),
            lambdas: vec![0.0, 0.1, 0.2, 0.3, 0.4],
            order_parameter: vec![0.0; 5],
            rom: vec![0.0, 0.0, 0.1, 0.3, 0.6],
            lambda_c: 0.2,
        };
        let d = scan.rom_derivative();
        assert_eq!(d.len(), 1);
        assert_abs_diff_eq!(d[0].1, 2.5, epsilon = 1e-12);
    }

    #[test]
    fn small_chain_scan() {
        let base = FiniteChainSpec::pinned(8, 1.0, 1.0);
        let scan = size_scan(&base, &lin_space(0.6, 1.6, 21)).unwrap();
        assert!(scan.lambda_c > 1.0 && scan.lambda_c < 1.6);
        assert!(scan.order_parameter.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(scan.curve().samples.len(), scan.rom_derivative().len());
    }
}
