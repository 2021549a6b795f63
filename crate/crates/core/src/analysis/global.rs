//! Global magic of a central pair in the symmetry-broken finite chain.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::single_site::{bisect_onset, golden_max};
use crate::chain::{ground_state, FiniteChainSpec};
use crate::error::{Error, Result};
use crate::rom::{global_magic_parts, GlobalMagic, NONZERO_THRESHOLD};
use crate::stabilizer::StabilizerPolytope;

/// Global magic of the pair `central_pair(r)` at `base` with `λ` replaced.
pub fn pair_global_magic(base: &FiniteChainSpec, r: usize, lambda: f64) -> Result<GlobalMagic> {
    let spec = base.with_lambda(lambda);
    let (i, j) = spec.central_pair(r)?;
    let gs = ground_state(&spec)?;
    global_magic_parts(&gs.reduced_density(&[i, j])?, StabilizerPolytope::cached(2)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalMagicPeak {
    pub n_sites: usize,
    pub distance: usize,
    /// Refined position and value of the maximum.
    pub lambda_peak: f64,
    pub peak: f64,
    /// Onset of magic in the product of the pair's marginals.
    pub product_onset: f64,
    /// The coarse sweep, `(λ, parts)`.
    pub sweep: Vec<(f64, GlobalMagic)>,
}

/// Sweeps `lambdas`, refines the maximum by golden section inside the
/// neighbouring grid cells and locates where the product of marginals
/// becomes magical, both to `resolution`.
pub fn global_magic_peak(base: &FiniteChainSpec, r: usize, lambdas: &[f64], resolution: f64) -> Result<GlobalMagicPeak> {
    if lambdas.len() < 3 || lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("need at least 3 increasing grid points".into()));
    }
    let sweep = lambdas
        .par_iter()
        .map(|&l| pair_global_magic(base, r, l).map(|g| (l, g)))
        .collect::<Result<Vec<_>>>()?;
    let k = (0..sweep.len())
        .max_by(|&a, &b| sweep[a].1.global.total_cmp(&sweep[b].1.global))
        .expect("nonempty");
    if k == 0 || k + 1 == sweep.len() {
        return Err(Error::PeakOnBoundary { at: lambdas[k] });
    }
    let (lambda_peak, peak) = golden_max(
        |l| pair_global_magic(base, r, l).map(|g| g.global),
        lambdas[k - 1],
        lambdas[k + 1],
        resolution,
    )?;

    let onset_hi = sweep
        .iter()
        .position(|(_, g)| g.product_rom > NONZERO_THRESHOLD)
        .ok_or(Error::NoSignChange {
            lo: lambdas[0],
            hi: *lambdas.last().expect("nonempty"),
        })?;
    if onset_hi == 0 {
        return Err(Error::NoSignChange {
            lo: lambdas[0],
            hi: lambdas[0],
        });
    }
    let (_, product_onset, _) = bisect_onset(
        |l| pair_global_magic(base, r, l).map(|g| g.product_rom),
        lambdas[onset_hi - 1],
        lambdas[onset_hi],
        NONZERO_THRESHOLD,
        resolution,
    )?;
    Ok(GlobalMagicPeak {
        n_sites: base.n_sites,
        distance: r,
        lambda_peak,
        peak,
        product_onset,
        sweep,
    })
}
