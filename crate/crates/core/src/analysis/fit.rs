//! Least-squares fits used by the scaling analysis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of samples inside a fit window.
pub const MIN_FIT_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    /// `y = prefactor · x^exponent`, fitted in log–log space.
    PowerLaw,
    /// `y = offset + prefactor · ln x`; `exponent` repeats the slope.
    Logarithmic,
    /// `y = offset + prefactor · x`; `exponent` is 1.
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub kind: FitKind,
    pub exponent: f64,
    pub prefactor: f64,
    pub offset: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub n_points: usize,
}

/// Ordinary least squares `y = a + b x`, returning `(a, b, r²)`.
pub fn linear_regression(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let sse: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let r2 = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    (a, b, r2)
}

fn in_window(samples: &[(f64, f64)], window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!("empty fit window [{lo}, {hi}]")));
    }
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|&(x, _)| x >= lo * (1.0 - 1e-12) && x <= hi * (1.0 + 1e-12))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} points in window [{lo}, {hi}], need {MIN_FIT_POINTS}",
            pts.len()
        )));
    }
    Ok(pts)
}

/// Power law fitted on log–log axes.
pub fn fit_power_law(samples: &[(f64, f64)], window: (f64, f64)) -> Result<ScalingFit> {
    let pts = in_window(samples, window)?;
    if pts.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::InvalidParameter("power-law fit needs positive samples".into()));
    }
    let lx: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (a, b, r2) = linear_regression(&lx, &ly);
    Ok(ScalingFit {
        kind: FitKind::PowerLaw,
        exponent: b,
        prefactor: a.exp(),
        offset: 0.0,
        window,
        r_squared: r2,
        n_points: pts.len(),
    })
}

/// `y` against `ln x`.
pub fn fit_log_divergence(samples: &[(f64, f64)], window: (f64, f64)) -> Result<ScalingFit> {
    let pts = in_window(samples, window)?;
    if pts.iter().any(|&(x, _)| x <= 0.0) {
        return Err(Error::InvalidParameter("logarithmic fit needs positive abscissae".into()));
    }
    let lx: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (a, b, r2) = linear_regression(&lx, &y);
    Ok(ScalingFit {
        kind: FitKind::Logarithmic,
        exponent: b,
        prefactor: b,
        offset: a,
        window,
        r_squared: r2,
        n_points: pts.len(),
    })
}

pub fn fit_linear(samples: &[(f64, f64)], window: (f64, f64)) -> Result<ScalingFit> {
    let pts = in_window(samples, window)?;
    let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (a, b, r2) = linear_regression(&x, &y);
    Ok(ScalingFit {
        kind: FitKind::Linear,
        exponent: 1.0,
        prefactor: b,
        offset: a,
        window,
        r_squared: r2,
        n_points: pts.len(),
    })
}

/// Slope of `y = slope · x` through the origin.
pub fn slope_through_origin(x: &[f64], y: &[f64]) -> f64 {
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    sxy / sxx
}

/// `y ≈ c1 · tanh(c2 · r) · r^power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TanhPowerFit {
    pub c1: f64,
    pub c2: f64,
    pub power: f64,
    pub r_squared: f64,
}

impl TanhPowerFit {
    pub fn eval(&self, r: f64) -> f64 {
        self.c1 * (self.c2 * r).tanh() * r.powf(self.power)
    }
}

/// For fixed `c2` the model is linear in `c1`, so `c2` is found by a log
/// grid followed by golden-section refinement.
pub fn fit_tanh_power(samples: &[(f64, f64)], power: f64) -> Result<TanhPowerFit> {
    if samples.len() < 3 {
        return Err(Error::InsufficientData(format!("{} points, need 3", samples.len())));
    }
    let sse_at = |c2: f64| -> (f64, f64) {
        let f: Vec<f64> = samples.iter().map(|&(r, _)| (c2 * r).tanh() * r.powf(power)).collect();
        let c1 = samples.iter().zip(&f).map(|(s, fi)| s.1 * fi).sum::<f64>() / f.iter().map(|v| v * v).sum::<f64>();
        let sse = samples.iter().zip(&f).map(|(s, fi)| (s.1 - c1 * fi).powi(2)).sum();
        (sse, c1)
    };
    let grid: Vec<f64> = (0..=600).map(|i| -4.0 + 6.0 * i as f64 / 600.0).collect();
    let best = grid
        .iter()
        .copied()
        .min_by(|&a, &b| sse_at(10f64.powf(a)).0.total_cmp(&sse_at(10f64.powf(b)).0))
        .expect("nonempty grid");
    let (mut lo, mut hi) = (best - 0.01, best + 0.01);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if sse_at(10f64.powf(a)).0 < sse_at(10f64.powf(b)).0 {
            hi = b;
        } else {
            lo = a;
        }
    }
    let c2 = 10f64.powf(0.5 * (lo + hi));
    let (sse, c1) = sse_at(c2);
    let my = samples.iter().map(|s| s.1).sum::<f64>() / samples.len() as f64;
    let sst: f64 = samples.iter().map(|s| (s.1 - my).powi(2)).sum();
    Ok(TanhPowerFit {
        c1,
        c2,
        power,
        r_squared: if sst > 0.0 { (1.0 - sse / sst).clamp(0.0, 1.0) } else { 1.0 },
    })
}

/// `n` points log-spaced over `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// `n` points evenly spaced over `[lo, hi]`.
pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
