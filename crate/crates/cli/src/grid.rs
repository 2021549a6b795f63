//! Range syntax shared by every grid flag.
//!
//! - `v`: a single value
//! - `start:stop:step`: inclusive linear grid
//! - `start:stop:xN`: `N` log-spaced points, both ends included

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grid {
    Single(f64),
    Linear { start: f64, stop: f64, step: f64 },
    Log { start: f64, stop: f64, count: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridError(pub String);

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for GridError {}

fn number(s: &str, what: &str) -> Result<f64, GridError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| GridError(format!("{what} `{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(GridError(format!("{what} `{s}` is not finite")));
    }
    Ok(v)
}

impl FromStr for Grid {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => Ok(Grid::Single(number(v, "value")?)),
            [a, b, c] => {
                let (start, stop) = (number(a, "start")?, number(b, "stop")?);
                if stop < start {
                    return Err(GridError(format!("grid `{s}` is decreasing")));
                }
                if let Some(n) = c.trim().strip_prefix('x') {
                    let count: usize = n
                        .parse()
                        .map_err(|_| GridError(format!("point count `{n}` is not an integer")))?;
                    if count < 2 || start <= 0.0 || stop <= start {
                        return Err(GridError(format!(
                            "log grid `{s}` needs 0 < start < stop and at least 2 points"
                        )));
                    }
                    Ok(Grid::Log { start, stop, count })
                } else {
                    let step = number(c, "step")?;
                    if step <= 0.0 {
                        return Err(GridError(format!("grid step in `{s}` must be positive")));
                    }
                    Ok(Grid::Linear { start, stop, step })
                }
            }
            _ => Err(GridError(format!(
                "`{s}` is not `value`, `start:stop:step` or `start:stop:xN`"
            ))),
        }
    }
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Grid::Single(v) => vec![v],
            Grid::Linear { start, stop, step } => {
                // Tolerate rounding in (stop − start)/step so the stop is kept.
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|k| start + k as f64 * step).collect()
            }
            Grid::Log { start, stop, count } => {
                let (a, b) = (start.ln(), stop.ln());
                (0..count)
                    .map(|k| match k {
                        0 => start,
                        k if k + 1 == count => stop,
                        k => (a + (b - a) * k as f64 / (count - 1) as f64).exp(),
                    })
                    .collect()
            }
        }
    }

    /// Values as nonnegative integers; fails on any fractional entry.
    pub fn integers(&self) -> Result<Vec<usize>, GridError> {
        self.values()
            .into_iter()
            .map(|v| {
                let r = v.round();
                if (v - r).abs() > 1e-9 || r < 0.0 {
                    Err(GridError(format!("{v} is not a nonnegative integer")))
                } else {
                    Ok(r as usize)
                }
            })
            .collect()
    }
}
