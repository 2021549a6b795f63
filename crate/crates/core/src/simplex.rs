//! Dense two-phase simplex for small equality-constrained LPs.
//!
//! Solves `min cᵀx  s.t.  A x = b, x ≥ 0` with Bland's smallest-index rule
//! for both the entering and the leaving variable, so the pivot sequence
//! never cycles and is fully deterministic. After the tableau phase the
//! optimal basis is re-solved with an LU factorization of the original
//! data to produce accurate primal and dual vectors and a duality
//! certificate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Smallest pivot magnitude accepted in the tableau.
    pub pivot_tol: f64,
    /// A reduced cost below `-optimality_tol` makes a column eligible.
    pub optimality_tol: f64,
    /// Maximum phase-one objective still considered feasible.
    pub feasibility_tol: f64,
    pub max_iterations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            pivot_tol: 1e-11,
            optimality_tol: 1e-12,
            feasibility_tol: 1e-9,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Equality-constraint multipliers `y` with `cᵀx = bᵀy` at optimality.
    pub dual: Vec<f64>,
    pub basis: Vec<usize>,
    pub iterations: usize,
    /// `‖Ax − b‖_∞` of the polished primal solution.
    pub primal_residual: f64,
    /// Most negative reduced cost `c_j − a_jᵀy`, reported as a positive number.
    pub dual_infeasibility: f64,
    /// `|cᵀx − bᵀy|`.
    pub duality_gap: f64,
}

struct Tableau {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let w = self.cols + 1;
        &mut self.data[r * w..(r + 1) * w]
    }

    /// Objective row index.
    fn obj(&self) -> usize {
        self.rows
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.at(pr, pc);
        for v in self.row_mut(pr) {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.data[pr * w..(pr + 1) * w].to_vec();
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let f = self.at(r, pc);
            if f != 0.0 {
                for (v, pv) in self.row_mut(r).iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[pr] = pc;
    }

    /// Runs Bland's rule over columns `0..allowed` until optimal.
    fn optimize(&mut self, allowed: usize, opts: &SimplexOptions, iterations: &mut usize) -> Result<()> {
        let obj = self.obj();
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.at(obj, j) < -opts.optimality_tol) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, enter);
                if a > opts.pivot_tol {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            let tie = (ratio - lratio).abs() <= 1e-14 * (1.0 + lratio.abs());
                            if ratio < lratio && !tie || tie && self.basis[r] < self.basis[lr] {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((pr, _)) = leave else {
                return Err(Error::LpUnbounded);
            };
            self.pivot(pr, enter);
            *iterations += 1;
            if *iterations > opts.max_iterations {
                return Err(Error::LpIterationLimit(opts.max_iterations));
            }
        }
    }
}

/// Solves `min cᵀx  s.t.  A x = b, x ≥ 0`.
pub fn solve(a: &DMatrix<f64>, b: &[f64], c: &[f64], opts: &SimplexOptions) -> Result<SimplexSolution> {
    let (m, n) = a.shape();
    assert_eq!(b.len(), m, "rhs length");
    assert_eq!(c.len(), n, "cost length");

    // Tableau over n structural plus m artificial columns, rows scaled so b ≥ 0.
    let cols = n + m;
    let mut t = Tableau {
        rows: m,
        cols,
        data: vec![0.0; (m + 1) * (cols + 1)],
        basis: (n..n + m).collect(),
    };
    for r in 0..m {
        let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
        let row = t.row_mut(r);
        for j in 0..n {
            row[j] = sign * a[(r, j)];
        }
        row[n + r] = 1.0;
        row[cols] = sign * b[r];
    }
    // Phase one: minimize the sum of artificials.
    for j in (0..n).chain(std::iter::once(cols)) {
        let s: f64 = (0..m).map(|r| t.at(r, j)).sum();
        t.row_mut(m)[j] = -s;
    }
    let mut iterations = 0;
    t.optimize(cols, opts, &mut iterations)?;
    let infeasibility = -t.rhs(m);
    if infeasibility > opts.feasibility_tol {
        return Err(Error::LpInfeasible { residual: infeasibility });
    }

    // Pivot remaining zero-level artificials out; rows where that is
    // impossible are linearly dependent and dropped from the final basis.
    let mut redundant = vec![false; m];
    for r in 0..m {
        if t.basis[r] >= n {
            match (0..n).find(|&j| t.at(r, j).abs() > opts.pivot_tol) {
                Some(j) => {
                    t.pivot(r, j);
                    iterations += 1;
                }
                None => redundant[r] = true,
            }
        }
    }

    // Phase two objective row.
    {
        let obj: Vec<f64> = (0..=cols)
            .map(|j| {
                let base = if j < n { c[j] } else { 0.0 };
                let cb: f64 = (0..m)
                    .filter(|&r| t.basis[r] < n)
                    .map(|r| c[t.basis[r]] * t.at(r, j))
                    .sum();
                base - cb
            })
            .collect();
        t.row_mut(m).copy_from_slice(&obj);
    }
    t.optimize(n, opts, &mut iterations)?;

    polish(a, b, c, &t, &redundant, iterations)
}

/// Recomputes primal and dual solutions from the final basis.
fn polish(
    a: &DMatrix<f64>,
    b: &[f64],
    c: &[f64],
    t: &Tableau,
    redundant: &[bool],
    iterations: usize,
) -> Result<SimplexSolution> {
    let (m, n) = a.shape();
    let rows: Vec<usize> = (0..m).filter(|&r| !redundant[r]).collect();
    let basis: Vec<usize> = rows.iter().map(|&r| t.basis[r]).collect();
    let k = rows.len();

    let bmat = DMatrix::from_fn(k, k, |i, j| a[(rows[i], basis[j])]);
    let lu = bmat.clone().lu();
    let rhs = DVector::from_iterator(k, rows.iter().map(|&r| b[r]));
    let xb = lu.solve(&rhs).ok_or(Error::LpInfeasible { residual: f64::NAN })?;
    let cb = DVector::from_iterator(k, basis.iter().map(|&j| c[j]));
    let yk = bmat
        .transpose()
        .lu()
        .solve(&cb)
        .ok_or(Error::LpInfeasible { residual: f64::NAN })?;

    let mut x = vec![0.0; n];
    for (i, &j) in basis.iter().enumerate() {
        // Clamp roundoff-level negatives of basic variables.
        x[j] = if xb[i] < 0.0 && xb[i] > -1e-12 { 0.0 } else { xb[i] };
    }
    let mut dual = vec![0.0; m];
    for (i, &r) in rows.iter().enumerate() {
        dual[r] = yk[i];
    }

    let primal_residual = (0..m)
        .map(|r| ((0..n).map(|j| a[(r, j)] * x[j]).sum::<f64>() - b[r]).abs())
        .fold(0.0, f64::max);
    let dual_infeasibility = (0..n)
        .map(|j| -(c[j] - (0..m).map(|r| a[(r, j)] * dual[r]).sum::<f64>()))
        .fold(0.0, f64::max);
    let objective: f64 = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    let dual_objective: f64 = dual.iter().zip(b).map(|(yi, bi)| yi * bi).sum();

    Ok(SimplexSolution {
        x,
        objective,
        dual,
        basis,
        iterations,
        primal_residual,
        dual_infeasibility,
        duality_gap: (objective - dual_objective).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn small_textbook_problem() {
        // min -x0 - 2x1  s.t. x0 + x1 + s0 = 4, x0 + 3x1 + s1 = 6
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 1.0, 1.0, 0.0, 1.0, 3.0, 0.0, 1.0]);
        let sol = solve(&a, &[4.0, 6.0], &[-1.0, -2.0, 0.0, 0.0], &SimplexOptions::default()).unwrap();
        assert_abs_diff_eq!(sol.objective, -5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.x[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.x[1], 1.0, epsilon = 1e-12);
        assert!(sol.duality_gap < 1e-12);
        assert!(sol.dual_infeasibility < 1e-12);
    }

    #[test]
    fn negative_rhs_and_redundant_row() {
        // x0 - x1 = -1 twice (dependent), min x0 + x1 -> x = (0, 1)
        let a = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 2.0, -2.0]);
        let sol = solve(&a, &[-1.0, -2.0], &[1.0, 1.0], &SimplexOptions::default()).unwrap();
        assert_abs_diff_eq!(sol.objective, 1.0, epsilon = 1e-12);
        assert!(sol.primal_residual < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        assert!(matches!(
            solve(&a, &[-1.0], &[1.0, 1.0], &SimplexOptions::default()),
            Err(Error::LpInfeasible { .. })
        ));
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        assert!(matches!(
            solve(&a, &[1.0], &[0.0, -1.0], &SimplexOptions::default()),
            Err(Error::LpUnbounded)
        ));
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's classic cycling example in standard form.
        let a = DMatrix::from_row_slice(
            3,
            7,
            &[
                0.25, -8.0, -1.0, 9.0, 1.0, 0.0, 0.0, //
                0.5, -12.0, -0.5, 3.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0,
            ],
        );
        let c = [-0.75, 20.0, -0.5, 6.0, 0.0, 0.0, 0.0];
        let sol = solve(&a, &[0.0, 0.0, 1.0], &c, &SimplexOptions::default()).unwrap();
        assert_abs_diff_eq!(sol.objective, -1.25, epsilon = 1e-12);
    }
}
