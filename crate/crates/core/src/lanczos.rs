//! Restarted Lanczos for the lowest eigenpair of a large symmetric operator.
//!
//! Each cycle runs the three-term recurrence twice: once to build the
//! tridiagonal matrix, once to regenerate the Krylov vectors and assemble
//! the Ritz vector. Only a handful of full-length vectors are ever alive,
//! so a 2^20-dimensional problem needs tens of megabytes.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// A real symmetric linear operator `y = A x`.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Converged when `‖A v − θ v‖ ≤ tol` for unit `v`.
    pub tol: f64,
    pub krylov_dim: usize,
    pub max_restarts: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tol: 1e-8,
            krylov_dim: 100,
            max_restarts: 300,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    /// Number of operator applications.
    pub matvecs: usize,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn scale(alpha: f64, x: &mut [f64]) {
    for v in x {
        *v *= alpha;
    }
}

/// Removes the components along each (orthonormal) `basis` vector, twice
/// for stability.
fn project_out(x: &mut [f64], basis: &[&[f64]]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(x, b);
            axpy(-c, b, x);
        }
    }
}

/// Lowest eigenpair of `op` restricted to the orthogonal complement of
/// `deflate` (orthonormal vectors), starting from `start`.
pub fn lowest_eigenpair<O: SymmetricOperator>(
    op: &O,
    start: &[f64],
    deflate: &[&[f64]],
    opts: &LanczosOptions,
) -> Result<Eigenpair> {
    let n = op.dim();
    assert_eq!(start.len(), n, "start vector length");
    let m_max = opts.krylov_dim.min(n.saturating_sub(deflate.len())).max(1);

    let mut x = start.to_vec();
    project_out(&mut x, deflate);
    let nx = norm(&x);
    if nx == 0.0 {
        return Err(Error::InvalidParameter("start vector lies in the deflated space".into()));
    }
    scale(1.0 / nx, &mut x);

    let mut w = vec![0.0; n];
    let mut matvecs = 0;
    let mut last_residual = f64::INFINITY;

    for _ in 0..=opts.max_restarts {
        // Convergence check on the current iterate.
        op.apply(&x, &mut w);
        matvecs += 1;
        project_out(&mut w, deflate);
        let theta = dot(&x, &w);
        axpy(-theta, &x, &mut w);
        last_residual = norm(&w);
        if last_residual <= opts.tol {
            return Ok(Eigenpair {
                value: theta,
                vector: x,
                residual: last_residual,
                matvecs,
            });
        }

        // First pass: tridiagonal coefficients, stopping early once the
        // Ritz residual estimate `β_j |s_j|` is well below tolerance.
        let stop = |alphas: &[f64], betas: &[f64], beta: f64| {
            alphas.len() % 10 == 0 && beta * lowest_ritz(alphas, betas).1.last().unwrap().abs() < 0.5 * opts.tol
        };
        let (alphas, betas) = recurrence(op, &x, deflate, m_max, &mut matvecs, |_, _| {}, stop);
        let m = alphas.len();
        let (_, s) = lowest_ritz(&alphas, &betas);

        // Second pass: Ritz vector from regenerated Krylov vectors.
        let mut ritz = vec![0.0; n];
        recurrence(op, &x, deflate, m, &mut matvecs, |j, q| axpy(s[j], q, &mut ritz), |_, _, _| false);
        project_out(&mut ritz, deflate);
        let nr = norm(&ritz);
        scale(1.0 / nr, &mut ritz);
        x = ritz;
    }
    Err(Error::Eigensolver {
        residual: last_residual,
        iterations: matvecs,
    })
}

/// Lowest eigenpair of the tridiagonal matrix with diagonal `alphas` and
/// off-diagonal `betas`.
fn lowest_ritz(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let m = alphas.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let k = (0..m)
        .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
        .expect("nonempty");
    (eig.eigenvalues[k], (0..m).map(|j| eig.eigenvectors[(j, k)]).collect())
}

/// Runs up to `m` Lanczos steps from unit `q0`, calling `visit(j, q_j)`
/// for each Krylov vector, and returns `(α, β)`.
fn recurrence<O: SymmetricOperator>(
    op: &O,
    q0: &[f64],
    deflate: &[&[f64]],
    m: usize,
    matvecs: &mut usize,
    mut visit: impl FnMut(usize, &[f64]),
    mut stop: impl FnMut(&[f64], &[f64], f64) -> bool,
) -> (Vec<f64>, Vec<f64>) {
    let n = q0.len();
    let mut q_prev = vec![0.0; n];
    let mut q = q0.to_vec();
    let mut w = vec![0.0; n];
    let mut alphas = Vec::with_capacity(m);
    let mut betas = Vec::with_capacity(m);
    let mut beta_prev = 0.0;
    for j in 0..m {
        visit(j, &q);
        op.apply(&q, &mut w);
        *matvecs += 1;
        project_out(&mut w, deflate);
        let alpha = dot(&q, &w);
        axpy(-alpha, &q, &mut w);
        axpy(-beta_prev, &q_prev, &mut w);
        alphas.push(alpha);
        let beta = norm(&w);
        if j + 1 == m || beta < 1e-12 * alpha.abs().max(1.0) || stop(&alphas, &betas, beta) {
            break;
        }
        betas.push(beta);
        std::mem::swap(&mut q_prev, &mut q);
        for (qi, wi) in q.iter_mut().zip(&w) {
            *qi = wi / beta;
        }
        beta_prev = beta;
    }
    (alphas, betas)
}
