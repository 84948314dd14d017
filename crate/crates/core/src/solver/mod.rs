//! Linear-algebra kernel: exact full-rank solves and sparse recovery
//! (basis pursuit via LP, orthogonal matching pursuit).

mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{lstsq, norm2, Matrix};
use simplex::{Simplex, SimplexOutcome};

/// A dense linear system `matrix * x = rhs`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    matrix: Matrix,
    rhs: Vec<f64>,
}

impl LinearSystem {
    pub fn new(matrix: Matrix, rhs: Vec<f64>) -> Result<Self> {
        if rhs.len() != matrix.rows() {
            return Err(Error::Dimension(format!(
                "rhs length {} does not match {} rows",
                rhs.len(),
                matrix.rows()
            )));
        }
        if !matrix.is_finite() || rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("system contains non-finite entries".into()));
        }
        Ok(LinearSystem { matrix, rhs })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self> {
        LinearSystem::new(Matrix::from_rows(rows)?, rhs)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn m(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n(&self) -> usize {
        self.matrix.cols()
    }
}

/// Result of a sparse solve. `residual_norm` is recomputed from the returned
/// vector; `support` holds the indices with |s_j| above the support
/// tolerance.
#[derive(Debug, Clone)]
pub struct SparseSolution {
    pub s: Vec<f64>,
    pub residual_norm: f64,
    pub support: Vec<usize>,
}

/// Which sparse-recovery routine to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparseSolver {
    Bp,
    Omp,
}

/// Solver tolerances. `eq_tol` bounds the l2 residual a solution may leave;
/// `support_tol` decides which entries count as nonzero; `max_iter` caps LP
/// pivots (default 10*(m+n)).
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub eq_tol: f64,
    pub support_tol: f64,
    pub max_iter: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            eq_tol: 1e-8,
            support_tol: 1e-6,
            max_iter: None,
        }
    }
}

impl SolverOptions {
    pub fn with_eq_tol(eq_tol: f64) -> Self {
        SolverOptions {
            eq_tol,
            ..SolverOptions::default()
        }
    }

    fn iter_cap(&self, m: usize, n: usize) -> usize {
        self.max_iter.unwrap_or(10 * (m + n))
    }
}

fn finish(sys: &LinearSystem, s: Vec<f64>, support_tol: f64) -> SparseSolution {
    let hx = sys.matrix.matvec(&s);
    let residual: Vec<f64> = hx.iter().zip(&sys.rhs).map(|(a, b)| a - b).collect();
    let support = s
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > support_tol)
        .map(|(j, _)| j)
        .collect();
    SparseSolution {
        s,
        residual_norm: norm2(&residual),
        support,
    }
}

/// Solve `H v = rhs` exactly for full-column-rank H with m >= n, minimizing
/// the l2 residual when the system is overdetermined.
pub fn solve_full_rank(sys: &LinearSystem) -> Result<Vec<f64>> {
    if sys.m() < sys.n() {
        return Err(Error::Dimension(format!(
            "full-rank solve needs m >= n, got {}x{}",
            sys.m(),
            sys.n()
        )));
    }
    lstsq(&sys.matrix, &sys.rhs)
}

/// Minimum-l1 solve: `min ||s||_1 s.t. ||H s - rhs||_2 <= eq_tol`, with
/// default tolerances.
pub fn basis_pursuit(sys: &LinearSystem) -> Result<SparseSolution> {
    basis_pursuit_with(sys, &SolverOptions::default())
}

/// Basis pursuit as a standard-form LP. The split `s = p - q` (p, q >= 0)
/// turns the l1 objective linear, and the equality is enforced as the pair
/// of inequalities `rhs - d <= H s <= rhs + d` with per-coordinate slack
/// `d = eq_tol / sqrt(m)`, so any feasible point also satisfies the l2
/// residual bound. The slack keeps noisy right-hand sides feasible.
pub fn basis_pursuit_with(sys: &LinearSystem, opts: &SolverOptions) -> Result<SparseSolution> {
    let (m, n) = (sys.m(), sys.n());
    if m == 0 || n == 0 {
        return Err(Error::Dimension("empty system".into()));
    }
    let d = opts.eq_tol / (m as f64).sqrt();

    // Columns: p (n), q (n), slack u (m) on the upper rows, surplus w (m) on
    // the lower rows.
    let n_var = 2 * n + 2 * m;
    let mut a = Matrix::zeros(2 * m, n_var);
    let mut b = vec![0.0; 2 * m];
    for i in 0..m {
        let row = sys.matrix.row(i);
        for j in 0..n {
            a.set(i, j, row[j]);
            a.set(i, n + j, -row[j]);
            a.set(m + i, j, row[j]);
            a.set(m + i, n + j, -row[j]);
        }
        a.set(i, 2 * n + i, 1.0);
        a.set(m + i, 2 * n + m + i, -1.0);
        b[i] = sys.rhs[i] + d;
        b[m + i] = sys.rhs[i] - d;
    }
    let mut c = vec![0.0; n_var];
    for cj in c.iter_mut().take(2 * n) {
        *cj = 1.0;
    }

    let cap = opts.iter_cap(m, n);
    match Simplex::solve(&a, &b, &c, cap) {
        SimplexOutcome::Optimal { x, objective } => {
            let s: Vec<f64> = (0..n).map(|j| x[j] - x[n + j]).collect();
            // LP objective counts |s| through the split variables; a large
            // gap against the recombined vector signals a pivoting bug.
            debug_assert!(
                (objective - s.iter().map(|v| v.abs()).sum::<f64>()).abs()
                    <= 1e-6 * (1.0 + objective.abs()),
                "split-variable objective drifted from ||s||_1"
            );
            Ok(finish(sys, s, opts.support_tol))
        }
        SimplexOutcome::Infeasible => Err(Error::InfeasibleSystem { eq_tol: opts.eq_tol }),
        SimplexOutcome::IterLimit { iterations } => Err(Error::NonConvergence { iterations }),
        SimplexOutcome::Unbounded => Err(Error::NonConvergence { iterations: cap }),
    }
}

/// Orthogonal matching pursuit with defaults.
pub fn omp(sys: &LinearSystem, sparsity: usize) -> Result<SparseSolution> {
    omp_with(sys, sparsity, &SolverOptions::default())
}

/// Greedy sparse recovery: repeatedly select the column with the largest
/// normalized correlation against the residual, re-fit least squares on the
/// selected support, and stop after `sparsity` selections or once the
/// residual drops below `eq_tol`.
pub fn omp_with(sys: &LinearSystem, sparsity: usize, opts: &SolverOptions) -> Result<SparseSolution> {
    let (m, n) = (sys.m(), sys.n());
    if sparsity == 0 || sparsity > m.min(n) {
        return Err(Error::InvalidInput(format!(
            "sparsity {sparsity} outside 1..=min(m={m}, n={n})"
        )));
    }

    let col_norms: Vec<f64> = (0..n).map(|j| norm2(&sys.matrix.column(j))).collect();
    let mut residual = sys.rhs.clone();
    let mut selected: Vec<usize> = Vec::with_capacity(sparsity);
    let mut in_support = vec![false; n];
    let mut coef: Vec<f64> = Vec::new();

    for _ in 0..sparsity {
        if norm2(&residual) < opts.eq_tol {
            break;
        }
        let corr = sys.matrix.t_matvec(&residual);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            if in_support[j] || col_norms[j] == 0.0 {
                continue;
            }
            let score = corr[j].abs() / col_norms[j];
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((j, score));
            }
        }
        let (j, score) = best.ok_or(Error::DegenerateColumn {
            residual: norm2(&residual),
        })?;
        if score <= 1e-14 {
            return Err(Error::DegenerateColumn {
                residual: norm2(&residual),
            });
        }
        selected.push(j);
        in_support[j] = true;

        // Least squares on the selected columns.
        let mut sub = Matrix::zeros(m, selected.len());
        for (cj, &col) in selected.iter().enumerate() {
            for i in 0..m {
                sub.set(i, cj, sys.matrix.get(i, col));
            }
        }
        coef = lstsq(&sub, &sys.rhs)?;
        let fit = sub.matvec(&coef);
        residual = fit.iter().zip(&sys.rhs).map(|(f, y)| y - f).collect();
    }

    let mut s = vec![0.0; n];
    for (&j, &v) in selected.iter().zip(&coef) {
        s[j] = v;
    }
    Ok(finish(sys, s, opts.support_tol))
}

/// Test-side oracle: enumerate every support of size <= `max_support`, solve
/// least squares on each, and return the feasible solution (residual within
/// `eq_tol`) of minimum l1 norm. Exponential in n; intended for n <= ~40
/// with max_support <= 2 and for cross-checking the LP path.
pub fn min_l1_by_enumeration(
    sys: &LinearSystem,
    max_support: usize,
    eq_tol: f64,
) -> Option<Vec<f64>> {
    let n = sys.n();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut supports: Vec<Vec<usize>> = vec![vec![]];
    for k in 1..=max_support {
        let mut stack = vec![(0usize, Vec::<usize>::with_capacity(k))];
        while let Some((start, cur)) = stack.pop() {
            if cur.len() == k {
                supports.push(cur);
                continue;
            }
            for j in start..n {
                let mut next = cur.clone();
                next.push(j);
                stack.push((j + 1, next));
            }
        }
    }
    for support in supports {
        let s = if support.is_empty() {
            vec![0.0; n]
        } else {
            let mut sub = Matrix::zeros(sys.m(), support.len());
            for (cj, &col) in support.iter().enumerate() {
                for i in 0..sys.m() {
                    sub.set(i, cj, sys.matrix.get(i, col));
                }
            }
            let Ok(coef) = lstsq(&sub, &sys.rhs) else {
                continue;
            };
            let mut s = vec![0.0; n];
            for (&j, &v) in support.iter().zip(&coef) {
                s[j] = v;
            }
            s
        };
        let hx = sys.matrix.matvec(&s);
        let res: Vec<f64> = hx.iter().zip(sys.rhs()).map(|(a, b)| a - b).collect();
        if norm2(&res) <= eq_tol {
            let l1: f64 = s.iter().map(|v| v.abs()).sum();
            if best.as_ref().is_none_or(|(bl1, _)| l1 < *bl1) {
                best = Some((l1, s));
            }
        }
    }
    best.map(|(_, s)| s)
}
