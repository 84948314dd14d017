//! Dense two-phase primal simplex on standard-form problems
//! `min c'x  s.t.  A x = b, x >= 0`.
//!
//! Entering variables use Dantzig's most-negative-reduced-cost rule until
//! the objective stalls, then switch permanently to Bland's smallest-index
//! rule, which rules out cycling; ratio-test ties always resolve to the
//! smallest basis index. The tableau is dense, sized for desk-scale
//! problems.

use crate::matrix::Matrix;

#[derive(Debug)]
pub enum SimplexOutcome {
    /// Optimal basic solution (structural variables only).
    Optimal { x: Vec<f64>, objective: f64 },
    /// Phase 1 could not drive the artificial variables to zero.
    Infeasible,
    /// The objective is unbounded below (should not occur for the LPs built
    /// in this crate).
    Unbounded,
    /// Pivot budget exhausted.
    IterLimit { iterations: usize },
}

const REDUCED_COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-10;
/// Degenerate iterations tolerated before falling back to Bland's rule.
const STALL_LIMIT: usize = 40;

pub struct Simplex {
    /// Dense tableau: `rows` constraint rows followed by one objective row.
    /// Columns: structural + artificial + rhs.
    t: Vec<f64>,
    rows: usize,
    n_total: usize,
    stride: usize,
    basis: Vec<usize>,
    iterations: usize,
}

impl Simplex {
    /// `a` is rows x n_struct, `b` length rows, `c` length n_struct.
    pub fn solve(a: &Matrix, b: &[f64], c: &[f64], max_iter: usize) -> SimplexOutcome {
        let rows = a.rows();
        let n_struct = a.cols();
        let n_total = n_struct + rows; // one artificial per row
        let stride = n_total + 1;

        let mut s = Simplex {
            t: vec![0.0; (rows + 1) * stride],
            rows,
            n_total,
            stride,
            basis: Vec::with_capacity(rows),
            iterations: 0,
        };

        // Fill constraint rows, normalizing to b >= 0, with an identity
        // artificial block.
        for i in 0..rows {
            let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n_struct {
                s.t[i * stride + j] = flip * a.get(i, j);
            }
            s.t[i * stride + n_struct + i] = 1.0;
            s.t[i * stride + n_total] = flip * b[i];
            s.basis.push(n_struct + i);
        }

        // Phase 1: minimize the sum of artificials.
        let mut phase1_cost = vec![0.0; n_total];
        for j in n_struct..n_total {
            phase1_cost[j] = 1.0;
        }
        s.install_objective(&phase1_cost);
        if let Some(out) = s.run(max_iter, n_total) {
            return out;
        }
        let feas_tol = 1e-8 * (1.0 + b.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
        if s.objective_value() > feas_tol {
            return SimplexOutcome::Infeasible;
        }

        // Drive any artificial still basic (necessarily at zero level) out
        // with a degenerate pivot, so later pivots cannot lift it above
        // zero. A row with no structural support is redundant and inert.
        for i in 0..rows {
            if s.basis[i] >= n_struct {
                if let Some(j) =
                    (0..n_struct).find(|&j| s.t[i * stride + j].abs() > PIVOT_TOL)
                {
                    s.pivot(i, j);
                }
            }
        }

        // Phase 2 over structural columns only; any artificial left in the
        // basis never re-enters.
        s.install_objective(c);
        if let Some(out) = s.run(max_iter, n_struct) {
            return out;
        }

        let mut x = vec![0.0; n_struct];
        for (i, &bi) in s.basis.iter().enumerate() {
            if bi < n_struct {
                x[bi] = s.t[i * stride + n_total];
            }
        }
        let objective = s.objective_value();
        SimplexOutcome::Optimal { x, objective }
    }

    /// Write the objective row for cost vector `c` (length n_total or
    /// n_struct; missing tail entries are zero) reduced against the current
    /// basis.
    fn install_objective(&mut self, c: &[f64]) {
        let stride = self.stride;
        let orow = self.rows * stride;
        let cost = |j: usize| -> f64 { c.get(j).copied().unwrap_or(0.0) };
        for j in 0..=self.n_total {
            self.t[orow + j] = if j < self.n_total { cost(j) } else { 0.0 };
        }
        // Subtract c_B times each basic row so reduced costs of basic
        // variables are zero.
        for i in 0..self.rows {
            let cb = cost(self.basis[i]);
            if cb != 0.0 {
                let (head, tail) = self.t.split_at_mut(orow);
                let row_i = &head[i * stride..i * stride + stride];
                for (oj, rij) in tail.iter_mut().zip(row_i) {
                    *oj -= cb * rij;
                }
            }
        }
    }

    fn objective_value(&self) -> f64 {
        -self.t[self.rows * self.stride + self.n_total]
    }

    /// Pivot until optimal over columns `0..active`. Returns Some(outcome)
    /// on failure, None when optimal was reached.
    fn run(&mut self, max_iter: usize, active: usize) -> Option<SimplexOutcome> {
        let mut bland = false;
        let mut stall = 0usize;
        let mut last_objective = self.objective_value();
        loop {
            if self.iterations >= max_iter {
                return Some(SimplexOutcome::IterLimit {
                    iterations: self.iterations,
                });
            }

            let orow = self.rows * self.stride;
            let entering = if bland {
                // Smallest-index column with a negative reduced cost.
                (0..active).find(|&j| self.t[orow + j] < -REDUCED_COST_TOL)
            } else {
                // Most negative reduced cost.
                let mut best: Option<(usize, f64)> = None;
                for j in 0..active {
                    let rc = self.t[orow + j];
                    if rc < -REDUCED_COST_TOL && best.is_none_or(|(_, b)| rc < b) {
                        best = Some((j, rc));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(col) = entering else {
                return None; // optimal
            };

            // Ratio test; ties go to the row whose basic variable has the
            // smallest index.
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let aij = self.t[i * self.stride + col];
                if aij > PIVOT_TOL {
                    let ratio = self.t[i * self.stride + self.n_total] / aij;
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-12
                                || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi])
                            {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Some(SimplexOutcome::Unbounded);
            };

            self.pivot(row, col);
            self.iterations += 1;

            if !bland {
                let objective = self.objective_value();
                if objective < last_objective - 1e-12 {
                    stall = 0;
                } else {
                    stall += 1;
                    if stall > STALL_LIMIT {
                        bland = true;
                    }
                }
                last_objective = objective;
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let stride = self.stride;
        let pivot = self.t[row * stride + col];
        let inv = 1.0 / pivot;
        for v in &mut self.t[row * stride..row * stride + stride] {
            *v *= inv;
        }
        // Eliminate the pivot column from all other rows (objective row
        // included).
        for r in 0..=self.rows {
            if r == row {
                continue;
            }
            let factor = self.t[r * stride + col];
            if factor == 0.0 {
                continue;
            }
            let (lo, hi) = if r < row {
                let (a, b) = self.t.split_at_mut(row * stride);
                (&mut a[r * stride..r * stride + stride], &b[..stride])
            } else {
                let (a, b) = self.t.split_at_mut(r * stride);
                (&mut b[..stride], &a[row * stride..row * stride + stride])
            };
            for (x, p) in lo.iter_mut().zip(hi.iter()) {
                *x -= factor * p;
            }
        }
        // Clean tiny residue in the pivot column.
        for r in 0..=self.rows {
            self.t[r * stride + col] = if r == row { 1.0 } else { 0.0 };
        }
        self.basis[row] = col;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    #[test]
    fn solves_textbook_lp() {
        // min -3x - 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 (slacks added
        // by hand); optimum at (2, 6), objective -36.
        let a = Matrix::from_rows(vec![
            vec![1.0, 0.0, 1.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0, 1.0, 0.0],
            vec![3.0, 2.0, 0.0, 0.0, 1.0],
        ])
        .unwrap();
        let b = [4.0, 12.0, 18.0];
        let c = [-3.0, -5.0, 0.0, 0.0, 0.0];
        match Simplex::solve(&a, &b, &c, 1000) {
            SimplexOutcome::Optimal { x, objective } => {
                assert!((x[0] - 2.0).abs() < 1e-9);
                assert!((x[1] - 6.0).abs() < 1e-9);
                assert!((objective + 36.0).abs() < 1e-9);
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn detects_infeasible() {
        // x1 + x2 = -1 with x >= 0 normalizes to -x1 - x2 = 1: infeasible.
        let a = Matrix::from_rows(vec![vec![1.0, 1.0]]).unwrap();
        match Simplex::solve(&a, &[-1.0], &[1.0, 1.0], 100) {
            SimplexOutcome::Infeasible => {}
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn detects_unbounded() {
        // min -x1 s.t. x1 - x2 = 0: x1 can grow without bound.
        let a = Matrix::from_rows(vec![vec![1.0, -1.0]]).unwrap();
        match Simplex::solve(&a, &[0.0], &[-1.0, 0.0], 100) {
            SimplexOutcome::Unbounded => {}
            other => panic!("unexpected outcome {other:?}"),
        }
    }

    #[test]
    fn handles_negative_rhs_rows() {
        // x1 - x2 = -3, x1 + x2 = 5 -> x = (1, 4).
        let a = Matrix::from_rows(vec![vec![1.0, -1.0], vec![1.0, 1.0]]).unwrap();
        match Simplex::solve(&a, &[-3.0, 5.0], &[1.0, 1.0], 100) {
            SimplexOutcome::Optimal { x, .. } => {
                assert!((x[0] - 1.0).abs() < 1e-9);
                assert!((x[1] - 4.0).abs() < 1e-9);
            }
            other => panic!("unexpected outcome {other:?}"),
        }
    }
}
