//! Minimal dense row-major matrix plus the least-squares kernel shared by the
//! solvers. Desk-scale problems only; no sparse storage.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            data: vec![0.0; rows * cols],
            rows,
            cols,
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::Dimension(format!(
                    "row {i} has length {}, expected {c}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { data, rows: r, cols: c })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        self.iter_rows().map(|row| dot(row, x)).collect()
    }

    /// y = A^T x
    pub fn t_matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for (i, row) in self.iter_rows().enumerate() {
            let xi = x[i];
            for (yj, &aij) in y.iter_mut().zip(row) {
                *yj += xi * aij;
            }
        }
        y
    }

    /// Copy of column j.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Least squares via Householder QR: minimizes ||A x - b||_2 for A with full
/// column rank (rows >= cols). Pivot magnitudes are checked column by column
/// during elimination; the first column whose trailing norm collapses is
/// reported as rank-deficient.
pub fn lstsq(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let m = a.rows();
    let n = a.cols();
    if b.len() != m {
        return Err(Error::Dimension(format!(
            "rhs length {} does not match {} rows",
            b.len(),
            m
        )));
    }
    if m < n {
        return Err(Error::Dimension(format!(
            "least squares needs rows >= cols, got {m}x{n}"
        )));
    }

    let mut r = a.clone();
    let mut rhs = b.to_vec();

    // Scale reference for the pivot test.
    let scale: f64 = a
        .iter_rows()
        .flat_map(|row| row.iter())
        .fold(0.0_f64, |acc, &v| acc.max(v.abs()))
        .max(1e-300);
    let pivot_tol = scale * 1e-12 * (m.max(n) as f64);

    for k in 0..n {
        // Householder vector for column k, rows k..m.
        let mut alpha = 0.0;
        for i in k..m {
            alpha += r.get(i, k) * r.get(i, k);
        }
        let alpha = alpha.sqrt();
        if alpha <= pivot_tol {
            return Err(Error::RankDeficient { column: k });
        }
        let beta = if r.get(k, k) >= 0.0 { -alpha } else { alpha };
        let mut v = vec![0.0; m - k];
        v[0] = r.get(k, k) - beta;
        for i in k + 1..m {
            v[i - k] = r.get(i, k);
        }
        let vtv = dot(&v, &v);
        if vtv <= 0.0 {
            return Err(Error::RankDeficient { column: k });
        }

        // Apply H = I - 2 v v^T / (v^T v) to the trailing block and the rhs.
        for j in k..n {
            let mut s = 0.0;
            for i in k..m {
                s += v[i - k] * r.get(i, j);
            }
            let f = 2.0 * s / vtv;
            for i in k..m {
                let val = r.get(i, j) - f * v[i - k];
                r.set(i, j, val);
            }
        }
        let mut s = 0.0;
        for i in k..m {
            s += v[i - k] * rhs[i];
        }
        let f = 2.0 * s / vtv;
        for i in k..m {
            rhs[i] -= f * v[i - k];
        }
        r.set(k, k, beta);
    }

    // Back substitution on the upper-triangular block.
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for j in k + 1..n {
            s -= r.get(k, j) * x[j];
        }
        let d = r.get(k, k);
        if d.abs() <= pivot_tol {
            return Err(Error::RankDeficient { column: k });
        }
        x[k] = s / d;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lstsq_exact_square() {
        let a = Matrix::from_rows(vec![vec![1.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let x = lstsq(&a, &[3.0, 1.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lstsq_overdetermined_projects() {
        // Fit y = c over three observations: the mean.
        let a = Matrix::from_rows(vec![vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        let x = lstsq(&a, &[1.0, 2.0, 6.0]).unwrap();
        assert!((x[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lstsq_reports_first_deficient_column() {
        let a = Matrix::from_rows(vec![
            vec![1.0, 2.0, 0.0],
            vec![1.0, 2.0, 1.0],
            vec![1.0, 2.0, 0.5],
        ])
        .unwrap();
        match lstsq(&a, &[1.0, 2.0, 3.0]) {
            Err(Error::RankDeficient { column }) => assert_eq!(column, 1),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn matvec_roundtrip() {
        let a = Matrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(a.matvec(&[1.0, 1.0]), vec![3.0, 7.0, 11.0]);
        assert_eq!(a.t_matvec(&[1.0, 0.0, 1.0]), vec![6.0, 8.0]);
    }
}
