//! Shared numerical kernel: dense linear solves, bracketed root finding and
//! central finite differences.
//!
//! Everything here is a pure function of its inputs. The market sizes this
//! crate deals with are small (a handful to a few hundred providers), so the
//! linear algebra is dense and direct.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("matrix is {rows}x{cols}, expected a square system of size {expected}")]
    Shape {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("row {row} is not strictly diagonally dominant (|diag| = {diag}, off-diagonal sum = {off})")]
    NotDiagonallyDominant { row: usize, diag: f64, off: f64 },
    #[error("zero pivot encountered at row {row}")]
    Singular { row: usize },
    #[error("linear solve residual {residual:e} exceeds tolerance {bound:e}")]
    Residual { residual: f64, bound: f64 },
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("function value is NaN at {at}")]
    NotANumber { at: f64 },
}

/// Solver tolerances shared by every routine in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Absolute tolerance on a root residual or on the final bracket width.
    pub root_tol: f64,
    /// Residual tolerance for linear solves, scaled by `1 + ‖rhs‖∞`.
    pub lin_tol: f64,
    /// Relative step for central differences.
    pub fd_step: f64,
    /// Sup-norm tolerance between consecutive fixed-point iterates.
    pub fixpoint_tol: f64,
    pub max_iter: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            root_tol: 1e-10,
            lin_tol: 1e-10,
            fd_step: 1e-6,
            fixpoint_tol: 1e-9,
            max_iter: 10_000,
        }
    }
}

impl ToleranceConfig {
    /// Names every field that violates its range; empty when the config is usable.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, v) in [
            ("root_tol", self.root_tol),
            ("lin_tol", self.lin_tol),
            ("fd_step", self.fd_step),
            ("fixpoint_tol", self.fixpoint_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("tolerances.{name} must be finite and > 0, got {v}"));
            }
        }
        if self.max_iter < 1 {
            out.push("tolerances.max_iter must be >= 1".to_owned());
        }
        out
    }
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    /// Builds a matrix from nested rows. Returns `None` for ragged input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Option<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != n_cols {
                return None;
            }
            data.extend_from_slice(r);
        }
        Some(Self {
            rows: n_rows,
            cols: n_cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Sum of the off-diagonal magnitudes of row `i`.
    pub fn off_diagonal_row_sum(&self, i: usize) -> f64 {
        self.row(i)
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| v.abs())
            .sum()
    }

    /// Sum of the off-diagonal magnitudes of column `j`.
    pub fn off_diagonal_col_sum(&self, j: usize) -> f64 {
        (0..self.rows)
            .filter(|&i| i != j)
            .map(|i| self[(i, j)].abs())
            .sum()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

fn check_dominance(m: &Matrix) -> Result<(), NumericsError> {
    for i in 0..m.rows() {
        let diag = m[(i, i)].abs();
        let off = m.off_diagonal_row_sum(i);
        if !(diag > off) {
            return Err(NumericsError::NotDiagonallyDominant { row: i, diag, off });
        }
    }
    Ok(())
}

/// Solves `m · x = rhs` for a strictly row-diagonally-dominant `m`.
///
/// Gaussian elimination without pivoting: strict dominance is preserved by
/// every elimination step, so all pivots stay nonzero. The residual
/// `‖m·x − rhs‖∞` is checked against `lin_tol · (1 + ‖rhs‖∞)`.
pub fn solve_linear(m: &Matrix, rhs: &[f64], lin_tol: f64) -> Result<Vec<f64>, NumericsError> {
    let n = rhs.len();
    if m.rows() != n || m.cols() != n {
        return Err(NumericsError::Shape {
            rows: m.rows(),
            cols: m.cols(),
            expected: n,
        });
    }
    check_dominance(m)?;

    let mut a = m.clone();
    let mut b = rhs.to_vec();
    for k in 0..n {
        let pivot = a[(k, k)];
        if pivot == 0.0 {
            return Err(NumericsError::Singular { row: k });
        }
        for i in (k + 1)..n {
            let factor = a[(i, k)] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in k..n {
                a[(i, j)] -= factor * a[(k, j)];
            }
            b[i] -= factor * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let tail: f64 = ((i + 1)..n).map(|j| a[(i, j)] * x[j]).sum();
        x[i] = (b[i] - tail) / a[(i, i)];
    }

    let residual = sup_distance(&m.mul_vec(&x), rhs);
    let bound = lin_tol * (1.0 + sup_norm(rhs));
    if !(residual <= bound) {
        return Err(NumericsError::Residual { residual, bound });
    }
    Ok(x)
}

/// Inverse of a strictly row-diagonally-dominant matrix, one column per solve.
pub fn invert(m: &Matrix, lin_tol: f64) -> Result<Matrix, NumericsError> {
    let n = m.rows();
    let mut inv = Matrix::zeros(n, n);
    let mut unit = vec![0.0; n];
    for j in 0..n {
        unit.iter_mut().for_each(|u| *u = 0.0);
        unit[j] = 1.0;
        let col = solve_linear(m, &unit, lin_tol)?;
        for (i, v) in col.into_iter().enumerate() {
            inv[(i, j)] = v;
        }
    }
    Ok(inv)
}

/// Bisection on `[lo, hi]` for a continuous `f` with `f(lo)·f(hi) ≤ 0`.
///
/// Stops when `|f(mid)| ≤ tol`, when the bracket is no wider than `tol`, or
/// when the bracket can no longer be split in floating point. Passing
/// `tol = 0.0` therefore bisects to full machine resolution. Infinite values
/// at an endpoint are fine (they still carry a sign); NaN is an error.
pub fn find_root_bisection<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo.is_nan() {
        return Err(NumericsError::NotANumber { at: lo });
    }
    if f_hi.is_nan() {
        return Err(NumericsError::NotANumber { at: hi });
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(NumericsError::NoSignChange {
            lo,
            hi,
            f_lo,
            f_hi,
        });
    }

    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid.is_nan() {
            return Err(NumericsError::NotANumber { at: mid });
        }
        if f_mid.abs() <= tol {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol {
            return Ok(lo + 0.5 * (hi - lo));
        }
    }
}

/// Step used by [`finite_difference`] at `x`.
pub fn fd_step_at(x: f64, fd_step: f64) -> f64 {
    fd_step * x.abs().max(1.0)
}

/// Central difference `(f(x+h) − f(x−h)) / 2h` with `h = fd_step · max(1, |x|)`.
pub fn finite_difference<F>(f: F, x: f64, fd_step: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let h = fd_step_at(x, fd_step);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central second difference `(f(x+h) − 2f(x) + f(x−h)) / h²`.
pub fn second_difference<F>(f: F, x: f64, step: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let h = fd_step_at(x, step);
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// Central mixed difference for `∂²f/∂x∂y` at `(x, y)`.
pub fn mixed_difference<F>(f: F, x: f64, y: f64, step: f64) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let hx = fd_step_at(x, step);
    let hy = fd_step_at(y, step);
    (f(x + hx, y + hy) - f(x + hx, y - hy) - f(x - hx, y + hy) + f(x - hx, y - hy))
        / (4.0 * hx * hy)
}
