//! Small dense linear algebra kernel.
//!
//! Everything here works on [`Matrix`], a row-major `f64` matrix. The sizes
//! used by the controllers in this crate are tiny (n ≤ ~20), so the
//! algorithms favour robustness over asymptotic speed: cyclic Jacobi for
//! symmetric eigenvalues, a dense vectorized solve for the Lyapunov equation
//! and a Routh-Hurwitz test on the characteristic polynomial.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use thiserror::Error;

/// Tolerance used when a caller does not supply one.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Errors raised by the linear algebra kernel.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("dimension mismatch in {context}: {left:?} vs {right:?}")]
    DimensionMismatch {
        context: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not Hurwitz; the Lyapunov equation has no positive definite solution")]
    NotHurwitz,
    #[error("linear system is singular")]
    Singular,
}

/// Dense row-major matrix of finite reals.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                context: "from_vec",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from a slice of rows. All rows must share a length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            if row.len() != c {
                return Err(LinalgError::DimensionMismatch {
                    context: "from_rows",
                    left: (1, c),
                    right: (1, row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Matrix::from_vec(r, c, data)
    }

    pub fn column(v: &[f64]) -> Self {
        Matrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Row-major view of the entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                context: "matmul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// `y = self * x` written into `out`.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix, LinalgError> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix, LinalgError> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        rhs: &Matrix,
        context: &'static str,
        op: impl Fn(f64, f64) -> f64,
    ) -> Result<Matrix, LinalgError> {
        if self.shape() != rhs.shape() {
            return Err(LinalgError::DimensionMismatch {
                context,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| op(*a, *b)).collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest `|m_ij - m_ji|`; `None` for non-square input.
    pub fn asymmetry(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        Some(worst)
    }

    /// `(self + selfᵀ) / 2`.
    pub fn symmetrized(&self) -> Matrix {
        let t = self.transpose();
        let mut s = self.clone();
        for (a, b) in s.data.iter_mut().zip(&t.data) {
            *a = 0.5 * (*a + *b);
        }
        s
    }

    /// Stacks `[[a, b], [c, d]]`; each block row/column must agree in size.
    /// Empty blocks (0 rows or columns) are allowed.
    pub fn block2x2(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Result<Matrix, LinalgError> {
        let top = a.rows;
        let bottom = c.rows;
        let left = a.cols;
        let right = b.cols;
        let check = |ok: bool, context, l: &Matrix, r: &Matrix| {
            if ok {
                Ok(())
            } else {
                Err(LinalgError::DimensionMismatch {
                    context,
                    left: l.shape(),
                    right: r.shape(),
                })
            }
        };
        check(b.rows == top, "block2x2 top row", a, b)?;
        check(d.rows == bottom, "block2x2 bottom row", c, d)?;
        check(c.cols == left, "block2x2 left column", a, c)?;
        check(d.cols == right, "block2x2 right column", b, d)?;
        let mut out = Matrix::zeros(top + bottom, left + right);
        for i in 0..top {
            for j in 0..left {
                out[(i, j)] = a[(i, j)];
            }
            for j in 0..right {
                out[(i, left + j)] = b[(i, j)];
            }
        }
        for i in 0..bottom {
            for j in 0..left {
                out[(top + i, j)] = c[(i, j)];
            }
            for j in 0..right {
                out[(top + i, left + j)] = d[(i, j)];
            }
        }
        Ok(out)
    }

    fn require_square(&self) -> Result<usize, LinalgError> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    fn require_symmetric(&self, tol: f64) -> Result<usize, LinalgError> {
        let n = self.require_square()?;
        let asym = self.asymmetry().unwrap_or(0.0);
        if asym > tol * self.max_abs().max(1.0) {
            return Err(LinalgError::NotSymmetric { asymmetry: asym });
        }
        Ok(n)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Euclidean norm of a vector.
pub fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|a| a * a).sum())
}

/// Eigenvalues of a symmetric matrix in nondecreasing order.
///
/// Cyclic Jacobi: sweep every off-diagonal pair, annihilating it with a plane
/// rotation, until the off-diagonal mass is negligible relative to the
/// Frobenius norm.
pub fn sym_eigenvalues(m: &Matrix, tol: f64) -> Result<Vec<f64>, LinalgError> {
    let n = m.require_symmetric(tol)?;
    let mut a = m.symmetrized();
    let frob2: f64 = a.data.iter().map(|v| v * v).sum();
    if frob2 == 0.0 {
        return Ok(vec![0.0; n]);
    }
    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off <= 1e-32 * frob2 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = libm::copysign(1.0, theta) / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// `sqrt(λ_max(mᵀm))`, using whichever Gram matrix is smaller.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = if m.rows <= m.cols {
        m.matmul(&m.transpose())
    } else {
        m.transpose().matmul(m)
    }
    .expect("gram matrix dimensions agree");
    let eig = sym_eigenvalues(&gram.symmetrized(), DEFAULT_TOL).expect("gram matrix is symmetric");
    libm::sqrt(eig.last().copied().unwrap_or(0.0).max(0.0))
}

/// True iff every eigenvalue of the symmetric matrix exceeds `tol`.
pub fn is_positive_definite(m: &Matrix, tol: f64) -> Result<bool, LinalgError> {
    let eig = sym_eigenvalues(m, tol)?;
    Ok(eig.first().is_none_or(|&l| l > tol))
}

/// Largest eigenvalue of a symmetric matrix.
pub fn lambda_max(m: &Matrix, tol: f64) -> Result<f64, LinalgError> {
    Ok(sym_eigenvalues(m, tol)?.last().copied().unwrap_or(0.0))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn lambda_min(m: &Matrix, tol: f64) -> Result<f64, LinalgError> {
    Ok(sym_eigenvalues(m, tol)?.first().copied().unwrap_or(0.0))
}

/// Coefficients `[1, c1, ..., cn]` of `det(sI - m) = s^n + c1 s^(n-1) + ... + cn`
/// (Faddeev-LeVerrier recursion).
pub fn characteristic_polynomial(m: &Matrix) -> Result<Vec<f64>, LinalgError> {
    let n = m.require_square()?;
    let mut coeffs = vec![1.0];
    let mut mk = Matrix::identity(n);
    for k in 1..=n {
        let am = m.matmul(&mk)?;
        let c = -am.trace() / k as f64;
        coeffs.push(c);
        mk = am;
        for i in 0..n {
            mk[(i, i)] += c;
        }
    }
    Ok(coeffs)
}

/// True iff every eigenvalue of `m` has a strictly negative real part.
///
/// Routh-Hurwitz on the characteristic polynomial: the first column of the
/// Routh array must stay strictly positive. Entries within `1e-12` (relative)
/// of zero count as marginal and fail the test.
pub fn is_hurwitz(m: &Matrix) -> Result<bool, LinalgError> {
    let n = m.require_square()?;
    if n == 0 {
        return Ok(true);
    }
    let coeffs = characteristic_polynomial(m)?;
    let scale = coeffs.iter().fold(0.0_f64, |acc, c| acc.max(c.abs()));
    let eps = 1e-12 * scale.max(1.0);
    if coeffs.iter().any(|&c| c <= eps) {
        return Ok(false);
    }
    let mut prev: Vec<f64> = coeffs.iter().step_by(2).copied().collect();
    let mut cur: Vec<f64> = coeffs.iter().skip(1).step_by(2).copied().collect();
    for _ in 0..n {
        let pivot = match cur.first() {
            Some(&p) => p,
            None => break,
        };
        if pivot <= eps {
            return Ok(false);
        }
        let width = prev.len().max(cur.len());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        let next: Vec<f64> = (0..width.saturating_sub(1))
            .map(|i| (pivot * get(&prev, i + 1) - prev[0] * get(&cur, i + 1)) / pivot)
            .collect();
        let next: Vec<f64> = trim_trailing_zeros(next);
        prev = cur;
        cur = next;
    }
    Ok(true)
}

fn trim_trailing_zeros(mut v: Vec<f64>) -> Vec<f64> {
    while v.len() > 1 && v.last() == Some(&0.0) {
        v.pop();
    }
    v
}

/// Solves `aᵀP + Pa = -q` for symmetric `P`.
///
/// The unknowns are the `n(n+1)/2` upper-triangular entries of `P`; each
/// equation is one upper-triangular entry of the residual. The resulting
/// dense system is solved by LU with partial pivoting.
pub fn solve_lyapunov(a: &Matrix, q: &Matrix) -> Result<Matrix, LinalgError> {
    let n = a.require_square()?;
    if q.shape() != (n, n) {
        return Err(LinalgError::DimensionMismatch {
            context: "solve_lyapunov",
            left: a.shape(),
            right: q.shape(),
        });
    }
    q.require_symmetric(DEFAULT_TOL)?;
    if !is_hurwitz(a)? {
        return Err(LinalgError::NotHurwitz);
    }
    let m = n * (n + 1) / 2;
    let idx = |i: usize, j: usize| {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * n - i * (i + 1) / 2 + j
    };
    let mut sys = Matrix::zeros(m, m);
    let mut rhs = vec![0.0; m];
    // residual entry (i,j) = Σ_k a_ki P_kj + Σ_k P_ik a_kj
    for i in 0..n {
        for j in i..n {
            let row = idx(i, j);
            for k in 0..n {
                sys[(row, idx(k, j))] += a[(k, i)];
                sys[(row, idx(i, k))] += a[(k, j)];
            }
            rhs[row] = -0.5 * (q[(i, j)] + q[(j, i)]);
        }
    }
    let sol = lu_solve(sys, rhs)?;
    let mut p = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            p[(i, j)] = sol[idx(i, j)];
        }
    }
    Ok(p)
}

/// Solves `m x = b` by Gaussian elimination with partial pivoting.
pub fn lu_solve(mut m: Matrix, mut b: Vec<f64>) -> Result<Vec<f64>, LinalgError> {
    let n = m.require_square()?;
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            context: "lu_solve",
            left: m.shape(),
            right: (b.len(), 1),
        });
    }
    let scale = m.max_abs();
    for col in 0..n {
        let (pivot_row, pivot_abs) =
            (col..n)
                .map(|r| (r, m[(r, col)].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs <= 1e-14 * scale || pivot_abs == 0.0 {
            return Err(LinalgError::Singular);
        }
        if pivot_row != col {
            for j in 0..n {
                m.data.swap(col * n + j, pivot_row * n + j);
            }
            b.swap(col, pivot_row);
        }
        let pivot = m[(col, col)];
        for r in (col + 1)..n {
            let factor = m[(r, col)] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                m.data[r * n + j] -= factor * m.data[col * n + j];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|j| m[(i, j)] * x[j]).sum();
        x[i] = (b[i] - s) / m[(i, i)];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn diagonal_eigenvalues_are_sorted() {
        let eig = sym_eigenvalues(&Matrix::diag(&[3.0, 1.0, 2.0]), DEFAULT_TOL).unwrap();
        assert_eq!(eig, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn swap_matrix_eigenvalues() {
        let eig = sym_eigenvalues(&m(&[&[0.0, 1.0], &[1.0, 0.0]]), DEFAULT_TOL).unwrap();
        assert!((eig[0] + 1.0).abs() < 1e-14);
        assert!((eig[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_rejects_bad_shapes() {
        let rect = Matrix::zeros(2, 3);
        assert!(matches!(
            sym_eigenvalues(&rect, DEFAULT_TOL),
            Err(LinalgError::NotSquare { .. })
        ));
        let asym = m(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(
            sym_eigenvalues(&asym, DEFAULT_TOL),
            Err(LinalgError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn spectral_norm_of_identity_and_feedback_gain() {
        assert!((spectral_norm(&Matrix::identity(2)) - 1.0).abs() < 1e-15);
        let bk = m(&[&[0.0], &[1.0]]).matmul(&m(&[&[1.0, -4.0]])).unwrap();
        // |BK| = |B||K| = sqrt(17)
        assert!((spectral_norm(&bk) - 17f64.sqrt()).abs() < 1e-12);
        assert!((spectral_norm(&bk) - 4.1231).abs() < 1e-4);
    }

    #[test]
    fn positive_definiteness() {
        assert!(is_positive_definite(&Matrix::identity(3), DEFAULT_TOL).unwrap());
        assert!(!is_positive_definite(&m(&[&[1.0, 2.0], &[2.0, 1.0]]), DEFAULT_TOL).unwrap());
        assert!(is_positive_definite(&m(&[&[1.0, 2.0], &[0.0, 1.0]]), DEFAULT_TOL).is_err());
    }

    #[test]
    fn lyapunov_of_negative_identity() {
        let p = solve_lyapunov(&Matrix::identity(2).scale(-1.0), &Matrix::identity(2)).unwrap();
        let expected = Matrix::identity(2).scale(0.5);
        assert!(p.sub(&expected).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn lyapunov_rejects_unstable_and_mismatched() {
        let unstable = m(&[&[0.0, 1.0], &[-2.0, 3.0]]);
        assert_eq!(
            solve_lyapunov(&unstable, &Matrix::identity(2)),
            Err(LinalgError::NotHurwitz)
        );
        assert!(matches!(
            solve_lyapunov(&Matrix::identity(2).scale(-1.0), &Matrix::identity(3)),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hurwitz_examples() {
        assert!(is_hurwitz(&m(&[&[0.0, 1.0], &[-1.0, -1.0]])).unwrap());
        assert!(!is_hurwitz(&m(&[&[0.0, 1.0], &[-2.0, 3.0]])).unwrap());
        // pure oscillator: marginal, not Hurwitz
        assert!(!is_hurwitz(&m(&[&[0.0, 1.0], &[-1.0, 0.0]])).unwrap());
        assert!(is_hurwitz(&Matrix::diag(&[-1.0, -2.0, -3.0, -0.5])).unwrap());
        assert!(!is_hurwitz(&Matrix::diag(&[-1.0, -2.0, 0.1])).unwrap());
        // complex pair with positive real part hidden behind a stable pole
        let a = m(&[&[-5.0, 0.0, 0.0], &[0.0, 0.1, 2.0], &[0.0, -2.0, 0.1]]);
        assert!(!is_hurwitz(&a).unwrap());
    }

    #[test]
    fn characteristic_polynomial_of_companion() {
        // s^2 + s + 1
        let c = characteristic_polynomial(&m(&[&[0.0, 1.0], &[-1.0, -1.0]])).unwrap();
        assert_eq!(c, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn block_assembly_checks_shapes() {
        let a = Matrix::identity(2);
        let b = Matrix::zeros(2, 1);
        let c = Matrix::zeros(1, 2);
        let d = Matrix::identity(1);
        let full = Matrix::block2x2(&a, &b, &c, &d).unwrap();
        assert_eq!(full, Matrix::identity(3));
        assert!(Matrix::block2x2(&a, &b, &c, &Matrix::identity(2)).is_err());
    }

    #[test]
    fn from_vec_rejects_nan() {
        assert_eq!(Matrix::from_vec(1, 1, vec![f64::NAN]), Err(LinalgError::NonFinite));
    }
}
