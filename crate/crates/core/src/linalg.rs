//! Small dense linear algebra: 3-vectors, row-major matrices, least squares
//! via the Moore–Penrose pseudoinverse, and symmetric eigendecomposition.
//!
//! Everything here targets the tiny systems of the localization pipeline
//! (at most a few dozen rows, columns ≤ 16). All types are immutable values
//! and all operations are pure functions.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Relative singular-value threshold below which a matrix is treated as
/// rank-deficient (degenerate buoy geometry rather than round-off).
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Errors from linear-algebra operations.
#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// Matrix does not have full column rank (smallest singular value below
    /// `RANK_TOLERANCE` times the largest).
    RankDeficient,
    /// Input to the symmetric eigensolver is not symmetric within tolerance.
    NotSymmetric,
    /// Square system has no unique solution.
    Singular,
    /// Operand dimensions are incompatible.
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::RankDeficient => write!(f, "matrix is rank-deficient"),
            LinalgError::NotSymmetric => write!(f, "matrix is not symmetric"),
            LinalgError::Singular => write!(f, "matrix is singular"),
            LinalgError::ShapeMismatch { expected, got } => {
                write!(
                    f,
                    "shape mismatch: expected {}x{}, got {}x{}",
                    expected.0, expected.1, got.0, got.1
                )
            }
        }
    }
}

impl std::error::Error for LinalgError {}

// ──────────────────────────────── Vec3 ────────────────────────────────

/// A 3-D vector in meters (or m/s when used as a velocity).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3 {
            x: a[0],
            y: a[1],
            z: a[2],
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction, or `None` for a (near-)zero vector.
    pub fn unit(self) -> Option<Vec3> {
        let n = self.norm();
        if n < 1e-12 {
            None
        } else {
            Some(self * (1.0 / n))
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

// ─────────────────────────────── Matrix ───────────────────────────────

/// A dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
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

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Matrix::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Build from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
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

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
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

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn add_mat(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "add dimension mismatch"
        );
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *a += b;
        }
        out
    }

    pub fn sub_mat(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "sub dimension mismatch"
        );
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(rhs.data.iter()) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Matrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn trace(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "trace of non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// ½(M + Mᵀ); used to keep covariances symmetric after products.
    pub fn symmetrized(&self) -> Matrix {
        assert_eq!(self.rows, self.cols, "symmetrized of non-square matrix");
        let mut out = Matrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = 0.5 * (self[(i, j)] + self[(j, i)]);
            }
        }
        out
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self[(i, j)] - self[(j, i)]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Extract the square block of size `n` starting at (`r0`, `c0`).
    pub fn block(&self, r0: usize, c0: usize, n_rows: usize, n_cols: usize) -> Matrix {
        assert!(
            r0 + n_rows <= self.rows && c0 + n_cols <= self.cols,
            "block out of range"
        );
        Matrix::from_fn(n_rows, n_cols, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Solve the square system `self · X = rhs` by Gaussian elimination with
    /// partial pivoting.
    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix, LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::ShapeMismatch {
                expected: (self.rows, self.rows),
                got: (self.rows, self.cols),
            });
        }
        if rhs.rows != self.rows {
            return Err(LinalgError::ShapeMismatch {
                expected: (self.rows, rhs.cols),
                got: (rhs.rows, rhs.cols),
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        let scale = self.max_abs().max(1.0);
        for col in 0..n {
            // Partial pivot.
            let mut pivot_row = col;
            let mut pivot_val = a[(col, col)].abs();
            for r in (col + 1)..n {
                let v = a[(r, col)].abs();
                if v > pivot_val {
                    pivot_val = v;
                    pivot_row = r;
                }
            }
            if pivot_val <= 1e-13 * scale {
                return Err(LinalgError::Singular);
            }
            if pivot_row != col {
                for j in 0..n {
                    let tmp = a[(col, j)];
                    a[(col, j)] = a[(pivot_row, j)];
                    a[(pivot_row, j)] = tmp;
                }
                for j in 0..b.cols {
                    let tmp = b[(col, j)];
                    b[(col, j)] = b[(pivot_row, j)];
                    b[(pivot_row, j)] = tmp;
                }
            }
            let inv_pivot = 1.0 / a[(col, col)];
            for r in (col + 1)..n {
                let factor = a[(r, col)] * inv_pivot;
                if factor == 0.0 {
                    continue;
                }
                for j in col..n {
                    let v = a[(col, j)];
                    a[(r, j)] -= factor * v;
                }
                for j in 0..b.cols {
                    let v = b[(col, j)];
                    b[(r, j)] -= factor * v;
                }
            }
        }
        // Back substitution.
        let mut x = Matrix::zeros(n, b.cols);
        for j in 0..b.cols {
            for i in (0..n).rev() {
                let mut acc = b[(i, j)];
                for k in (i + 1)..n {
                    acc -= a[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = acc / a[(i, i)];
            }
        }
        Ok(x)
    }

    /// Moore–Penrose pseudoinverse of a full-column-rank matrix.
    ///
    /// Computed as V·Λ⁻¹·Vᵀ·Aᵀ from the eigendecomposition of AᵀA; the
    /// singular values σᵢ = √λᵢ drive the rank check: σ_min below
    /// `RANK_TOLERANCE`·σ_max means degenerate geometry.
    pub fn pseudoinverse(&self) -> Result<Matrix, LinalgError> {
        if self.rows < self.cols {
            return Err(LinalgError::RankDeficient);
        }
        let at = self.transpose();
        let ata = at.matmul(self);
        let eig = sym_eigen(&ata.symmetrized())?;
        let sigma_max = eig.values[0].max(0.0).sqrt();
        let sigma_min = eig.values[eig.values.len() - 1].max(0.0).sqrt();
        if sigma_max == 0.0 || sigma_min <= RANK_TOLERANCE * sigma_max {
            return Err(LinalgError::RankDeficient);
        }
        // (AᵀA)⁻¹ = V·diag(1/λ)·Vᵀ
        let n = self.cols;
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += eig.vectors[(i, k)] * eig.vectors[(j, k)] / eig.values[k];
                }
                inv[(i, j)] = acc;
            }
        }
        Ok(inv.matmul(&at))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Least-squares solution of `a·x = b` for a full-column-rank `a` with at
/// least as many rows as columns.
pub fn solve_least_squares(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if a.rows() < a.cols() {
        return Err(LinalgError::RankDeficient);
    }
    if b.len() != a.rows() {
        return Err(LinalgError::ShapeMismatch {
            expected: (a.rows(), 1),
            got: (b.len(), 1),
        });
    }
    let pinv = a.pseudoinverse()?;
    Ok(pinv.mul_vec(b))
}

// ─────────────────────── symmetric eigendecomposition ───────────────────────

/// Result of [`sym_eigen`]: eigenvalues in descending order with the matching
/// orthonormal eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues descending; `m · vᵢ = λᵢ · vᵢ` and `VᵀV = I` hold to
/// machine precision for the tiny matrices used here.
pub fn sym_eigen(m: &Matrix) -> Result<SymEigen, LinalgError> {
    if m.rows() != m.cols() {
        return Err(LinalgError::NotSymmetric);
    }
    let sym_tol = 1e-8 * (1.0 + m.max_abs());
    if !m.is_symmetric(sym_tol) {
        return Err(LinalgError::NotSymmetric);
    }
    let n = m.rows();
    let mut a = m.symmetrized();
    let mut v = Matrix::identity(n);

    let off_diag_sq = |a: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[(i, j)] * a[(i, j)];
            }
        }
        s
    };
    let fro_sq: f64 = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)] * a[(i, j)]).sum::<f64>())
        .sum();
    let target = (1e-30_f64).max(fro_sq * 1e-28);

    for _sweep in 0..64 {
        if off_diag_sq(&a) <= target {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A ← JᵀAJ applied to rows/cols p and q.
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
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(SymEigen { values, vectors })
}
