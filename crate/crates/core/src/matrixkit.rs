//! Dense complex matrices and the handful of kernels the rest of the crate
//! needs: products, Kronecker products, unitarity checks, PSD square roots,
//! partial traces, trace distance and isometry completion.
//!
//! Storage is row-major. Nothing here exploits sparsity; the walks we
//! simulate stay well below a few thousand dimensions per step.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{OqwError, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Eigenvalues above this (negative) threshold are treated as roundoff.
pub const PSD_CLAMP: f64 = 1e-10;
/// Hermiticity tolerance for PSD roots and trace distances.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Candidates in the Gram-Schmidt completion with a smaller residual are skipped.
const COMPLETION_SKIP: f64 = 1e-8;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(OqwError::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from real rows. Panics on ragged input.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        Self::from_fn(rows.len(), ncols, |r, c| C64::new(rows[r][c], 0.0))
    }

    /// Builds a matrix from complex rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
        Self::from_fn(rows.len(), ncols, |r, c| rows[r][c])
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    /// Column vector from amplitudes.
    pub fn column(values: &[C64]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    /// `|v><v|` for a ket given by its amplitudes.
    pub fn projector(ket: &[C64]) -> Self {
        Self::from_fn(ket.len(), ket.len(), |r, c| ket[r] * ket[c].conj())
    }

    /// `|i><j|` in dimension `n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, alpha: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * alpha).collect(),
        }
    }

    pub fn scale_real(&self, alpha: f64) -> Self {
        self.scale(C64::new(alpha, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Product with dimension checking.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(OqwError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `U rho U^dag`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        &(u * self) * &u.adjoint()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_abs_diff: shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Copies out the sub-block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |r, c| self[(r0 + r, c0 + c)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for r in 0..b.rows {
            for c in 0..b.cols {
                self[(r0 + r, c0 + c)] = b[(r, c)];
            }
        }
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(blocks: &[Self]) -> Result<Self> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        if blocks.iter().any(|b| b.cols != cols) {
            return Err(OqwError::DimensionMismatch(
                "vstack needs equal column counts".into(),
            ));
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for b in blocks {
            data.extend_from_slice(&b.data);
        }
        Ok(Self { rows, cols, data })
    }

    /// Direct sum `self ⊕ I_k`.
    pub fn pad_identity(&self, k: usize) -> Self {
        let n = self.rows + k;
        let mut m = Self::identity(n);
        m.set_block(0, 0, self);
        m
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on a shape mismatch; use [`ComplexMatrix::matmul`] to get an error.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix sum shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "matrix difference shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Pauli and other small constant gates.
pub mod gates {
    use super::*;

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::diag_real(&[1.0, -1.0])
    }

    pub fn hadamard() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real_rows(&[vec![s, s], vec![s, -s]])
    }

    /// Standard `exp(-i theta Y / 2)`.
    pub fn ry(theta: f64) -> ComplexMatrix {
        let (s, c) = (theta / 2.0).sin_cos();
        ComplexMatrix::from_real_rows(&[vec![c, -s], vec![s, c]])
    }
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let x = a[(ar, ac)];
            if x == ZERO {
                continue;
            }
            for br in 0..b.rows {
                for bc in 0..b.cols {
                    out[(ar * b.rows + br, ac * b.cols + bc)] = x * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[ComplexMatrix]) -> ComplexMatrix {
    factors
        .iter()
        .fold(ComplexMatrix::identity(1), |acc, f| kron(&acc, f))
}

/// `max |U^dag U - I| <= tol`.
pub fn is_unitary(u: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(unitarity_deviation(u)? <= tol)
}

pub fn unitarity_deviation(u: &ComplexMatrix) -> Result<f64> {
    if !u.is_square() {
        return Err(OqwError::NotSquare {
            rows: u.rows,
            cols: u.cols,
        });
    }
    let g = &u.adjoint() * u;
    Ok(g.max_abs_diff(&ComplexMatrix::identity(u.rows)))
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching unit eigenvectors as columns.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !a.is_square() {
        return Err(OqwError::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let dev = a.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(OqwError::NotHermitian { deviation: dev });
    }
    if a.rows == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    // symmetrize so the solver sees an exactly Hermitian input
    let sym = (&a.to_nalgebra() + a.to_nalgebra().adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..a.rows).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = ComplexMatrix::from_nalgebra(&eig.eigenvectors);
    let sorted = ComplexMatrix::from_fn(a.rows, a.rows, |r, c| vecs[(r, order[c])]);
    Ok((values, sorted))
}

pub fn eigenvalues_hermitian(a: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(a).map(|(v, _)| v)
}

/// Hermitian PSD square root. Eigenvalues in `[-1e-10, 0)` are clamped to zero.
pub fn psd_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, vecs) = hermitian_eigen(a)?;
    let min = values.first().copied().unwrap_or(0.0);
    if min < -PSD_CLAMP {
        return Err(OqwError::NotPositive {
            min_eigenvalue: min,
        });
    }
    let n = a.rows;
    let roots: Vec<f64> = values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let s = ComplexMatrix::from_fn(n, n, |r, c| {
        (0..n)
            .map(|k| vecs[(r, k)] * roots[k] * vecs[(c, k)].conj())
            .sum()
    });
    // exact Hermitian output
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        (s[(r, c)] + s[(c, r)].conj()) * 0.5
    }))
}

/// Largest singular value.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    let g = &a.adjoint() * a;
    let values = eigenvalues_hermitian(&g).expect("A^dag A is Hermitian");
    values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Reduced matrix over the factors listed in `keep` (any order; the output
/// keeps the original factor order).
pub fn partial_trace(rho: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !rho.is_square() || rho.rows != total {
        return Err(OqwError::DimensionMismatch(format!(
            "factor dims {dims:?} (product {total}) do not match {}x{} matrix",
            rho.rows, rho.cols
        )));
    }
    if let Some(&k) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(OqwError::DimensionMismatch(format!(
            "kept factor {k} out of range for {} factors",
            dims.len()
        )));
    }
    let kept: Vec<bool> = (0..dims.len()).map(|f| keep.contains(&f)).collect();
    let kept_dim: usize = dims
        .iter()
        .zip(&kept)
        .filter(|(_, &k)| k)
        .map(|(d, _)| d)
        .product();
    let traced_dim = total / kept_dim.max(1);

    // split a full index into (kept index, traced index)
    let split = |mut idx: usize| {
        let mut k_idx = 0;
        let mut t_idx = 0;
        let mut k_stride = 1;
        let mut t_stride = 1;
        for f in (0..dims.len()).rev() {
            let digit = idx % dims[f];
            idx /= dims[f];
            if kept[f] {
                k_idx += digit * k_stride;
                k_stride *= dims[f];
            } else {
                t_idx += digit * t_stride;
                t_stride *= dims[f];
            }
        }
        (k_idx, t_idx)
    };
    let parts: Vec<(usize, usize)> = (0..total).map(split).collect();
    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for r in 0..total {
        let (kr, tr) = parts[r];
        for c in 0..total {
            let (kc, tc) = parts[c];
            if tr == tc {
                out[(kr, kc)] += rho[(r, c)];
            }
        }
    }
    debug_assert!(traced_dim * kept_dim == total);
    Ok(out)
}

/// `½‖a − b‖₁` computed from the eigenvalues of the difference.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(OqwError::DimensionMismatch(format!(
            "trace distance between {:?} and {:?}",
            a.dim(),
            b.dim()
        )));
    }
    let diff = a - b;
    let values = eigenvalues_hermitian(&diff)?;
    Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
}

/// Extends a matrix with orthonormal columns to a square unitary whose leading
/// columns are exactly `v`. Remaining columns come from Gram-Schmidt over the
/// canonical basis, in index order.
pub fn complete_isometry(v: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (n, k) = v.dim();
    if k > n {
        return Err(OqwError::DimensionMismatch(format!(
            "{n}x{k} cannot have orthonormal columns"
        )));
    }
    let gram = &v.adjoint() * v;
    let deviation = gram.max_abs_diff(&ComplexMatrix::identity(k));
    if deviation > 1e-10 {
        return Err(OqwError::NotIsometry { deviation });
    }

    let mut basis: Vec<Vec<C64>> = (0..k)
        .map(|c| (0..n).map(|r| v[(r, c)]).collect())
        .collect();
    for cand in 0..n {
        if basis.len() == n {
            break;
        }
        let mut w = vec![ZERO; n];
        w[cand] = ONE;
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let proj: C64 = b.iter().zip(&w).map(|(bi, wi)| bi.conj() * wi).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= proj * bi;
                }
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < COMPLETION_SKIP {
            continue;
        }
        for wi in &mut w {
            *wi /= norm;
        }
        basis.push(w);
    }
    if basis.len() != n {
        return Err(OqwError::Inconsistent(format!(
            "completion produced {} of {n} columns",
            basis.len()
        )));
    }
    let mut u = ComplexMatrix::from_fn(n, n, |r, c| basis[c][r]);
    // leading block copied verbatim
    u.set_block(0, 0, v);
    Ok(u)
}
