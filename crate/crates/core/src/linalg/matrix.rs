use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Returns `log2(dim)` when `dim` is a positive power of two.
pub fn qubits_for_dim(dim: usize) -> Option<usize> {
    if dim >= 2 && dim.is_power_of_two() {
        Some(dim.trailing_zeros() as usize)
    } else {
        None
    }
}

/// Dense complex matrix stored row-major.
///
/// Most matrices in this crate are `2^n x 2^n` operators on n qubits, but the
/// type itself accepts any shape so it can also carry small blocks and
/// rectangular factors.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for j in 0..dim {
            m.data[j * dim + j] = ONE;
        }
        m
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

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(
                format!("{} entries", rows * cols),
                format!("{} entries", data.len()),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::shape(
                    format!("row {r} of length {n_cols}"),
                    format!("length {}", row.len()),
                ));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: n_rows,
            cols: n_cols,
            data,
        })
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (j, &d) in diag.iter().enumerate() {
            m.data[j * n + j] = d;
        }
        m
    }

    pub fn from_real(m: &RealMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.as_slice().iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
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

    /// Number of qubits when the matrix is a square `2^n x 2^n` operator.
    pub fn n_qubits(&self) -> Option<usize> {
        if self.is_square() {
            qubits_for_dim(self.rows)
        } else {
            None
        }
    }

    /// Like [`n_qubits`](Self::n_qubits) but reports a shape error.
    pub fn require_qubits(&self) -> Result<usize> {
        self.n_qubits().ok_or_else(|| {
            Error::shape(
                "square 2^n x 2^n matrix",
                format!("{}x{}", self.rows, self.cols),
            )
        })
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows)
            .map(|r| self.data[r * self.cols + c])
            .collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols))
            .map(|j| self.data[j * self.cols + j])
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn real_part(&self) -> RealMatrix {
        RealMatrix::from_vec(
            self.rows,
            self.cols,
            self.data.iter().map(|z| z.re).collect(),
        )
    }

    pub fn imag_part(&self) -> RealMatrix {
        RealMatrix::from_vec(
            self.rows,
            self.cols,
            self.data.iter().map(|z| z.im).collect(),
        )
    }

    /// Frobenius norm of the imaginary part.
    pub fn imaginary_mass(&self) -> f64 {
        self.data.iter().map(|z| z.im * z.im).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn frobenius_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Frobenius norm of the strictly off-diagonal part.
    pub fn off_diagonal_norm(&self) -> f64 {
        let mut acc = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                if r != c {
                    acc += self.data[r * self.cols + c].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::shape(
                format!("left operand with {} columns", other.rows),
                format!("{}x{}", self.rows, self.cols),
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        let oc = other.cols;
        for r in 0..self.rows {
            let out_row = &mut out.data[r * oc..(r + 1) * oc];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * oc..(k + 1) * oc];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::shape(
                format!("vector of length {}", self.cols),
                format!("length {}", v.len()),
            ));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    /// Commutator `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.checked_sub(&other.matmul(self)?)
    }

    /// Determinant by LU factorization with partial pivoting.
    pub fn determinant(&self) -> Result<C64> {
        if !self.is_square() {
            return Err(Error::shape(
                "square matrix",
                format!("{}x{}", self.rows, self.cols),
            ));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = ONE;
        for k in 0..n {
            let mut piv = k;
            let mut best = a[k * n + k].norm();
            for r in k + 1..n {
                let v = a[r * n + k].norm();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return Ok(ZERO);
            }
            if piv != k {
                for c in 0..n {
                    a.swap(k * n + c, piv * n + c);
                }
                det = -det;
            }
            let pivot = a[k * n + k];
            det *= pivot;
            let inv = ONE / pivot;
            for r in k + 1..n {
                let f = a[r * n + k] * inv;
                if f == ZERO {
                    continue;
                }
                for c in k + 1..n {
                    let u = a[k * n + c];
                    a[r * n + c] -= f * u;
                }
            }
        }
        Ok(det)
    }

    /// `||self^dagger self - 1||_F`, or `None` for non-square input.
    pub fn unitarity_residual(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let g = self.adjoint() * self;
        Some(
            g.frobenius_distance(&Self::identity(self.rows))
                .unwrap_or(f64::INFINITY),
        )
    }

    /// `||self - self^T||_F`.
    pub fn symmetry_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.frobenius_distance(&self.transpose())
            .unwrap_or(f64::INFINITY)
    }

    /// `||self + self^dagger||_F`.
    pub fn anti_hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.zip_with(&self.adjoint(), |a, b| a + b)
            .frobenius_norm()
    }

    /// `||self - self^dagger||_F`.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.zip_with(&self.adjoint(), |a, b| a - b)
            .frobenius_norm()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |r, c| {
            self[(r / other.rows, c / other.cols)] * other[(r % other.rows, c % other.cols)]
        })
    }

    /// Tensor product of per-qubit factors; the first factor acts on the most
    /// significant bit, matching `|j> = |b_1 b_2 ... b_n>`.
    pub fn kron_all(factors: &[ComplexMatrix]) -> Result<Self> {
        let mut iter = factors.iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::Argument("empty tensor product".into()))?;
        Ok(iter.fold(first.clone(), |acc, f| acc.kron(f)))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::shape(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

// Operator forms panic on shape mismatch; use the `checked_*`/`matmul`
// methods when shapes come from untrusted input.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Mul<&ComplexMatrix> for ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        &self * rhs
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_sub(rhs)
            .expect("matrix difference shape mismatch")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Dense real matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for j in 0..dim {
            m.data[j * dim + j] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub(crate) fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.data[r * self.cols + c])
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::shape(
                format!("left operand with {} columns", other.rows),
                format!("{}x{}", self.rows, self.cols),
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        let oc = other.cols;
        for r in 0..self.rows {
            let out_row = &mut out.data[r * oc..(r + 1) * oc];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * oc..(k + 1) * oc];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `||self^T self - 1||_F`.
    pub fn orthogonality_residual(&self) -> f64 {
        let g = self
            .transpose()
            .matmul(self)
            .expect("square by construction");
        g.frobenius_distance(&Self::identity(self.cols))
    }

    pub fn determinant(&self) -> Result<f64> {
        Ok(ComplexMatrix::from_real(self).determinant()?.re)
    }

    pub fn negate_column(&mut self, c: usize) {
        for r in 0..self.rows {
            self.data[r * self.cols + c] = -self.data[r * self.cols + c];
        }
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for RealMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RealMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{:+.6} ", self[(r, c)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Real symmetric matrix stored as its lower triangle, so symmetry holds by
/// construction.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSymmetricMatrix {
    dim: usize,
    lower: Vec<f64>,
}

impl RealSymmetricMatrix {
    /// Builds from `f(i, j)` evaluated on `i >= j` only.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut lower = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in 0..=i {
                lower.push(f(i, j));
            }
        }
        Self { dim, lower }
    }

    /// Takes the symmetric part of a square matrix after checking that the
    /// antisymmetric part is below `tol * (1 + ||m||_F)`.
    pub fn from_matrix(m: &RealMatrix, tol: f64) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::shape(
                "square matrix",
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
        let asym = m.frobenius_distance(&m.transpose());
        if asym > tol * (1.0 + m.frobenius_norm()) {
            return Err(Error::Precondition(format!(
                "matrix is not symmetric (||m - m^T||_F = {asym:e})"
            )));
        }
        Ok(Self::from_fn(m.rows(), |i, j| {
            0.5 * (m[(i, j)] + m[(j, i)])
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        self.lower[hi * (hi + 1) / 2 + lo]
    }

    pub fn to_dense(&self) -> RealMatrix {
        RealMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..=i {
                let v = self.get(i, j);
                acc += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        acc.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.lower.iter().all(|x| x.is_finite())
    }
}
