//! Small dense linear algebra.
//!
//! Everything here targets the handful of dimensions that show up in forced
//! low-order models (n up to roughly 20): a row-major [`Matrix`] generic over
//! real and complex scalars, partial-pivoting LU, cyclic Jacobi for symmetric
//! spectra, a vectorised Lyapunov solve and LTI frequency responses.

use std::fmt::Debug;
use std::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
    fn from_real(x: f64) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn from_real(x: f64) -> Self {
        x
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T: Scalar = f64> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type ComplexMatrix = Matrix<Complex64>;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_row_slice(rows: usize, cols: usize, data: &[T]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            data: data.to_vec(),
        })
    }

    /// Builds a matrix from a list of rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|x| x * c)
    }

    /// Matrix-vector product. Panics on a dimension mismatch.
    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.cols, "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.modulus()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data
            .iter()
            .map(|x| x.modulus() * x.modulus())
            .sum::<f64>()
            .sqrt()
    }
}

impl Matrix<f64> {
    /// `(A + A') / 2`.
    pub fn symmetric_part(&self) -> Self {
        let t = self.transpose();
        (self + &t).scale(0.5)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)] == 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl<T: Scalar> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// LU factorisation with partial (row) pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T: Scalar = f64> {
    n: usize,
    lu: Matrix<T>,
    perm: Vec<usize>,
    swaps: usize,
}

impl<T: Scalar> Lu<T> {
    pub fn new(m: &Matrix<T>) -> Result<Self> {
        let n = m.ensure_square()?;
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let tiny = (n.max(1) as f64) * f64::EPSILON * m.max_abs();
        for col in 0..n {
            let (pivot_row, pivot_mod) = (col..n)
                .map(|r| (r, lu[(r, col)].modulus()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pivot_mod > tiny) || pivot_mod == 0.0 {
                return Err(Error::Singular {
                    column: col,
                    pivot: pivot_mod,
                });
            }
            if pivot_row != col {
                for j in 0..n {
                    let tmp = lu[(col, j)];
                    lu[(col, j)] = lu[(pivot_row, j)];
                    lu[(pivot_row, j)] = tmp;
                }
                perm.swap(col, pivot_row);
                swaps += 1;
            }
            let pivot = lu[(col, col)];
            for r in col + 1..n {
                let factor = lu[(r, col)] / pivot;
                lu[(r, col)] = factor;
                if factor == T::zero() {
                    continue;
                }
                for j in col + 1..n {
                    lu[(r, j)] = lu[(r, j)] - factor * lu[(col, j)];
                }
            }
        }
        Ok(Self { n, lu, perm, swaps })
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        if rhs.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: rhs.len(),
            });
        }
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc = acc - self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc = acc - self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        Ok(x)
    }

    pub fn determinant(&self) -> T {
        let mut det = if self.swaps % 2 == 0 {
            T::one()
        } else {
            -T::one()
        };
        for i in 0..self.n {
            det = det * self.lu[(i, i)];
        }
        det
    }

    pub fn inverse(&self) -> Result<Matrix<T>> {
        let mut inv = Matrix::zeros(self.n, self.n);
        let mut e = vec![T::zero(); self.n];
        for j in 0..self.n {
            e.iter_mut().for_each(|x| *x = T::zero());
            e[j] = T::one();
            let col = self.solve(&e)?;
            for (i, v) in col.into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        Ok(inv)
    }
}

/// Solves `M x = rhs` by LU with partial pivoting.
pub fn lu_solve<T: Scalar>(m: &Matrix<T>, rhs: &[T]) -> Result<Vec<T>> {
    let n = m.ensure_square()?;
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    Lu::new(m)?.solve(rhs)
}

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: Matrix,
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi rotations with a threshold on the first sweeps.
pub fn symmetric_eig(s: &Matrix) -> Result<SymmetricEigen> {
    let n = s.ensure_square()?;
    let scale = s.max_abs().max(1.0);
    let mut asym: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            asym = asym.max((s[(i, j)] - s[(j, i)]).abs());
        }
    }
    if asym > 1e-12 * scale {
        return Err(Error::Asymmetric { asymmetry: asym });
    }

    let mut a = s.symmetric_part();
    let mut v = Matrix::identity(n);
    let fro = a.frobenius().max(f64::MIN_POSITIVE);

    let mut converged = n <= 1;
    for sweep in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off < 1e-14 * fro || off == 0.0 {
            converged = true;
            break;
        }
        let threshold = if sweep < 3 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= threshold || apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                rotate(&mut a, &mut v, p, q, c, sn);
            }
        }
    }
    if !converged {
        return Err(Error::EigenNoConvergence);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, k)] = v[(i, src)];
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

// A <- R' A R with R the (p, q) Givens rotation, V <- V R.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
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

/// Largest eigenvalue of the symmetric part of `a`.
pub fn max_symmetric_eigenvalue(a: &Matrix) -> Result<f64> {
    let eig = symmetric_eig(&a.symmetric_part())?;
    Ok(*eig.values.last().unwrap_or(&0.0))
}

/// Eigenvalues of a general real square matrix.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex64>> {
    let n = a.ensure_square()?;
    if n == 0 {
        return Ok(Vec::new());
    }
    if !a.is_finite() {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    let schur = nalgebra::Schur::try_new(a.to_nalgebra(), 1e-14, 10_000)
        .ok_or(Error::EigenNoConvergence)?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect())
}

/// Maximum real part over the spectrum.
pub fn spectral_abscissa(a: &Matrix) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Solves `A' X + X A = C` for square `X` by vectorisation.
pub fn solve_lyapunov(a: &Matrix, c: &Matrix) -> Result<Matrix> {
    let n = a.ensure_square()?;
    if c.nrows() != n || c.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: c.nrows(),
        });
    }
    let mut big = Matrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for k in 0..n {
                big[(row, k * n + j)] += a[(k, i)];
                big[(row, i * n + k)] += a[(k, j)];
            }
        }
    }
    let x = lu_solve(&big, c.as_slice())?;
    Matrix::from_row_slice(n, n, &x)
}

/// Scaled-Euclidean contraction certificate for a Hurwitz matrix.
#[derive(Clone, Debug)]
pub struct LyapunovScaling {
    pub q: Matrix,
    /// Symmetric positive-definite square root of `q`.
    pub p: Matrix,
    pub eta: f64,
}

/// Fraction of the stability margin used as the certified rate.
pub const LYAPUNOV_MARGIN_FRACTION: f64 = 0.9;

/// Picks `eta = 0.9 * (-max Re spec(A))`, solves
/// `(A + eta I)' Q + Q (A + eta I) = -I` and takes `P = Q^{1/2}`.
pub fn lyapunov_scaling(a: &Matrix) -> Result<LyapunovScaling> {
    let n = a.ensure_square()?;
    let abscissa = spectral_abscissa(a)?;
    if !(abscissa < 0.0) {
        return Err(Error::NotHurwitz { abscissa });
    }
    let eta = LYAPUNOV_MARGIN_FRACTION * (-abscissa);
    let shifted = a + &Matrix::identity(n).scale(eta);
    let rhs = Matrix::identity(n).scale(-1.0);
    let q = solve_lyapunov(&shifted, &rhs)?.symmetric_part();
    let eig = symmetric_eig(&q)?;
    if eig.values.first().is_some_and(|&l| l <= 0.0) {
        return Err(Error::NotHurwitz { abscissa });
    }
    let v = &eig.vectors;
    let root = Matrix::from_diagonal(&eig.values.iter().map(|l| l.sqrt()).collect::<Vec<_>>());
    let p = (&(v * &root) * &v.transpose()).symmetric_part();
    Ok(LyapunovScaling { q, p, eta })
}

/// `y' = A (y - e) + B u`.
#[derive(Clone, Debug, PartialEq)]
pub struct LtiSystem {
    a: Matrix,
    b: Matrix,
    offset: Vec<f64>,
}

impl LtiSystem {
    pub fn new(a: Matrix, b: Matrix, offset: Option<Vec<f64>>) -> Result<Self> {
        let n = a.ensure_square()?;
        if b.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.nrows(),
            });
        }
        let offset = offset.unwrap_or_else(|| vec![0.0; n]);
        if offset.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: offset.len(),
            });
        }
        Ok(Self { a, b, offset })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn field(&self, y: &[f64], u: &[f64]) -> Vec<f64> {
        let dev: Vec<f64> = y.iter().zip(&self.offset).map(|(a, b)| a - b).collect();
        let ay = self.a.mul_vec(&dev);
        let bu = self.b.mul_vec(u);
        ay.iter().zip(&bu).map(|(a, b)| a + b).collect()
    }

    /// Returns the spectral abscissa, or `NotHurwitz`.
    pub fn ensure_hurwitz(&self) -> Result<f64> {
        let abscissa = spectral_abscissa(&self.a)?;
        if abscissa < 0.0 {
            Ok(abscissa)
        } else {
            Err(Error::NotHurwitz { abscissa })
        }
    }
}

/// `(j omega I - A)^{-1} B`, one column per input.
#[derive(Clone, Debug)]
pub struct FrequencyResponse {
    pub omega: f64,
    gain: ComplexMatrix,
}

impl FrequencyResponse {
    pub fn entry(&self, state: usize, input: usize) -> Complex64 {
        self.gain[(state, input)]
    }

    pub fn column(&self, input: usize) -> Vec<Complex64> {
        self.gain.column(input)
    }

    /// Response to the first input column.
    pub fn entries(&self) -> Vec<Complex64> {
        self.column(0)
    }
}

pub fn frequency_response(sys: &LtiSystem, omega: f64) -> Result<FrequencyResponse> {
    let n = sys.dim();
    let mut m = sys.a.scale(-1.0).to_complex();
    for i in 0..n {
        m[(i, i)] += Complex64::new(0.0, omega);
    }
    let lu = Lu::new(&m)?;
    let mut gain = ComplexMatrix::zeros(n, sys.inputs());
    for k in 0..sys.inputs() {
        let b: Vec<Complex64> = sys.b.column(k).iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let x = lu.solve(&b)?;
        let resid = m
            .mul_vec(&x)
            .iter()
            .zip(&b)
            .map(|(r, bb)| (r - bb).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let bnorm = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if resid > 1e-10 * (bnorm + m.frobenius() * xnorm * 1e-4) {
            return Err(Error::Singular {
                column: k,
                pivot: resid,
            });
        }
        for (r, v) in x.into_iter().enumerate() {
            gain[(r, k)] = v;
        }
    }
    Ok(FrequencyResponse { omega, gain })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn lu_identity_and_diagonal() {
        let b = vec![3.0, -1.0, 2.5];
        assert_eq!(lu_solve(&Matrix::identity(3), &b).unwrap(), b);
        let d = Matrix::from_diagonal(&[2.0, 4.0]);
        let x = lu_solve(&d, &[2.0, 4.0]).unwrap();
        assert!(close(x[0], 1.0, 1e-15) && close(x[1], 1.0, 1e-15));
    }

    #[test]
    fn lu_reports_singular() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(lu_solve(&m, &[1.0, 1.0]), Err(Error::Singular { .. })));
        let z = Matrix::<f64>::zeros(2, 2);
        assert!(matches!(lu_solve(&z, &[0.0, 0.0]), Err(Error::Singular { .. })));
    }

    #[test]
    fn lu_rejects_bad_shapes() {
        let m = Matrix::<f64>::zeros(2, 3);
        assert!(matches!(lu_solve(&m, &[1.0, 1.0]), Err(Error::NotSquare { .. })));
        assert!(matches!(
            lu_solve(&Matrix::identity(2), &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn determinant_tracks_swaps() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(close(Lu::new(&m).unwrap().determinant(), -1.0, 1e-15));
    }

    #[test]
    fn symmetric_eig_known_spectra() {
        let e = symmetric_eig(&Matrix::from_diagonal(&[3.0, 1.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 3.0]);
        let swap = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = symmetric_eig(&swap).unwrap();
        assert!(close(e.values[0], -1.0, 1e-14) && close(e.values[1], 1.0, 1e-14));
    }

    #[test]
    fn symmetric_eig_rejects_asymmetric() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(symmetric_eig(&m), Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn lyapunov_minus_identity() {
        let a = Matrix::identity(2).scale(-1.0);
        let s = lyapunov_scaling(&a).unwrap();
        assert!(close(s.eta, 0.9, 1e-12));
        for i in 0..2 {
            assert!(close(s.q[(i, i)], 5.0, 1e-10));
            assert!(close(s.p[(i, i)], 5f64.sqrt(), 1e-10));
        }
        assert!(close(s.q[(0, 1)], 0.0, 1e-12));
    }

    #[test]
    fn lyapunov_decoupled_diagonal() {
        let a = Matrix::from_diagonal(&[-1.0, -2.0]);
        let s = lyapunov_scaling(&a).unwrap();
        assert!(close(s.eta, 0.9, 1e-12));
        assert!(close(s.q[(0, 0)], 1.0 / (2.0 * 0.1), 1e-9));
        assert!(close(s.q[(1, 1)], 1.0 / (2.0 * 1.1), 1e-12));
        assert!(close(s.q[(0, 1)], 0.0, 1e-12));
    }

    #[test]
    fn lyapunov_rejects_non_hurwitz() {
        let a = Matrix::from_diagonal(&[-1.0, 0.5]);
        assert!(matches!(lyapunov_scaling(&a), Err(Error::NotHurwitz { .. })));
        let rot = Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        assert!(matches!(lyapunov_scaling(&rot), Err(Error::NotHurwitz { .. })));
    }

    #[test]
    fn first_order_lag_response() {
        let sys = LtiSystem::new(
            Matrix::from_diagonal(&[-1.0]),
            Matrix::from_diagonal(&[1.0]),
            None,
        )
        .unwrap();
        let dc = frequency_response(&sys, 0.0).unwrap().entry(0, 0);
        assert!(close(dc.re, 1.0, 1e-15) && close(dc.im, 0.0, 1e-15));
        let g = frequency_response(&sys, 1.0).unwrap().entry(0, 0);
        assert!(close(g.norm(), 0.5f64.sqrt(), 1e-14));
        assert!(close(g.arg(), -std::f64::consts::FRAC_PI_4, 1e-14));
    }

    #[test]
    fn frequency_response_on_imaginary_axis_eigenvalue_fails() {
        let rot = Matrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let sys = LtiSystem::new(rot, Matrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap(), None)
            .unwrap();
        assert!(frequency_response(&sys, 1.0).is_err());
    }

    #[test]
    fn eigenvalues_of_rotation() {
        let rot = Matrix::from_rows(&[vec![-0.5, 2.0], vec![-2.0, -0.5]]).unwrap();
        let ev = eigenvalues(&rot).unwrap();
        for z in ev {
            assert!(close(z.re, -0.5, 1e-12) && close(z.im.abs(), 2.0, 1e-12));
        }
    }
}
