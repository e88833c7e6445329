//! Dense matrix kernels for small symmetric problems.
//!
//! Everything in the pipeline works on covariance-sized matrices (a few
//! dozen rows at most), so the factorizations here are plain textbook
//! routines: unblocked Cholesky, partially pivoted LU, and cyclic Jacobi
//! sweeps for symmetric eigenvalues. All of it is generic over the scalar
//! type so the same code runs in `f64` (the default) or `f32`.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

use crate::error::{Error, Result};

/// Scalar type the numerical pipeline is generic over.
pub trait Scalar:
    Float + FromPrimitive + Sum + fmt::Debug + fmt::Display + Default + 'static
{
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + Sum + fmt::Debug + fmt::Display + Default + 'static
{
}

/// Converts an `f64` constant into the working scalar type.
#[inline]
pub(crate) fn fp<F: Scalar>(x: f64) -> F {
    F::from_f64(x).expect("constant must be representable in the scalar type")
}

/// Dense row-major matrix with no shape constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, F::one());
        }
        m
    }

    /// Builds a matrix from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::DimensionMismatch {
                what: "matrix rows",
                expected: 1,
                found: 0,
            });
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    what: "matrix row length",
                    expected: c,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { rows: r, cols: c, data })
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
    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Matrix<F> {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn add(&self, other: &Matrix<F>) -> Result<Matrix<F>> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix<F>) -> Result<Matrix<F>> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Matrix<F>, f: impl Fn(F, F) -> F) -> Result<Matrix<F>> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                what: "elementwise matrix op",
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: F) -> Matrix<F> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Matrix<F>) -> Result<Matrix<F>> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                what: "matrix product inner dimension",
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == F::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> F {
        self.data
            .iter()
            .fold(F::zero(), |acc, &x| acc.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix<F>) -> Result<F> {
        Ok(self.sub(other)?.max_abs())
    }

    /// LU factorization with partial pivoting.
    pub fn lu(&self) -> Result<Lu<F>> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch {
                what: "LU of non-square matrix",
                expected: self.rows,
                found: self.cols,
            });
        }
        let n = self.rows;
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = F::one();
        let floor = self.max_abs() * fp::<F>(n as f64) * F::epsilon();
        for k in 0..n {
            let mut p = k;
            let mut best = lu.get(k, k).abs();
            for i in k + 1..n {
                let v = lu.get(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= floor {
                return Err(Error::SingularMatrix {
                    what: "LU pivot below tolerance",
                });
            }
            if p != k {
                for j in 0..n {
                    let a = lu.get(k, j);
                    let b = lu.get(p, j);
                    lu.set(k, j, b);
                    lu.set(p, j, a);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu.get(k, k);
            for i in k + 1..n {
                let m = lu.get(i, k) / pivot;
                lu.set(i, k, m);
                for j in k + 1..n {
                    let v = lu.get(i, j) - m * lu.get(k, j);
                    lu.set(i, j, v);
                }
            }
        }
        Ok(Lu { lu, perm, sign })
    }

    pub fn inverse(&self) -> Result<Matrix<F>> {
        self.lu()?.inverse()
    }
}

/// Partially pivoted LU factorization of a square matrix.
#[derive(Debug, Clone)]
pub struct Lu<F> {
    lu: Matrix<F>,
    perm: Vec<usize>,
    sign: F,
}

impl<F: Scalar> Lu<F> {
    pub fn det(&self) -> F {
        let mut d = self.sign;
        for i in 0..self.lu.rows() {
            d = d * self.lu.get(i, i);
        }
        d
    }

    pub fn solve_vec(&self, b: &[F]) -> Result<Vec<F>> {
        let n = self.lu.rows();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                what: "LU solve right-hand side",
                expected: n,
                found: b.len(),
            });
        }
        let mut x: Vec<F> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu.get(i, j) * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.lu.get(i, j) * x[j];
            }
            x[i] = s / self.lu.get(i, i);
        }
        Ok(x)
    }

    pub fn solve_mat(&self, b: &Matrix<F>) -> Result<Matrix<F>> {
        let n = self.lu.rows();
        if b.rows() != n {
            return Err(Error::DimensionMismatch {
                what: "LU solve right-hand side rows",
                expected: n,
                found: b.rows(),
            });
        }
        let mut out = Matrix::zeros(n, b.cols());
        let mut col = vec![F::zero(); n];
        for j in 0..b.cols() {
            for i in 0..n {
                col[i] = b.get(i, j);
            }
            let x = self.solve_vec(&col)?;
            for i in 0..n {
                out.set(i, j, x[i]);
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<Matrix<F>> {
        self.solve_mat(&Matrix::identity(self.lu.rows()))
    }
}

/// Symmetric matrix stored densely; construction symmetrizes the input, so
/// `get(i, j) == get(j, i)` holds exactly for the lifetime of the value.
/// Positive (semi)definiteness is checked where an operation requires it,
/// not at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix<F> {
    mat: Matrix<F>,
}

impl<F: Scalar> SpdMatrix<F> {
    /// Builds a symmetric matrix from nested rows, averaging the two
    /// triangles. Rejects non-square and non-finite input.
    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        SpdMatrix::from_matrix(&Matrix::from_rows(rows)?)
    }

    /// Symmetrizes `(m + m^t) / 2` into a new value.
    pub fn from_matrix(m: &Matrix<F>) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch {
                what: "symmetric matrix",
                expected: m.rows(),
                found: m.cols(),
            });
        }
        if !m.is_finite() {
            return Err(Error::DomainError {
                what: "symmetric matrix entries must be finite".into(),
            });
        }
        let half = fp::<F>(0.5);
        let mut sym = Matrix::zeros(m.rows(), m.cols());
        for i in 0..m.rows() {
            for j in 0..=i {
                let v = (m.get(i, j) + m.get(j, i)) * half;
                sym.set(i, j, v);
                sym.set(j, i, v);
            }
        }
        Ok(SpdMatrix { mat: sym })
    }

    pub fn zeros(n: usize) -> Self {
        SpdMatrix {
            mat: Matrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        SpdMatrix {
            mat: Matrix::identity(n),
        }
    }

    pub fn scaled_identity(n: usize, s: F) -> Self {
        SpdMatrix {
            mat: Matrix::identity(n).scale(s),
        }
    }

    pub fn diagonal(d: &[F]) -> Self {
        let mut m = Matrix::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        SpdMatrix { mat: m }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.mat.get(i, j)
    }

    pub fn as_matrix(&self) -> &Matrix<F> {
        &self.mat
    }

    pub fn to_matrix(&self) -> Matrix<F> {
        self.mat.clone()
    }

    pub fn trace(&self) -> F {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn add(&self, other: &SpdMatrix<F>) -> Result<SpdMatrix<F>> {
        Ok(SpdMatrix {
            mat: self.mat.add(&other.mat)?,
        })
    }

    pub fn sub(&self, other: &SpdMatrix<F>) -> Result<SpdMatrix<F>> {
        Ok(SpdMatrix {
            mat: self.mat.sub(&other.mat)?,
        })
    }

    pub fn scale(&self, s: F) -> SpdMatrix<F> {
        SpdMatrix {
            mat: self.mat.scale(s),
        }
    }

    pub fn add_scaled_identity(&self, s: F) -> SpdMatrix<F> {
        let mut m = self.mat.clone();
        for i in 0..m.rows() {
            let v = m.get(i, i) + s;
            m.set(i, i, v);
        }
        SpdMatrix { mat: m }
    }

    pub fn max_abs_diff(&self, other: &SpdMatrix<F>) -> Result<F> {
        self.mat.max_abs_diff(&other.mat)
    }

    /// Principal submatrix on the given (strictly increasing) index set.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Result<SpdMatrix<F>> {
        for &i in idx {
            if i >= self.dim() {
                return Err(Error::DimensionMismatch {
                    what: "principal submatrix index",
                    expected: self.dim(),
                    found: i,
                });
            }
        }
        let k = idx.len();
        let mut m = Matrix::zeros(k, k);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m.set(a, b, self.get(i, j));
            }
        }
        Ok(SpdMatrix { mat: m })
    }

    /// Congruence transform `u^t A u`, symmetrized against roundoff.
    pub fn congruence(&self, u: &Matrix<F>) -> Result<SpdMatrix<F>> {
        let prod = u.transpose().matmul(&self.mat)?.matmul(u)?;
        SpdMatrix::from_matrix(&prod)
    }

    /// Unblocked lower Cholesky factorization; fails on any nonpositive
    /// pivot, which doubles as the fast positive-definiteness test.
    pub fn cholesky(&self) -> Result<CholeskyFactor<F>> {
        let n = self.dim();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d = d - l.get(j, k) * l.get(j, k);
            }
            if d <= F::zero() || !d.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    what: "matrix (Cholesky pivot check)",
                });
            }
            let djj = d.sqrt();
            l.set(j, j, djj);
            for i in j + 1..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s = s - l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / djj);
            }
        }
        Ok(CholeskyFactor { l })
    }

    /// Logarithm of the determinant of a positive definite matrix.
    pub fn logdet(&self) -> Result<F> {
        Ok(self.cholesky()?.logdet())
    }

    pub fn inverse(&self) -> Result<SpdMatrix<F>> {
        self.cholesky()?.inverse()
    }

    /// Cyclic Jacobi sweeps; returns the diagonalized working copy and,
    /// when requested, the accumulated rotation whose columns are the
    /// eigenvectors.
    fn jacobi(&self, accumulate: bool) -> (Matrix<F>, Option<Matrix<F>>) {
        let n = self.dim();
        let mut a = self.mat.clone();
        let mut v = accumulate.then(|| Matrix::identity(n));
        let max_sweeps = 64;
        for _ in 0..max_sweeps {
            let mut off = F::zero();
            for i in 0..n {
                for j in i + 1..n {
                    off = off + a.get(i, j) * a.get(i, j);
                }
            }
            let diag_scale: F = (0..n).map(|i| a.get(i, i) * a.get(i, i)).sum();
            let tol = (diag_scale + off) * F::epsilon() * F::epsilon();
            if off <= tol {
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = a.get(p, q);
                    if apq == F::zero() {
                        continue;
                    }
                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    let theta = (aqq - app) / (fp::<F>(2.0) * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt());
                    let c = F::one() / (t * t + F::one()).sqrt();
                    let s = t * c;
                    let tau = s / (F::one() + c);
                    a.set(p, p, app - t * apq);
                    a.set(q, q, aqq + t * apq);
                    a.set(p, q, F::zero());
                    a.set(q, p, F::zero());
                    for r in 0..n {
                        if r == p || r == q {
                            continue;
                        }
                        let arp = a.get(r, p);
                        let arq = a.get(r, q);
                        let new_rp = arp - s * (arq + tau * arp);
                        let new_rq = arq + s * (arp - tau * arq);
                        a.set(r, p, new_rp);
                        a.set(p, r, new_rp);
                        a.set(r, q, new_rq);
                        a.set(q, r, new_rq);
                    }
                    if let Some(vm) = v.as_mut() {
                        for r in 0..n {
                            let vrp = vm.get(r, p);
                            let vrq = vm.get(r, q);
                            vm.set(r, p, vrp - s * (vrq + tau * vrp));
                            vm.set(r, q, vrq + s * (vrp - tau * vrq));
                        }
                    }
                }
            }
        }
        (a, v)
    }

    /// All eigenvalues in ascending order, by cyclic Jacobi sweeps.
    pub fn eigenvalues(&self) -> Vec<F> {
        let n = self.dim();
        if n == 1 {
            return vec![self.get(0, 0)];
        }
        let (a, _) = self.jacobi(false);
        let mut eig: Vec<F> = (0..n).map(|i| a.get(i, i)).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
        eig
    }

    /// Eigenvalues in ascending order with matching orthonormal
    /// eigenvector columns.
    pub fn eigen_decomposition(&self) -> (Vec<F>, Matrix<F>) {
        let n = self.dim();
        if n == 1 {
            return (vec![self.get(0, 0)], Matrix::identity(1));
        }
        let (a, v) = self.jacobi(true);
        let v = v.expect("accumulation requested");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| {
            a.get(x, x)
                .partial_cmp(&a.get(y, y))
                .expect("eigenvalues are finite")
        });
        let mut vals = Vec::with_capacity(n);
        let mut vecs = Matrix::zeros(n, n);
        for (col, &src) in order.iter().enumerate() {
            vals.push(a.get(src, src));
            for r in 0..n {
                vecs.set(r, col, v.get(r, src));
            }
        }
        (vals, vecs)
    }

    pub fn min_eigenvalue(&self) -> F {
        self.eigenvalues()[0]
    }

    /// Relative positive-definiteness tolerance, `1e-10 * trace / dim`.
    pub fn pd_tolerance(&self) -> F {
        let n = fp::<F>(self.dim() as f64);
        fp::<F>(1e-10) * self.trace().abs() / n
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > self.pd_tolerance()
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        self.min_eigenvalue() > -self.pd_tolerance() - F::min_positive_value()
    }
}

/// Lower Cholesky factor of a positive definite matrix.
#[derive(Debug, Clone)]
pub struct CholeskyFactor<F> {
    l: Matrix<F>,
}

impl<F: Scalar> CholeskyFactor<F> {
    pub fn logdet(&self) -> F {
        let two = fp::<F>(2.0);
        (0..self.l.rows())
            .map(|i| self.l.get(i, i).ln())
            .sum::<F>()
            * two
    }

    pub fn solve_vec(&self, b: &[F]) -> Result<Vec<F>> {
        let n = self.l.rows();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                what: "Cholesky solve right-hand side",
                expected: n,
                found: b.len(),
            });
        }
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s = s - self.l.get(i, j) * y[j];
            }
            y[i] = s / self.l.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s = s - self.l.get(j, i) * y[j];
            }
            y[i] = s / self.l.get(i, i);
        }
        Ok(y)
    }

    pub fn solve_mat(&self, b: &Matrix<F>) -> Result<Matrix<F>> {
        let n = self.l.rows();
        if b.rows() != n {
            return Err(Error::DimensionMismatch {
                what: "Cholesky solve right-hand side rows",
                expected: n,
                found: b.rows(),
            });
        }
        let mut out = Matrix::zeros(n, b.cols());
        let mut col = vec![F::zero(); n];
        for j in 0..b.cols() {
            for i in 0..n {
                col[i] = b.get(i, j);
            }
            let x = self.solve_vec(&col)?;
            for i in 0..n {
                out.set(i, j, x[i]);
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<SpdMatrix<F>> {
        let inv = self.solve_mat(&Matrix::identity(self.l.rows()))?;
        SpdMatrix::from_matrix(&inv)
    }

    /// Solves `L Y = B` by forward substitution.
    pub fn forward_solve(&self, b: &Matrix<F>) -> Result<Matrix<F>> {
        let n = self.l.rows();
        if b.rows() != n {
            return Err(Error::DimensionMismatch {
                what: "triangular solve right-hand side rows",
                expected: n,
                found: b.rows(),
            });
        }
        let mut y = b.clone();
        for j in 0..b.cols() {
            for i in 0..n {
                let mut s = y.get(i, j);
                for r in 0..i {
                    s = s - self.l.get(i, r) * y.get(r, j);
                }
                y.set(i, j, s / self.l.get(i, i));
            }
        }
        Ok(y)
    }

    /// Solves `L' Y = B` by back substitution.
    pub fn transpose_solve(&self, b: &Matrix<F>) -> Result<Matrix<F>> {
        let n = self.l.rows();
        if b.rows() != n {
            return Err(Error::DimensionMismatch {
                what: "triangular solve right-hand side rows",
                expected: n,
                found: b.rows(),
            });
        }
        let mut y = b.clone();
        for j in 0..b.cols() {
            for i in (0..n).rev() {
                let mut s = y.get(i, j);
                for r in i + 1..n {
                    s = s - self.l.get(r, i) * y.get(r, j);
                }
                y.set(i, j, s / self.l.get(i, i));
            }
        }
        Ok(y)
    }

    /// Congruence by the inverse factor: `inv(L) B inv(L)'`, which shares
    /// the eigenvalues of `inv(A) B` but stays symmetric.
    pub fn whiten(&self, b: &SpdMatrix<F>) -> Result<SpdMatrix<F>> {
        let half = self.forward_solve(b.as_matrix())?;
        let full = self.forward_solve(&half.transpose())?;
        SpdMatrix::from_matrix(&full)
    }
}

/// Strict Loewner comparison: true iff the smallest eigenvalue of `b - a`
/// exceeds `tol`.
pub fn loewner_less<F: Scalar>(a: &SpdMatrix<F>, b: &SpdMatrix<F>, tol: F) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            what: "Loewner comparison",
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(b.sub(a)?.min_eigenvalue() > tol)
}

/// Kronecker product of two dense matrices.
pub fn kron<F: Scalar>(a: &Matrix<F>, b: &Matrix<F>) -> Matrix<F> {
    let mut out = Matrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let aij = a.get(i, j);
            for k in 0..b.rows() {
                for l in 0..b.cols() {
                    out.set(i * b.rows() + k, j * b.cols() + l, aij * b.get(k, l));
                }
            }
        }
    }
    out
}

/// Residual of the rank-modification inversion identity
/// `(A + C B D)^{-1} = A^{-1} - A^{-1} C (B^{-1} + D A^{-1} C)^{-1} D A^{-1}`,
/// as the max-abs entry difference between the two sides.
pub fn inversion_identity_residual<F: Scalar>(
    a: &SpdMatrix<F>,
    b: &SpdMatrix<F>,
    c: &Matrix<F>,
    d: &Matrix<F>,
) -> Result<F> {
    let m = a.dim();
    let n = b.dim();
    if c.rows() != m || c.cols() != n {
        return Err(Error::DimensionMismatch {
            what: "inversion identity factor C",
            expected: m * n,
            found: c.rows() * c.cols(),
        });
    }
    if d.rows() != n || d.cols() != m {
        return Err(Error::DimensionMismatch {
            what: "inversion identity factor D",
            expected: n * m,
            found: d.rows() * d.cols(),
        });
    }
    let a_inv = a.inverse()?.to_matrix();
    let b_inv = b.inverse()?.to_matrix();
    let lhs = a
        .as_matrix()
        .add(&c.matmul(b.as_matrix())?.matmul(d)?)?
        .inverse()?;
    let core = b_inv.add(&d.matmul(&a_inv)?.matmul(c)?)?.inverse()?;
    let correction = a_inv
        .matmul(c)?
        .matmul(&core)?
        .matmul(d)?
        .matmul(&a_inv)?;
    let rhs = a_inv.sub(&correction)?;
    lhs.max_abs_diff(&rhs)
}

/// Checks the two standard consequences of a strict Loewner ordering
/// `A > B > 0`: the determinant shrinks and the inverse ordering flips.
/// Both comparisons carry a small numerical slack so exact mathematical
/// truths never fail from roundoff.
pub fn ordering_consequences_hold<F: Scalar>(a: &SpdMatrix<F>, b: &SpdMatrix<F>) -> Result<bool> {
    let slack = fp::<F>(1e-10);
    if !loewner_less(b, a, F::zero())? || b.cholesky().is_err() {
        return Err(Error::OrderingViolation {
            what: "ordering consequences require A > B > 0",
        });
    }
    let det_ok = a.logdet()? > b.logdet()? - slack;
    let inv_flip = b
        .inverse()?
        .sub(&a.inverse()?)?
        .min_eigenvalue()
        > -slack;
    Ok(det_ok && inv_flip)
}
